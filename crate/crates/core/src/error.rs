use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),
    #[error("effective channel must be finite and > 0, got {0}")]
    InvalidChannel(f64),
    #[error("transmit duration must be finite and > 0, got {0}")]
    NonPositiveDuration(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("candidate sampling failed: {0}")]
    Sampling(String),
    #[error("invalid scenario instance: {0}")]
    InvalidInstance(String),
    #[error("invalid bid: {0}")]
    InvalidBid(String),
    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),
    #[error("auction needs at least two bids to determine a runner-up, got {0}")]
    NoRunnerUp(usize),
    #[error("witness offset eps1 = {eps1} must lie in (0, z = {z})")]
    WitnessOutOfRange { eps1: f64, z: f64 },
    #[error("witness construction does not undercut v(z) here (score {score} >= {value})")]
    WitnessUnavailable { score: f64, value: f64 },
    #[error("configuration invalid:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("record format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
