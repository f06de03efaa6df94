//! Auction-based relay selection for wireless-power-transfer incentivized
//! relaying.
//!
//! A source must deliver `D` bits/Hz to an access point, either directly or
//! through one of `n` candidate relays that are paid in harvested energy.
//! The crate provides the closed-form optimal transmit schedule for an
//! effective channel ([`optim`]), random instance generation ([`scenario`]),
//! the second-preferred-offer auction, its incentive-compatible modification
//! and a perfect-information baseline ([`mechanisms`]), and a seeded Monte
//! Carlo harness ([`montecarlo`]).

// Negated comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod mechanisms;
pub mod montecarlo;
pub mod numerics;
pub mod optim;
pub mod records;
pub mod scenario;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use mechanisms::{
    cooperative_baseline, ex_post_utility, run_mspoa, run_spoa, run_truthful, score, truthful_bid, AuctionOutcome, Bid,
    Mechanism, StrategyProfile,
};
pub use montecarlo::{run_sweep, CellStats, SweepConfig};
pub use optim::{optimal_schedule, value_of_z, z_of_value, EffectiveChannel, ScheduleSolution, SystemParams};
pub use scenario::{sample_instance, ChannelConfig, GeometryConfig, Point, ScenarioInstance};
