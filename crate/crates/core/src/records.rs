//! Versioned JSON records for instances, profiles, outcomes and sweep
//! results.
//!
//! Every record is an envelope `{"format": <kind>, "version": 1, "data": ...}`.
//! Readers reject unknown kinds and versions.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{AuctionOutcome, StrategyProfile};
use crate::montecarlo::CellStats;
use crate::optim::ScheduleSolution;
use crate::scenario::ScenarioInstance;

pub const RECORD_VERSION: u32 = 1;

pub trait RecordKind: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl RecordKind for ScenarioInstance {
    const KIND: &'static str = "wpt-relay/instance";
}

impl RecordKind for StrategyProfile {
    const KIND: &'static str = "wpt-relay/profile";
}

impl RecordKind for AuctionOutcome {
    const KIND: &'static str = "wpt-relay/outcome";
}

impl RecordKind for ScheduleSolution {
    const KIND: &'static str = "wpt-relay/schedule";
}

impl RecordKind for Vec<CellStats> {
    const KIND: &'static str = "wpt-relay/sweep";
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<T> {
    format: String,
    version: u32,
    data: T,
}

pub fn to_json<T: RecordKind + Clone>(value: &T) -> Result<String> {
    let env = Envelope {
        format: T::KIND.to_string(),
        version: RECORD_VERSION,
        data: value.clone(),
    };
    Ok(serde_json::to_string_pretty(&env)?)
}

pub fn from_json<T: RecordKind>(text: &str) -> Result<T> {
    let env: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    if env.format != T::KIND {
        return Err(Error::Format(format!(
            "expected a '{}' record, found '{}'",
            T::KIND,
            env.format
        )));
    }
    if env.version != RECORD_VERSION {
        return Err(Error::Format(format!(
            "unsupported {} record version {} (this build reads version {RECORD_VERSION})",
            T::KIND,
            env.version
        )));
    }
    Ok(serde_json::from_value(env.data)?)
}

pub fn read_file<T: RecordKind>(path: &std::path::Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn write_file<T: RecordKind + Clone>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
