//! Multi-attribute reverse auctions over `(T, P_tot)` bids.
//!
//! Bids are scored by the source's cost `T (lambda + P_tot)`; the lowest
//! score wins. The second-preferred-offer auction (SPOA) pays the runner-up
//! bid verbatim, the modified auction (MSPOA) maps the runner-up score back
//! onto the set of optimal schedules before paying it.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, EffectiveChannel, SystemParams};
use crate::scenario::ScenarioInstance;

pub mod deviation;

pub use deviation::{non_ic_witness, sample_deviations, spoa_loss_profile, witness_bid};

/// A time-power offer. Bidder 0 is the source's reservation bid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bid {
    #[serde(rename = "t_s")]
    pub duration_s: f64,
    #[serde(rename = "p_tot_w")]
    pub total_power_w: f64,
    pub bidder: usize,
}

impl Bid {
    pub fn new(duration_s: f64, total_power_w: f64, bidder: usize, params: &SystemParams) -> Result<Self> {
        let bid = Self {
            duration_s,
            total_power_w,
            bidder,
        };
        bid.validate(params)?;
        Ok(bid)
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidBid(format!(
                "bidder {}: T must be > 0 (got {})",
                self.bidder, self.duration_s
            )));
        }
        if !(self.total_power_w > 0.0 && self.total_power_w <= params.p_max_w) {
            return Err(Error::InvalidBid(format!(
                "bidder {}: P_tot must lie in (0, P_max = {}] (got {})",
                self.bidder, params.p_max_w, self.total_power_w
            )));
        }
        Ok(())
    }

    pub fn energy_j(&self) -> f64 {
        self.duration_s * self.total_power_w
    }
}

/// Scoring rule `T (lambda + P_tot)`; equals `-U_s`, lower is better.
pub fn score(bid: &Bid, params: &SystemParams) -> f64 {
    bid.duration_s * (params.delay_power_w + bid.total_power_w)
}

/// The bid revealing channel `z`: the optimal schedule `(T*(z), P*(z))`.
pub fn truthful_bid(z: EffectiveChannel, bidder: usize, params: &SystemParams) -> Result<Bid> {
    let s = optim::optimal_schedule(z, params)?;
    Ok(Bid {
        duration_s: s.duration_s,
        total_power_w: s.total_power_w,
        bidder,
    })
}

/// One sealed bid per participant, including the reservation bid `b_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyProfile {
    pub bids: Vec<Bid>,
}

impl StrategyProfile {
    pub fn new(bids: Vec<Bid>, params: &SystemParams) -> Result<Self> {
        let profile = Self { bids };
        profile.validate(params)?;
        Ok(profile)
    }

    /// Everyone, including the source, bids truthfully.
    pub fn truthful(inst: &ScenarioInstance, params: &SystemParams) -> Result<Self> {
        let bids = (0..=inst.n())
            .map(|i| truthful_bid(inst.channel(i)?, i, params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bids })
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.bids {
            b.validate(params)?;
            if !seen.insert(b.bidder) {
                return Err(Error::InvalidProfile(format!("duplicate bidder index {}", b.bidder)));
            }
        }
        if !seen.contains(&0) {
            return Err(Error::InvalidProfile(
                "missing the reservation bid (bidder 0)".to_string(),
            ));
        }
        Ok(())
    }

    fn validate_against(&self, inst: &ScenarioInstance, params: &SystemParams) -> Result<()> {
        self.validate(params)?;
        if let Some(b) = self.bids.iter().find(|b| b.bidder > inst.n()) {
            return Err(Error::InvalidProfile(format!(
                "bidder {} does not exist in an instance with {} candidates",
                b.bidder,
                inst.n()
            )));
        }
        Ok(())
    }

    pub fn bid_of(&self, bidder: usize) -> Option<&Bid> {
        self.bids.iter().find(|b| b.bidder == bidder)
    }

    /// Replaces (or inserts) the bid of `bid.bidder`.
    pub fn with_bid(&self, bid: Bid) -> Self {
        let mut bids: Vec<Bid> = self.bids.iter().copied().filter(|b| b.bidder != bid.bidder).collect();
        bids.push(bid);
        Self { bids }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Cooperative,
    Spoa,
    Mspoa,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Cooperative, Mechanism::Spoa, Mechanism::Mspoa];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Cooperative => "cooperative",
            Mechanism::Spoa => "spoa",
            Mechanism::Mspoa => "mspoa",
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cooperative" => Ok(Mechanism::Cooperative),
            "spoa" => Ok(Mechanism::Spoa),
            "mspoa" => Ok(Mechanism::Mspoa),
            other => Err(Error::Config(vec![format!(
                "unknown mechanism '{other}' (expected cooperative, spoa or mspoa)"
            )])),
        }
    }
}

/// Winner, transmit schedule actually used, and the resulting costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionOutcome {
    pub mechanism: Mechanism,
    /// 0 means direct transmission by the source.
    pub winner: usize,
    pub runner_up: Option<usize>,
    #[serde(rename = "payment_t_s")]
    pub payment_duration_s: f64,
    #[serde(rename = "payment_p_w")]
    pub payment_power_w: f64,
    pub source_cost: f64,
    #[serde(rename = "winner_net_energy_j")]
    pub winner_net_energy: f64,
    /// Whether the winner's own relay power stays within `P_max`
    /// (always `true` for direct transmission). Reported, not enforced.
    pub winner_relay_feasible: bool,
}

impl AuctionOutcome {
    pub fn energy_j(&self) -> f64 {
        self.payment_duration_s * self.payment_power_w
    }
}

fn rank(a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Winner and runner-up by score; ties go to the lower bidder index.
fn select(profile: &StrategyProfile, params: &SystemParams) -> Result<(Bid, Bid)> {
    if profile.bids.len() < 2 {
        return Err(Error::NoRunnerUp(profile.bids.len()));
    }
    let mut scored: Vec<(f64, usize, Bid)> = profile.bids.iter().map(|b| (score(b, params), b.bidder, *b)).collect();
    scored.sort_by(|a, b| rank((a.0, a.1), (b.0, b.1)));
    Ok((scored[0].2, scored[1].2))
}

/// Winner-side bookkeeping shared by all mechanisms.
fn settle(
    mechanism: Mechanism,
    winner: usize,
    runner_up: Option<usize>,
    duration_s: f64,
    power_w: f64,
    inst: &ScenarioInstance,
    params: &SystemParams,
) -> Result<AuctionOutcome> {
    let (net, feasible) = if winner == 0 {
        (0.0, true)
    } else {
        let z = inst.channel(winner)?;
        let at = inst.wpt_efficiency(winner)?;
        let floor = optim::min_total_power(duration_s, z, params)?;
        let relay = inst.relay_power(winner, duration_s, params)?;
        (duration_s * at * (power_w - floor), relay <= params.p_max_w)
    };
    Ok(AuctionOutcome {
        mechanism,
        winner,
        runner_up,
        payment_duration_s: duration_s,
        payment_power_w: power_w,
        source_cost: duration_s * (params.delay_power_w + power_w),
        winner_net_energy: net,
        winner_relay_feasible: feasible,
    })
}

/// Perfect-information baseline: pick the lowest `v(z_i)` over the source
/// and all candidates and transmit at that party's own optimal schedule.
pub fn cooperative_baseline(inst: &ScenarioInstance, params: &SystemParams) -> Result<AuctionOutcome> {
    let mut ranked = (0..=inst.n())
        .map(|i| Ok((optim::optimal_schedule(inst.channel(i)?, params)?, i)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| rank((a.0.cost, a.1), (b.0.cost, b.1)));
    let (best, winner) = ranked[0];
    let runner_up = ranked.get(1).map(|r| r.1);
    let mut out = settle(
        Mechanism::Cooperative,
        winner,
        runner_up,
        best.duration_s,
        best.total_power_w,
        inst,
        params,
    )?;
    // Break-even payment: the winner's schedule is its own P_tot^min.
    out.winner_net_energy = 0.0;
    Ok(out)
}

/// Second-preferred-offer auction: the best bid wins and the runner-up bid
/// is executed verbatim. If the source's reservation bid wins it transmits
/// directly at that bid.
pub fn run_spoa(profile: &StrategyProfile, inst: &ScenarioInstance, params: &SystemParams) -> Result<AuctionOutcome> {
    profile.validate_against(inst, params)?;
    let (win, second) = select(profile, params)?;
    let pay = if win.bidder == 0 { win } else { second };
    settle(
        Mechanism::Spoa,
        win.bidder,
        Some(second.bidder),
        pay.duration_s,
        pay.total_power_w,
        inst,
        params,
    )
}

/// Modified auction: same winner as [`run_spoa`], but the payment is the
/// optimal schedule of `z(u)` where `u` is the runner-up score.
pub fn run_mspoa(profile: &StrategyProfile, inst: &ScenarioInstance, params: &SystemParams) -> Result<AuctionOutcome> {
    profile.validate_against(inst, params)?;
    let (win, second) = select(profile, params)?;
    let (t, p) = if win.bidder == 0 {
        (win.duration_s, win.total_power_w)
    } else {
        let z = optim::z_of_value(score(&second, params), params)?;
        let s = optim::optimal_schedule(z, params)?;
        (s.duration_s, s.total_power_w)
    };
    settle(Mechanism::Mspoa, win.bidder, Some(second.bidder), t, p, inst, params)
}

/// Runs `mechanism` with everyone bidding truthfully.
pub fn run_truthful(mechanism: Mechanism, inst: &ScenarioInstance, params: &SystemParams) -> Result<AuctionOutcome> {
    match mechanism {
        Mechanism::Cooperative => cooperative_baseline(inst, params),
        Mechanism::Spoa => run_spoa(&StrategyProfile::truthful(inst, params)?, inst, params),
        Mechanism::Mspoa => run_mspoa(&StrategyProfile::truthful(inst, params)?, inst, params),
    }
}

/// Net energy change of participant `i` under `outcome` (joules).
pub fn ex_post_utility(
    i: usize,
    outcome: &AuctionOutcome,
    inst: &ScenarioInstance,
    params: &SystemParams,
) -> Result<f64> {
    if i > inst.n() {
        return Err(Error::InvalidProfile(format!(
            "participant {i} out of range 0..={}",
            inst.n()
        )));
    }
    if i == 0 || i != outcome.winner {
        return Ok(0.0);
    }
    let t = outcome.payment_duration_s;
    let floor = optim::min_total_power(t, inst.channel(i)?, params)?;
    Ok(t * inst.wpt_efficiency(i)? * (outcome.payment_power_w - floor))
}
