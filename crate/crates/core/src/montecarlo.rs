//! Seeded batch experiments over the number of candidates and the delay
//! power, aggregating transmission time, energy and harvested energy.
//!
//! Every trial draws its instance from its own ChaCha stream selected by
//! `(n, trial)`, so results do not depend on scheduling or thread count.
//! The same instance is reused for every delay power and every mechanism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{run_truthful, AuctionOutcome, Mechanism};
use crate::optim::SystemParams;
use crate::scenario::{sample_instance, ChannelConfig, GeometryConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub lambda_values_w: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub mechanisms: Vec<Mechanism>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: (1..=8).collect(),
            lambda_values_w: vec![1.0, 10.0, 100.0],
            trials: 5000,
            seed: 2024,
            mechanisms: Mechanism::ALL.to_vec(),
        }
    }
}

impl SweepConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.trials == 0 {
            out.push("sweep.trials must be >= 1".to_string());
        }
        if self.n_values.is_empty() {
            out.push("sweep.n_values must not be empty".to_string());
        }
        if self.n_values.contains(&0) {
            out.push("sweep.n_values entries must be >= 1".to_string());
        }
        if self.lambda_values_w.is_empty() {
            out.push("sweep.lambda_values_w must not be empty".to_string());
        }
        for l in &self.lambda_values_w {
            if !(l.is_finite() && *l > 0.0) {
                out.push(format!("sweep.lambda_values_w entries must be > 0 (got {l})"));
            }
        }
        if self.mechanisms.is_empty() {
            out.push("sweep.mechanisms must not be empty".to_string());
        }
        out
    }
}

/// Aggregated metrics of one `(n, lambda, mechanism)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub n: usize,
    pub lambda_w: f64,
    pub mechanism: Mechanism,
    pub trials: usize,
    pub mean_t_s: f64,
    pub std_err_t_s: f64,
    pub mean_energy_mj: f64,
    pub std_err_energy_mj: f64,
    /// `10 log10` of the mean energy in millijoules.
    pub mean_energy_db_mj: f64,
    pub mean_net_harvest_j: f64,
    pub std_err_net_harvest_j: f64,
    pub win_rate_source: f64,
    pub mean_source_cost: f64,
}

/// Per-trial random stream: root seed as key, `(n, trial)` as stream id.
pub fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = xs.clone().fold((0usize, 0.0), |(c, s), x| (c + 1, s + x));
    let mean = sum / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    let var = ss / (count - 1) as f64;
    (mean, (var / count as f64).sqrt())
}

/// Means and standard errors over the outcomes of one cell, in input order.
pub fn aggregate(n: usize, lambda_w: f64, mechanism: Mechanism, outcomes: &[AuctionOutcome]) -> Result<CellStats> {
    if outcomes.is_empty() {
        return Err(Error::InvalidParams("cannot aggregate an empty cell".to_string()));
    }
    let it = outcomes.iter();
    let (mean_t, se_t) = mean_and_stderr(it.clone().map(|o| o.payment_duration_s));
    let (mean_e, se_e) = mean_and_stderr(it.clone().map(|o| o.energy_j() * 1e3));
    let (mean_h, se_h) = mean_and_stderr(it.clone().map(|o| o.winner_net_energy));
    let (mean_cost, _) = mean_and_stderr(it.clone().map(|o| o.source_cost));
    let source_wins = outcomes.iter().filter(|o| o.winner == 0).count();
    Ok(CellStats {
        n,
        lambda_w,
        mechanism,
        trials: outcomes.len(),
        mean_t_s: mean_t,
        std_err_t_s: se_t,
        mean_energy_mj: mean_e,
        std_err_energy_mj: se_e,
        mean_energy_db_mj: 10.0 * mean_e.log10(),
        mean_net_harvest_j: mean_h,
        std_err_net_harvest_j: se_h,
        win_rate_source: source_wins as f64 / outcomes.len() as f64,
        mean_source_cost: mean_cost,
    })
}

/// Runs one trial: samples the instance and evaluates every
/// `(lambda, mechanism)` pair on it under truthful bidding.
pub fn run_trial(
    cfg: &SweepConfig,
    n: usize,
    trial: usize,
    geom: &GeometryConfig,
    chan: &ChannelConfig,
    params: &SystemParams,
) -> Result<Vec<AuctionOutcome>> {
    let mut rng = trial_rng(cfg.seed, n, trial);
    let inst = sample_instance(n, geom, chan, params, &mut rng)?;
    let mut out = Vec::with_capacity(cfg.lambda_values_w.len() * cfg.mechanisms.len());
    for &lambda in &cfg.lambda_values_w {
        let p = params.with_delay_power(lambda);
        for &m in &cfg.mechanisms {
            out.push(run_truthful(m, &inst, &p)?);
        }
    }
    Ok(out)
}

/// Runs the full grid. Cells are returned ordered by `n`, then `lambda`,
/// then mechanism, in the order given by the config.
pub fn run_sweep(
    cfg: &SweepConfig,
    geom: &GeometryConfig,
    chan: &ChannelConfig,
    params: &SystemParams,
) -> Result<Vec<CellStats>> {
    let mut violations = cfg.violations();
    violations.extend(geom.violations());
    violations.extend(chan.violations());
    violations.extend(params.violations());
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }

    let per_trial = cfg.lambda_values_w.len() * cfg.mechanisms.len();
    let mut cells = Vec::with_capacity(cfg.n_values.len() * per_trial);
    for &n in &cfg.n_values {
        let trials: Vec<Vec<AuctionOutcome>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                run_trial(cfg, n, t, geom, chan, params)
                    .map_err(|e| Error::Sampling(format!("cell n = {n}, trial {t}: {e}")))
            })
            .collect::<Result<_>>()?;
        for (li, &lambda) in cfg.lambda_values_w.iter().enumerate() {
            for (mi, &m) in cfg.mechanisms.iter().enumerate() {
                let k = li * cfg.mechanisms.len() + mi;
                let column: Vec<AuctionOutcome> = trials.iter().map(|row| row[k]).collect();
                cells.push(aggregate(n, lambda, m, &column)?);
            }
        }
    }
    Ok(cells)
}

/// Writes one CSV row per cell with the [`CellStats`] field names as header.
pub fn write_csv<W: std::io::Write>(cells: &[CellStats], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<CellStats>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Looks up a cell.
pub fn find_cell(cells: &[CellStats], n: usize, lambda_w: f64, m: Mechanism) -> Option<&CellStats> {
    cells
        .iter()
        .find(|c| c.n == n && c.lambda_w == lambda_w && c.mechanism == m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::cooperative_baseline;

    fn outcome(t: f64, p: f64, winner: usize, net: f64) -> AuctionOutcome {
        AuctionOutcome {
            mechanism: Mechanism::Mspoa,
            winner,
            runner_up: Some(0),
            payment_duration_s: t,
            payment_power_w: p,
            source_cost: t * (1.0 + p),
            winner_net_energy: net,
            winner_relay_feasible: true,
        }
    }

    #[test]
    fn aggregate_single_outcome() {
        let c = aggregate(3, 1.0, Mechanism::Mspoa, &[outcome(2.0, 0.5, 1, 1e-3)]).unwrap();
        assert_eq!(c.mean_t_s, 2.0);
        assert_eq!(c.mean_energy_mj, 1000.0);
        assert_eq!(c.mean_net_harvest_j, 1e-3);
        assert_eq!(c.std_err_t_s, 0.0);
        assert_eq!(c.win_rate_source, 0.0);
        assert!((c.mean_energy_db_mj - 30.0).abs() < 1e-12);
    }

    #[test]
    fn one_millijoule_is_zero_db() {
        let c = aggregate(1, 1.0, Mechanism::Mspoa, &[outcome(1.0, 1e-3, 0, 0.0)]).unwrap();
        assert!(c.mean_energy_db_mj.abs() < 1e-12);
        assert_eq!(c.win_rate_source, 1.0);
    }

    #[test]
    fn aggregate_means_and_errors() {
        let c = aggregate(
            1,
            1.0,
            Mechanism::Mspoa,
            &[outcome(1.0, 1.0, 1, 0.0), outcome(3.0, 1.0, 0, 0.0)],
        )
        .unwrap();
        assert_eq!(c.mean_t_s, 2.0);
        // sample sd = sqrt(2), stderr = 1
        assert!((c.std_err_t_s - 1.0).abs() < 1e-15);
        assert_eq!(c.win_rate_source, 0.5);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(aggregate(1, 1.0, Mechanism::Spoa, &[]).is_err());
    }

    #[test]
    fn single_trial_matches_direct_computation() {
        let cfg = SweepConfig {
            n_values: vec![3],
            lambda_values_w: vec![10.0],
            trials: 1,
            seed: 77,
            mechanisms: vec![Mechanism::Cooperative],
        };
        let (g, c, p) = (
            GeometryConfig::default(),
            ChannelConfig::default(),
            SystemParams::default(),
        );
        let cells = run_sweep(&cfg, &g, &c, &p).unwrap();
        assert_eq!(cells.len(), 1);
        let inst = sample_instance(3, &g, &c, &p, &mut trial_rng(77, 3, 0)).unwrap();
        let direct = cooperative_baseline(&inst, &p.with_delay_power(10.0)).unwrap();
        assert_eq!(cells[0].mean_t_s, direct.payment_duration_s);
        assert_eq!(cells[0].mean_energy_mj, direct.energy_j() * 1e3);
        assert_eq!(cells[0].mean_net_harvest_j, 0.0);
    }

    #[test]
    fn invalid_sweep_lists_all_violations() {
        let cfg = SweepConfig {
            n_values: vec![],
            lambda_values_w: vec![-1.0],
            trials: 0,
            seed: 0,
            mechanisms: vec![],
        };
        assert_eq!(cfg.violations().len(), 4);
        let err = run_sweep(
            &cfg,
            &GeometryConfig::default(),
            &ChannelConfig::default(),
            &SystemParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(v) if v.len() == 4));
    }

    #[test]
    fn csv_round_trip() {
        let cfg = SweepConfig {
            n_values: vec![1, 2],
            lambda_values_w: vec![1.0],
            trials: 20,
            seed: 3,
            mechanisms: Mechanism::ALL.to_vec(),
        };
        let cells = run_sweep(
            &cfg,
            &GeometryConfig::default(),
            &ChannelConfig::default(),
            &SystemParams::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&cells, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, cells);
        let header = String::from_utf8(buf).unwrap();
        assert!(header.starts_with("n,lambda_w,mechanism,trials,mean_t_s,"));
    }
}
