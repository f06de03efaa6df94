//! Self-verification suite behind `wpt-relay verify`.
//!
//! Each check returns a [`CheckResult`]; the closed-form solver is passed in
//! explicitly so the harness itself can be tested against a corrupted
//! solver.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mechanisms::{
    ex_post_utility, run_mspoa, run_spoa, sample_deviations, spoa_loss_profile, truthful_bid, Bid, Mechanism,
    StrategyProfile,
};
use crate::montecarlo::{self, find_cell, CellStats, SweepConfig};
use crate::numerics::{self, ToleranceSpec};
use crate::optim::{self, EffectiveChannel, ScheduleSolution, SystemParams};
use crate::scenario::{sample_instance, ChannelConfig, GeometryConfig};

pub type Solver = fn(EffectiveChannel, &SystemParams) -> Result<ScheduleSolution>;

/// Utility slack allowed in the incentive fuzzers, joules.
pub const UTILITY_SLACK_J: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

fn params_with(lambda: f64, p_max: f64) -> SystemParams {
    SystemParams {
        delay_power_w: lambda,
        p_max_w: p_max,
        ..SystemParams::default()
    }
}

pub const LAMBDA_GRID: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
pub const P_MAX_GRID: [f64; 2] = [1.0, 10.0];

/// Closed form vs golden-section search of the cost over the feasible interval.
pub fn oracle_equivalence(solver: Solver, points: usize) -> Result<(bool, String)> {
    let tol = ToleranceSpec::default();
    let mut worst = 0.0f64;
    for &lambda in &LAMBDA_GRID {
        for &p_max in &P_MAX_GRID {
            let p = params_with(lambda, p_max);
            for z in log_grid(1e-4, 1e4, points) {
                let z = EffectiveChannel::new(z)?;
                let closed = solver(z, &p)?;
                let oracle = optim::oracle_schedule(z, &p, &tol)?;
                worst = worst.max((closed.cost - oracle.cost).abs() / oracle.cost);
            }
        }
    }
    Ok((
        worst <= 1e-6,
        format!("max relative cost error {worst:.3e} (limit 1e-6)"),
    ))
}

/// Residual of `W_0` on log-spaced samples plus the branch-point neighbourhood.
pub fn lambert_residuals(samples: usize) -> Result<(bool, String)> {
    let tol = ToleranceSpec::default();
    let bp = numerics::BRANCH_POINT;
    let mut xs: Vec<f64> = log_grid(1e-9, 1e6 - bp, samples - samples / 5)
        .into_iter()
        .map(|d| bp + d)
        .collect();
    xs.extend(log_grid(1e-15, 1e-5, samples / 5).into_iter().map(|d| bp + d));
    let mut worst = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut monotone = true;
    for x in sorted {
        let w = numerics::lambert_w0(x, &tol)?;
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
        if let Some((px, pw)) = prev {
            if x > px && w < pw {
                monotone = false;
            }
        }
        prev = Some((x, w));
    }
    Ok((
        worst <= 1e-9 && monotone,
        format!(
            "{} samples, max scaled residual {worst:.3e}, monotone {monotone}",
            xs.len()
        ),
    ))
}

/// Monotonicity of `T*`, `P*`, `v` and the round trip `z(v(z))`.
pub fn monotonicity(solver: Solver, points: usize) -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut worst_round_trip = 0.0f64;
    let mut worst_jump = 0.0f64;
    for &lambda in &LAMBDA_GRID {
        for &p_max in &P_MAX_GRID {
            let p = params_with(lambda, p_max);
            let zs = log_grid(1e-4, 1e4, points);
            let sols = zs
                .iter()
                .map(|&z| solver(EffectiveChannel::new(z)?, &p))
                .collect::<Result<Vec<_>>>()?;
            for k in 1..sols.len() {
                let (a, b) = (&sols[k - 1], &sols[k]);
                if !(b.duration_s > a.duration_s) {
                    failures.push(format!(
                        "T* not increasing at z={} (lambda={lambda}, P_max={p_max})",
                        zs[k]
                    ));
                }
                if b.total_power_w < a.total_power_w {
                    failures.push(format!("P* decreasing at z={} (lambda={lambda}, P_max={p_max})", zs[k]));
                }
                if !(b.cost > a.cost) {
                    failures.push(format!(
                        "v not increasing at z={} (lambda={lambda}, P_max={p_max})",
                        zs[k]
                    ));
                }
                if a.constraint_active != b.constraint_active {
                    let jump = activation_jump(solver, zs[k - 1], zs[k], &p)?;
                    worst_jump = worst_jump.max(jump);
                    if jump > 1e-6 {
                        failures.push(format!("P* jumps by {jump:.3e} at activation near z={}", zs[k]));
                    }
                }
            }
            for (z, s) in zs.iter().zip(&sols).step_by(7) {
                let back = optim::z_of_value(s.cost, &p)?.get();
                worst_round_trip = worst_round_trip.max((back - z).abs() / z);
            }
        }
    }
    if worst_round_trip > 1e-6 {
        failures.push(format!("z_of_value round trip error {worst_round_trip:.3e}"));
    }
    let passed = failures.is_empty();
    let detail = if passed {
        format!("round trip {worst_round_trip:.3e}, activation jump {worst_jump:.3e}")
    } else {
        failures.truncate(5);
        failures.join("; ")
    };
    Ok((passed, detail))
}

/// Locates the power-cap activation point between `lo` and `hi` and
/// returns the change in `P*` across it.
fn activation_jump(solver: Solver, mut lo: f64, mut hi: f64, p: &SystemParams) -> Result<f64> {
    let active_lo = solver(EffectiveChannel::new(lo)?, p)?.constraint_active;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if solver(EffectiveChannel::new(mid)?, p)?.constraint_active == active_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = solver(EffectiveChannel::new(lo)?, p)?.total_power_w;
    let b = solver(EffectiveChannel::new(hi)?, p)?.total_power_w;
    Ok((a - b).abs())
}

/// Random profile for the incentive fuzzers: an instance with 2..=5
/// candidates, a delay power and the deviating candidate.
fn fuzz_case<R: Rng>(rng: &mut R) -> Result<(crate::scenario::ScenarioInstance, SystemParams, usize)> {
    let n = rng.random_range(2..=5);
    let lambda = 10f64.powf(rng.random_range(-1.0..2.0));
    let p = SystemParams::default().with_delay_power(lambda);
    let inst = sample_instance(n, &GeometryConfig::default(), &ChannelConfig::default(), &p, rng)?;
    let i = rng.random_range(1..=n);
    Ok((inst, p, i))
}

/// Dominant strategy under the modified auction: against arbitrary
/// opponents, no own deviation beats the truthful bid.
pub fn mspoa_dominance(instances: usize, deviations: usize, seed: u64) -> Result<(bool, String)> {
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0usize;
    for k in 0..instances {
        let mut rng = montecarlo::trial_rng(seed, 0xD0, k);
        let (inst, p, i) = fuzz_case(&mut rng)?;
        let mut bids: Vec<Bid> = vec![truthful_bid(inst.channel(0)?, 0, &p)?];
        for j in 1..=inst.n() {
            if j == i {
                continue;
            }
            let pool = sample_deviations(inst.channel(j)?, j, &p, 3, &mut rng)?;
            bids.push(pool[rng.random_range(0..pool.len())]);
        }
        let zi = inst.channel(i)?;
        bids.push(truthful_bid(zi, i, &p)?);
        let base = StrategyProfile::new(bids, &p)?;
        let truthful = ex_post_utility(i, &run_mspoa(&base, &inst, &p)?, &inst, &p)?;
        for dev in sample_deviations(zi, i, &p, deviations, &mut rng)? {
            let u = ex_post_utility(i, &run_mspoa(&base.with_bid(dev), &inst, &p)?, &inst, &p)?;
            worst = worst.max(u - truthful);
            cases += 1;
            if u > truthful + UTILITY_SLACK_J {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{cases} deviations, {violations} violations, max gain {worst:.3e} J"),
    ))
}

/// Nash equilibrium of the second-preferred-offer auction: with everyone
/// else truthful, no unilateral deviation pays.
pub fn spoa_nash(instances: usize, deviations: usize, seed: u64) -> Result<(bool, String)> {
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0usize;
    for k in 0..instances {
        let mut rng = montecarlo::trial_rng(seed, 0x5E, k);
        let (inst, p, i) = fuzz_case(&mut rng)?;
        let base = StrategyProfile::truthful(&inst, &p)?;
        let truthful = ex_post_utility(i, &run_spoa(&base, &inst, &p)?, &inst, &p)?;
        for dev in sample_deviations(inst.channel(i)?, i, &p, deviations, &mut rng)? {
            let u = ex_post_utility(i, &run_spoa(&base.with_bid(dev), &inst, &p)?, &inst, &p)?;
            worst = worst.max(u - truthful);
            cases += 1;
            if u > truthful + UTILITY_SLACK_J {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{cases} deviations, {violations} violations, max gain {worst:.3e} J"),
    ))
}

/// The constructed witness profile: negative winner utility under SPOA,
/// non-negative under MSPOA.
pub fn spoa_non_ic() -> Result<(bool, String)> {
    let p = SystemParams {
        p_max_w: 10.0,
        ..SystemParams::default()
    };
    let (inst, profile) = spoa_loss_profile(EffectiveChannel::new(1.0)?, 0.5, &p)?;
    let spoa = run_spoa(&profile, &inst, &p)?;
    let mspoa = run_mspoa(&profile, &inst, &p)?;
    let u_spoa = ex_post_utility(spoa.winner, &spoa, &inst, &p)?;
    let u_mspoa = ex_post_utility(mspoa.winner, &mspoa, &inst, &p)?;
    let passed = spoa.winner == 1 && mspoa.winner == 1 && u_spoa < 0.0 && u_mspoa >= 0.0;
    Ok((
        passed,
        format!(
            "winner {}, SPOA utility {u_spoa:.4e} J, MSPOA utility {u_mspoa:.4e} J",
            spoa.winner
        ),
    ))
}

/// Relative reduction `1 - b / a`.
fn reduction(a: f64, b: f64) -> f64 {
    1.0 - b / a
}

fn combined_se(xs: &[f64]) -> f64 {
    xs.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// Qualitative trends of a default sweep.
pub fn sweep_trends(cells: &[CellStats], cfg: &SweepConfig) -> Vec<(String, bool, String)> {
    let mut out = Vec::new();
    let ns = &cfg.n_values;
    let lambdas = &cfg.lambda_values_w;
    let cell = |n, l, m| find_cell(cells, n, l, m);
    let lam_max = lambdas.iter().copied().fold(f64::MIN, f64::max);
    let lam_min = lambdas.iter().copied().fold(f64::MAX, f64::min);

    // (a) time reduction n = 1 -> 3 at the largest lambda.
    match (
        cell(1, lam_max, Mechanism::Mspoa),
        cell(2, lam_max, Mechanism::Mspoa),
        cell(3, lam_max, Mechanism::Mspoa),
    ) {
        (Some(c1), Some(c2), Some(c3)) => {
            let r = reduction(c1.mean_t_s, c3.mean_t_s);
            let ok = c2.mean_t_s < c1.mean_t_s && c3.mean_t_s < c2.mean_t_s && r >= 0.30;
            out.push((
                "time reduction n=1->3".to_string(),
                ok,
                format!("lambda={lam_max}: {:.1}% (need >= 30%)", 100.0 * r),
            ));
        }
        _ => out.push(("time reduction n=1->3".to_string(), false, "cells missing".to_string())),
    }
    // (b) energy reduction n = 1 -> 2 at the smallest lambda.
    match (cell(1, lam_min, Mechanism::Mspoa), cell(2, lam_min, Mechanism::Mspoa)) {
        (Some(c1), Some(c2)) => {
            let r = reduction(c1.mean_energy_mj, c2.mean_energy_mj);
            out.push((
                "energy reduction n=1->2".to_string(),
                r >= 0.40,
                format!("lambda={lam_min}: {:.1}% (need >= 40%)", 100.0 * r),
            ));
        }
        _ => out.push((
            "energy reduction n=1->2".to_string(),
            false,
            "cells missing".to_string(),
        )),
    }
    // (c) MSPOA-cooperative gaps shrink with n.
    let mut gap_fail = Vec::new();
    // (d) harvest non-increasing in n, increasing in lambda.
    let mut harvest_fail = Vec::new();
    for &l in lambdas {
        for w in ns.windows(2) {
            let (n0, n1) = (w[0], w[1]);
            let (Some(m0), Some(c0), Some(m1), Some(c1)) = (
                cell(n0, l, Mechanism::Mspoa),
                cell(n0, l, Mechanism::Cooperative),
                cell(n1, l, Mechanism::Mspoa),
                cell(n1, l, Mechanism::Cooperative),
            ) else {
                gap_fail.push(format!("cells missing at lambda={l}"));
                continue;
            };
            let gap_t = |m: &CellStats, c: &CellStats| (m.mean_t_s - c.mean_t_s).abs();
            let gap_e = |m: &CellStats, c: &CellStats| (m.mean_energy_mj - c.mean_energy_mj).abs();
            let se_t = combined_se(&[m0.std_err_t_s, c0.std_err_t_s, m1.std_err_t_s, c1.std_err_t_s]);
            let se_e = combined_se(&[
                m0.std_err_energy_mj,
                c0.std_err_energy_mj,
                m1.std_err_energy_mj,
                c1.std_err_energy_mj,
            ]);
            if gap_t(m1, c1) > gap_t(m0, c0) + 2.0 * se_t {
                gap_fail.push(format!("T gap grows n={n0}->{n1} at lambda={l}"));
            }
            if gap_e(m1, c1) > gap_e(m0, c0) + 2.0 * se_e {
                gap_fail.push(format!("energy gap grows n={n0}->{n1} at lambda={l}"));
            }
            let se_h = combined_se(&[m0.std_err_net_harvest_j, m1.std_err_net_harvest_j]);
            if m1.mean_net_harvest_j > m0.mean_net_harvest_j + 2.0 * se_h {
                harvest_fail.push(format!("harvest grows n={n0}->{n1} at lambda={l}"));
            }
        }
    }
    for &n in ns {
        for w in lambdas.windows(2) {
            if let (Some(a), Some(b)) = (cell(n, w[0], Mechanism::Mspoa), cell(n, w[1], Mechanism::Mspoa)) {
                if !(b.mean_net_harvest_j > a.mean_net_harvest_j) {
                    harvest_fail.push(format!("harvest not increasing lambda={}->{} at n={n}", w[0], w[1]));
                }
            }
        }
    }
    out.push((
        "gap to cooperative shrinks".to_string(),
        gap_fail.is_empty(),
        if gap_fail.is_empty() {
            "ok".to_string()
        } else {
            gap_fail.join("; ")
        },
    ));
    out.push((
        "net harvest trends".to_string(),
        harvest_fail.is_empty(),
        if harvest_fail.is_empty() {
            "ok".to_string()
        } else {
            harvest_fail.join("; ")
        },
    ));
    out
}

/// Reruns `cfg` on single- and three-thread pools and compares CSV bytes
/// against `reference`.
pub fn sweep_reproducible(cfg: &SweepConfig, reference: &[CellStats]) -> Result<(bool, String)> {
    let csv = |cells: &[CellStats]| -> Result<Vec<u8>> {
        let mut out = Vec::new();
        montecarlo::write_csv(cells, &mut out)?;
        Ok(out)
    };
    let expected = csv(reference)?;
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::Error::Config(vec![e.to_string()]))?;
        let cells = pool.install(|| {
            montecarlo::run_sweep(
                cfg,
                &GeometryConfig::default(),
                &ChannelConfig::default(),
                &SystemParams::default(),
            )
        })?;
        if csv(&cells)? != expected {
            return Ok((false, format!("CSV differs with {threads} threads")));
        }
    }
    Ok((
        true,
        format!("{} CSV bytes identical with 1, 3 and default threads", expected.len()),
    ))
}

/// Runs the suite. `fast` covers 50 oracle points and 100 fuzz instances;
/// `full` runs the complete acceptance scale including the default sweep.
pub fn run(level: Level, solver: Solver) -> Report {
    let (oracle_pts, fuzz_n) = match level {
        Level::Fast => (50, 100),
        Level::Full => (200, 1000),
    };
    let mut checks = vec![
        timed("oracle equivalence", || oracle_equivalence(solver, oracle_pts)),
        timed("lambert residuals", || lambert_residuals(1000)),
        timed("monotonicity", || monotonicity(solver, oracle_pts * 5)),
        timed("mspoa dominant strategy", || mspoa_dominance(fuzz_n, 200, 11)),
        timed("spoa nash equilibrium", || spoa_nash(fuzz_n, 200, 12)),
        timed("spoa non-ic witness", spoa_non_ic),
    ];
    if level == Level::Full {
        let cfg = SweepConfig::default();
        let start = Instant::now();
        match montecarlo::run_sweep(
            &cfg,
            &GeometryConfig::default(),
            &ChannelConfig::default(),
            &SystemParams::default(),
        ) {
            Ok(cells) => {
                let secs = start.elapsed().as_secs_f64();
                for (name, passed, detail) in sweep_trends(&cells, &cfg) {
                    checks.push(CheckResult {
                        name,
                        passed,
                        detail,
                        seconds: secs,
                    });
                }
                checks.push(timed("sweep reproducibility", || sweep_reproducible(&cfg, &cells)));
            }
            Err(e) => checks.push(CheckResult {
                name: "sweep trends".to_string(),
                passed: false,
                detail: e.to_string(),
                seconds: start.elapsed().as_secs_f64(),
            }),
        }
    }
    Report { level, checks }
}
