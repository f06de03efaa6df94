//! Optimal transmit schedule for a single effective channel.
//!
//! For an effective channel `z` the source minimizes
//! `g(T) = T (lambda + (2^{D/T} - 1) z)` subject to the power cap
//! `T >= D / log2(1 + P_max / z)`. The objective is convex in `T`, so the
//! minimizer is either the stationary point (expressed with `W_0`) or the
//! constraint boundary, whichever is larger.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, ToleranceSpec};

/// Relative gap below which the two branches of `T*` count as tied.
const KINK_REL_TOL: f64 = 1e-12;

/// Global constants shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Bandwidth-normalized data volume `D`, bits/Hz.
    #[serde(rename = "d_bits_per_hz")]
    pub data_bits_per_hz: f64,
    /// Delay power `lambda`, W.
    #[serde(rename = "lambda_w")]
    pub delay_power_w: f64,
    /// Maximum transmit power, W.
    pub p_max_w: f64,
    /// Receiver noise power `sigma^2`, W.
    #[serde(rename = "sigma2_w")]
    pub noise_power_w: f64,
    /// Effective receive aperture `A_r`, m^2.
    pub aperture_m2: f64,
    /// Energy-harvesting circuit efficiency `alpha`.
    #[serde(rename = "alpha")]
    pub harvest_efficiency: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            data_bits_per_hz: 8.0,
            delay_power_w: 1.0,
            p_max_w: 1.0,
            noise_power_w: 1e-10,
            aperture_m2: 1e-4,
            harvest_efficiency: 0.2,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(violations.join("; ")))
        }
    }

    /// Every violated invariant, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be finite and > 0 (got {v})"));
            }
        };
        positive("d_bits_per_hz", self.data_bits_per_hz);
        positive("lambda_w", self.delay_power_w);
        positive("p_max_w", self.p_max_w);
        positive("sigma2_w", self.noise_power_w);
        positive("aperture_m2", self.aperture_m2);
        positive("alpha", self.harvest_efficiency);
        if self.harvest_efficiency > 1.0 {
            out.push(format!("alpha must be <= 1 (got {})", self.harvest_efficiency));
        }
        out
    }

    pub fn with_delay_power(mut self, lambda_w: f64) -> Self {
        self.delay_power_w = lambda_w;
        self
    }

    /// `D ln 2`, the recurring constant of the rate/power relation.
    #[inline]
    pub fn d_ln2(&self) -> f64 {
        self.data_bits_per_hz * LN_2
    }
}

/// Effective inverse channel quality `z`, W. Lower is better.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EffectiveChannel(f64);

impl EffectiveChannel {
    pub fn new(z: f64) -> Result<Self> {
        if z.is_finite() && z > 0.0 {
            Ok(Self(z))
        } else {
            Err(Error::InvalidChannel(z))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for EffectiveChannel {
    type Error = Error;
    fn try_from(z: f64) -> Result<Self> {
        Self::new(z)
    }
}

impl From<EffectiveChannel> for f64 {
    fn from(z: EffectiveChannel) -> f64 {
        z.0
    }
}

/// Optimal schedule for one effective channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSolution {
    #[serde(rename = "t_star_s")]
    pub duration_s: f64,
    #[serde(rename = "p_star_w")]
    pub total_power_w: f64,
    pub cost: f64,
    /// `true` when `T*` sits on the power-cap boundary.
    pub constraint_active: bool,
}

impl ScheduleSolution {
    pub fn energy_j(&self) -> f64 {
        self.duration_s * self.total_power_w
    }
}

fn check_duration(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveDuration(t))
    }
}

/// `2^{D/T} - 1` without cancellation for long durations.
#[inline]
fn rate_factor(t: f64, params: &SystemParams) -> f64 {
    (params.d_ln2() / t).exp_m1()
}

/// Source cost `g(T) = T (lambda + (2^{D/T} - 1) z)` for duration `T`.
pub fn cost_function(t: f64, z: EffectiveChannel, params: &SystemParams) -> Result<f64> {
    check_duration(t)?;
    Ok(t * (params.delay_power_w + rate_factor(t, params) * z.get()))
}

/// `dg/dT = z 2^{D/T} (1 - D ln2 / T) + lambda - z`.
pub fn cost_derivative(t: f64, z: EffectiveChannel, params: &SystemParams) -> Result<f64> {
    check_duration(t)?;
    let omega = params.d_ln2() / t;
    // z (e^w (1 - w) - 1) rewritten as z (expm1(w) (1 - w) - w).
    Ok(z.get() * (omega.exp_m1() * (1.0 - omega) - omega) + params.delay_power_w)
}

/// Break-even source power `(2^{D/T} - 1) z` for duration `T`.
pub fn min_total_power(t: f64, z: EffectiveChannel, params: &SystemParams) -> Result<f64> {
    check_duration(t)?;
    Ok(rate_factor(t, params) * z.get())
}

/// Shortest duration compatible with the power cap: `D / log2(1 + P_max / z)`.
pub fn min_feasible_duration(z: EffectiveChannel, params: &SystemParams) -> f64 {
    params.d_ln2() / (params.p_max_w / z.get()).ln_1p()
}

/// Stationary point of `g`, `D ln2 / (W_0((lambda/z - 1)/e) + 1)`.
pub fn stationary_duration(z: EffectiveChannel, params: &SystemParams) -> Result<f64> {
    let ratio = params.delay_power_w / z.get();
    if !ratio.is_finite() {
        return Err(Error::InvalidChannel(z.get()));
    }
    let w = numerics::lambert_w0((ratio - 1.0) / E, &ToleranceSpec::default())?;
    Ok(params.d_ln2() / (w + 1.0))
}

/// Closed-form minimizer of the relay cost problem.
pub fn optimal_schedule(z: EffectiveChannel, params: &SystemParams) -> Result<ScheduleSolution> {
    let stationary = stationary_duration(z, params)?;
    let boundary = min_feasible_duration(z, params);
    let tie = (stationary - boundary).abs() <= KINK_REL_TOL * stationary.max(boundary);
    let constraint_active = tie || boundary > stationary;

    let (duration_s, total_power_w) = if constraint_active {
        (boundary, params.p_max_w)
    } else {
        (stationary, rate_factor(stationary, params) * z.get())
    };
    Ok(ScheduleSolution {
        duration_s,
        total_power_w,
        cost: duration_s * (params.delay_power_w + total_power_w),
        constraint_active,
    })
}

/// `v(z)`: the source's optimal cost through an effective channel `z`.
pub fn value_of_z(z: EffectiveChannel, params: &SystemParams) -> Result<f64> {
    Ok(optimal_schedule(z, params)?.cost)
}

/// Inverse of [`value_of_z`]: the channel whose optimal cost equals `u`.
pub fn z_of_value(u: f64, params: &SystemParams) -> Result<EffectiveChannel> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::InvalidParams(format!(
            "value to invert must be finite and > 0 (got {u})"
        )));
    }
    let tol = ToleranceSpec::default();
    // Work in log z so the bracket expansion never leaves z > 0.
    let hint = (u / (params.d_ln2() * E * 2.0)).ln();
    let v_of_log = |s: f64| match EffectiveChannel::new(s.exp()) {
        Ok(z) => match value_of_z(z, params) {
            Ok(v) => v,
            Err(_) if s < 0.0 => 0.0,
            Err(_) => f64::INFINITY,
        },
        // v(0+) = 0 and v grows without bound.
        Err(_) if s < 0.0 => 0.0,
        Err(_) => f64::INFINITY,
    };
    let s = numerics::solve_increasing(v_of_log, u, hint, &tol)?;
    EffectiveChannel::new(s.exp())
}

/// Brute-force reference: golden-section search of [`cost_function`] over
/// the feasible interval, without using the closed form.
pub fn oracle_schedule(z: EffectiveChannel, params: &SystemParams, tol: &ToleranceSpec) -> Result<ScheduleSolution> {
    let lo = min_feasible_duration(z, params);
    let lambda = params.delay_power_w;
    let mut hi = (10.0 * params.data_bits_per_hz / lambda * (lambda + z.get()))
        .max(100.0 * params.d_ln2())
        .max(2.0 * lo);
    let g = |t: f64| cost_function(t, z, params).unwrap_or(f64::INFINITY);
    // Grow until g is no longer decreasing at the upper end.
    for _ in 0..tol.max_iter {
        if g(hi * (1.0 + 1e-6)) >= g(hi) {
            break;
        }
        hi *= 2.0;
    }
    let (t, cost) = numerics::minimize_unimodal(g, lo, hi, tol)?;
    let power = rate_factor(t, params) * z.get();
    Ok(ScheduleSolution {
        duration_s: t,
        total_power_w: power,
        cost,
        constraint_active: (t - lo).abs() <= 1e-9 * lo,
    })
}
