//! Random problem instances: AP at the origin, a source behind a circular
//! blockage, candidates sampled where both of their links are line-of-sight,
//! and path-loss channels with Rayleigh (unit-mean exponential) fading power.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{EffectiveChannel, SystemParams};

/// Rejection-sampling attempts allowed per candidate.
pub const REJECTION_BUDGET: usize = 10_000;

/// Relative tolerance used when re-deriving `z` values from channel powers.
const DERIVED_REL_TOL: f64 = 1e-12;

/// Candidates closer than this to the AP or the source are rejected so the
/// path-loss law stays finite.
const MIN_LINK_DISTANCE_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned rectangle candidates are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl SamplingBox {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(rename = "source_m")]
    pub source: Point,
    #[serde(rename = "blockage_center_m")]
    pub blockage_center: Point,
    pub blockage_radius_m: f64,
    #[serde(rename = "sampling_box_m")]
    pub sampling_box: SamplingBox,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            source: Point::new(7.0, 7.0),
            blockage_center: Point::new(3.5, 3.5),
            blockage_radius_m: 1.5,
            sampling_box: SamplingBox {
                x_min: -2.0,
                x_max: 12.0,
                y_min: -2.0,
                y_max: 12.0,
            },
        }
    }
}

impl GeometryConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.blockage_radius_m;
        let finite = [
            self.source.x,
            self.source.y,
            self.blockage_center.x,
            self.blockage_center.y,
            self.sampling_box.x_min,
            self.sampling_box.x_max,
            self.sampling_box.y_min,
            self.sampling_box.y_max,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            out.push("geometry coordinates must be finite".to_string());
        }
        if !(r.is_finite() && r > 0.0) {
            out.push(format!("blockage_radius_m must be > 0 (got {r})"));
        }
        if self.source.distance(self.blockage_center) <= r {
            out.push("source_m lies inside the blockage disc".to_string());
        }
        if Point::ORIGIN.distance(self.blockage_center) <= r {
            out.push("the AP (origin) lies inside the blockage disc".to_string());
        }
        let b = &self.sampling_box;
        if !(b.x_max > b.x_min && b.y_max > b.y_min) {
            out.push("sampling_box_m must have positive area".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(v.join("; ")))
        }
    }

    /// Whether `p` has line-of-sight to both the AP and the source.
    pub fn is_valid_candidate(&self, p: Point) -> bool {
        has_los(p, Point::ORIGIN, self) && has_los(p, self.source, self)
    }
}

/// Path-loss parameters; intercepts are dB at unit distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub k_nlos_db: f64,
    pub eta_nlos: f64,
    pub k_los_db: f64,
    pub eta_los: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            k_nlos_db: -25.0,
            eta_nlos: 5.76,
            k_los_db: 0.0,
            eta_los: 2.5,
        }
    }
}

impl ChannelConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.k_nlos_db.is_finite() && self.k_los_db.is_finite()) {
            out.push("path-loss intercepts must be finite".to_string());
        }
        if !(self.eta_los > 0.0) {
            out.push(format!("eta_los must be > 0 (got {})", self.eta_los));
        }
        if !(self.eta_nlos > self.eta_los) {
            out.push(format!(
                "eta_nlos ({}) must exceed eta_los ({})",
                self.eta_nlos, self.eta_los
            ));
        }
        out
    }

    /// Mean channel power `10^{K/10} d^{-eta}` for a NLOS link.
    pub fn nlos_gain(&self, d: f64) -> f64 {
        db_to_linear(self.k_nlos_db) * d.powf(-self.eta_nlos)
    }

    /// Mean channel power `10^{K/10} d^{-eta}` for a LOS link.
    pub fn los_gain(&self, d: f64) -> f64 {
        db_to_linear(self.k_los_db) * d.powf(-self.eta_los)
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Distance from `c` to the closed segment `[p, q]`.
pub fn point_segment_distance(c: Point, p: Point, q: Point) -> f64 {
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return c.distance(p);
    }
    let t = (((c.x - p.x) * dx + (c.y - p.y) * dy) / len2).clamp(0.0, 1.0);
    c.distance(Point::new(p.x + t * dx, p.y + t * dy))
}

/// `true` iff the segment `[p, q]` stays strictly outside the blockage disc.
pub fn has_los(p: Point, q: Point, geom: &GeometryConfig) -> bool {
    point_segment_distance(geom.blockage_center, p, q) > geom.blockage_radius_m
}

/// Draws `n` candidate positions uniformly from the doubly-LOS part of the
/// sampling box by rejection.
pub fn sample_candidates<R: Rng + ?Sized>(n: usize, geom: &GeometryConfig, rng: &mut R) -> Result<Vec<Point>> {
    geom.validate()?;
    let b = geom.sampling_box;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut accepted = None;
        for _ in 0..REJECTION_BUDGET {
            let p = Point::new(rng.random_range(b.x_min..b.x_max), rng.random_range(b.y_min..b.y_max));
            if geom.is_valid_candidate(p)
                && p.norm() > MIN_LINK_DISTANCE_M
                && p.distance(geom.source) > MIN_LINK_DISTANCE_M
            {
                accepted = Some(p);
                break;
            }
        }
        match accepted {
            Some(p) => out.push(p),
            None => {
                return Err(Error::Sampling(format!(
                    "no doubly-LOS position found for candidate {} after {REJECTION_BUDGET} \
                     attempts; the valid region of the sampling box is too small",
                    k + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Fading power of one candidate's two links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFading {
    /// Candidate to AP.
    pub to_ap: f64,
    /// Source to candidate.
    pub from_source: f64,
}

/// One experiment: geometry, channel powers and derived effective channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInstance {
    pub candidate_positions: Vec<Point>,
    /// Source to AP channel power.
    pub h_s: f64,
    /// Candidate to AP channel powers.
    pub h_i: Vec<f64>,
    /// Source to candidate channel powers.
    pub h_si: Vec<f64>,
    /// End-to-end WPT efficiency per candidate, `H_si A_r alpha`.
    pub alpha_tilde: Vec<f64>,
    /// Source effective channel `sigma^2 / H_s`.
    pub z0: f64,
    /// Candidate effective channels `sigma^2 (1/H_si + 1/(alpha_tilde H_i))`.
    pub z: Vec<f64>,
}

impl ScenarioInstance {
    /// Builds an instance from channel powers, deriving `alpha_tilde` and `z`.
    pub fn from_channels(
        candidate_positions: Vec<Point>,
        h_s: f64,
        h_i: Vec<f64>,
        h_si: Vec<f64>,
        params: &SystemParams,
    ) -> Result<Self> {
        let n = candidate_positions.len();
        if h_i.len() != n || h_si.len() != n {
            return Err(Error::InvalidInstance(format!(
                "expected {n} channel powers per link type, got {} and {}",
                h_i.len(),
                h_si.len()
            )));
        }
        let sigma2 = params.noise_power_w;
        let alpha_tilde: Vec<f64> = h_si
            .iter()
            .map(|h| h * params.aperture_m2 * params.harvest_efficiency)
            .collect();
        let z = h_si
            .iter()
            .zip(&h_i)
            .zip(&alpha_tilde)
            .map(|((hsi, hi), at)| sigma2 * (1.0 / hsi + 1.0 / (at * hi)))
            .collect();
        let inst = Self {
            candidate_positions,
            h_s,
            h_i,
            h_si,
            alpha_tilde,
            z0: sigma2 / h_s,
            z,
        };
        inst.validate(params)?;
        Ok(inst)
    }

    /// Builds an instance from positions and explicit fading draws.
    pub fn from_fading(
        candidate_positions: Vec<Point>,
        source_fading: f64,
        fading: &[CandidateFading],
        geom: &GeometryConfig,
        chan: &ChannelConfig,
        params: &SystemParams,
    ) -> Result<Self> {
        if fading.len() != candidate_positions.len() {
            return Err(Error::InvalidInstance(format!(
                "{} fading pairs for {} candidates",
                fading.len(),
                candidate_positions.len()
            )));
        }
        let h_s = chan.nlos_gain(geom.source.norm()) * source_fading;
        let h_i = candidate_positions
            .iter()
            .zip(fading)
            .map(|(p, f)| chan.los_gain(p.norm()) * f.to_ap)
            .collect();
        let h_si = candidate_positions
            .iter()
            .zip(fading)
            .map(|(p, f)| chan.los_gain(p.distance(geom.source)) * f.from_source)
            .collect();
        Self::from_channels(candidate_positions, h_s, h_i, h_si, params)
    }

    /// Synthetic instance with prescribed effective channels, for golden
    /// tests and hand-written instance files. Source-candidate gains are
    /// fixed at 1 and the candidate-AP gains solved for; positions are
    /// placeholders at the origin.
    pub fn from_effective_channels(z0: f64, z: &[f64], params: &SystemParams) -> Result<Self> {
        let sigma2 = params.noise_power_w;
        let h_si = vec![1.0; z.len()];
        let at = params.aperture_m2 * params.harvest_efficiency;
        let h_i = z
            .iter()
            .enumerate()
            .map(|(k, &zi)| {
                let rest = zi / sigma2 - 1.0;
                if rest > 0.0 && rest.is_finite() {
                    Ok(1.0 / (at * rest))
                } else {
                    Err(Error::InvalidInstance(format!(
                        "z[{}] = {zi} must exceed sigma2 = {sigma2}",
                        k + 1
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_channels(vec![Point::ORIGIN; z.len()], sigma2 / z0, h_i, h_si, params)
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Effective channel of bidder `i` (0 = source).
    pub fn channel(&self, i: usize) -> Result<EffectiveChannel> {
        let z = if i == 0 {
            self.z0
        } else {
            *self
                .z
                .get(i - 1)
                .ok_or_else(|| Error::InvalidInstance(format!("bidder {i} out of range 0..={}", self.n())))?
        };
        EffectiveChannel::new(z)
    }

    /// `alpha_tilde` of candidate `i >= 1`.
    pub fn wpt_efficiency(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Err(Error::InvalidInstance("the source has no WPT efficiency".to_string()));
        }
        self.alpha_tilde
            .get(i - 1)
            .copied()
            .ok_or_else(|| Error::InvalidInstance(format!("candidate {i} out of range 1..={}", self.n())))
    }

    /// Relay power `(2^{D/T} - 1) sigma^2 / H_i` candidate `i` needs for duration `t`.
    pub fn relay_power(&self, i: usize, t: f64, params: &SystemParams) -> Result<f64> {
        let h = self
            .h_i
            .get(i.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidInstance(format!("candidate {i} out of range 1..={}", self.n())))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveDuration(t));
        }
        Ok((params.d_ln2() / t).exp_m1() * params.noise_power_w / h)
    }

    /// Checks positivity and that derived fields match the channel powers.
    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let n = self.candidate_positions.len();
        let lens = [self.h_i.len(), self.h_si.len(), self.alpha_tilde.len(), self.z.len()];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::InvalidInstance(format!(
                "field lengths {lens:?} disagree with {n} candidates"
            )));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.h_s) || !positive(self.z0) {
            return Err(Error::InvalidInstance(
                "source channel must be finite and > 0".to_string(),
            ));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= DERIVED_REL_TOL * a.abs().max(b.abs());
        let sigma2 = params.noise_power_w;
        if !close(self.z0, sigma2 / self.h_s) {
            return Err(Error::InvalidInstance(format!(
                "z0 = {} does not match sigma2 / H_s = {}",
                self.z0,
                sigma2 / self.h_s
            )));
        }
        for k in 0..n {
            let (hi, hsi, at, z) = (self.h_i[k], self.h_si[k], self.alpha_tilde[k], self.z[k]);
            if ![hi, hsi, at, z].into_iter().all(positive) {
                return Err(Error::InvalidInstance(format!(
                    "candidate {} has a non-positive channel value",
                    k + 1
                )));
            }
            let at_expected = hsi * params.aperture_m2 * params.harvest_efficiency;
            let z_expected = sigma2 * (1.0 / hsi + 1.0 / (at_expected * hi));
            if !close(at, at_expected) || !close(z, z_expected) {
                return Err(Error::InvalidInstance(format!(
                    "candidate {}: derived alpha_tilde/z inconsistent with channel powers",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// Samples a full instance: positions first, then the source fading draw,
/// then `(to_ap, from_source)` fading per candidate, all from `rng`.
pub fn sample_instance<R: Rng + ?Sized>(
    n: usize,
    geom: &GeometryConfig,
    chan: &ChannelConfig,
    params: &SystemParams,
    rng: &mut R,
) -> Result<ScenarioInstance> {
    let positions = sample_candidates(n, geom, rng)?;
    let source_fading: f64 = rng.sample(Exp1);
    let fading: Vec<CandidateFading> = (0..n)
        .map(|_| CandidateFading {
            to_ap: rng.sample(Exp1),
            from_source: rng.sample(Exp1),
        })
        .collect();
    ScenarioInstance::from_fading(positions, source_fading, &fading, geom, chan, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom() -> GeometryConfig {
        GeometryConfig::default()
    }

    #[test]
    fn los_clear_segment() {
        let g = geom();
        assert!(has_los(Point::new(-1.0, 10.0), Point::new(-1.5, 0.0), &g));
    }

    #[test]
    fn los_blocked_through_center() {
        let g = geom();
        assert!(!has_los(Point::new(2.0, 5.0), Point::new(5.0, 2.0), &g));
    }

    #[test]
    fn los_source_to_ap_is_blocked() {
        let g = GeometryConfig {
            blockage_radius_m: 1.0,
            ..geom()
        };
        assert_eq!(point_segment_distance(g.blockage_center, Point::ORIGIN, g.source), 0.0);
        assert!(!has_los(Point::ORIGIN, g.source, &g));
    }

    #[test]
    fn segment_distance_clamps_to_endpoints() {
        let d = point_segment_distance(Point::new(3.0, 4.0), Point::new(-1.0, 0.0), Point::ORIGIN);
        assert!((d - 5.0).abs() < 1e-15);
    }

    #[test]
    fn sample_zero_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_candidates(0, &geom(), &mut rng).unwrap().is_empty());
    }

    #[test]
    fn samples_have_double_los() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in sample_candidates(500, &g, &mut rng).unwrap() {
            assert!(has_los(p, Point::ORIGIN, &g));
            assert!(has_los(p, g.source, &g));
        }
    }

    #[test]
    fn rejection_budget_exhaustion() {
        // Box entirely inside the shadow behind the blockage.
        let g = GeometryConfig {
            blockage_radius_m: 3.0,
            sampling_box: SamplingBox {
                x_min: 3.4,
                x_max: 3.6,
                y_min: 3.4,
                y_max: 3.6,
            },
            source: Point::new(9.0, 9.0),
            ..geom()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(sample_candidates(1, &g, &mut rng), Err(Error::Sampling(_))));
    }

    #[test]
    fn unit_fading_source_channel() {
        let g = geom();
        let c = ChannelConfig::default();
        let p = SystemParams::default();
        let inst = ScenarioInstance::from_fading(
            vec![Point::new(0.0, 8.0)],
            1.0,
            &[CandidateFading {
                to_ap: 1.0,
                from_source: 1.0,
            }],
            &g,
            &c,
            &p,
        )
        .unwrap();
        let expected = 10f64.powf(-2.5) * 98f64.sqrt().powf(-5.76);
        assert!((inst.h_s - expected).abs() <= 1e-14 * expected);
        assert!((inst.h_i[0] - 8f64.powf(-2.5)).abs() < 1e-15);
        let d_si = 50f64.sqrt();
        assert!((inst.h_si[0] - d_si.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn closer_candidate_has_lower_z() {
        let g = geom();
        let c = ChannelConfig::default();
        let p = SystemParams::default();
        let unit = [CandidateFading {
            to_ap: 1.0,
            from_source: 1.0,
        }];
        let far = ScenarioInstance::from_fading(vec![Point::new(-1.5, 11.0)], 1.0, &unit, &g, &c, &p).unwrap();
        let near = ScenarioInstance::from_fading(vec![Point::new(0.5, 7.0)], 1.0, &unit, &g, &c, &p).unwrap();
        assert!(near.candidate_positions[0].norm() < far.candidate_positions[0].norm());
        assert!(near.candidate_positions[0].distance(g.source) < far.candidate_positions[0].distance(g.source));
        assert!(near.z[0] < far.z[0]);
    }

    #[test]
    fn exponential_fading_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).sum::<f64>() / n as f64;
        assert!((0.997..=1.003).contains(&mean), "{mean}");
    }

    #[test]
    fn same_seed_same_instance() {
        let (g, c, p) = (geom(), ChannelConfig::default(), SystemParams::default());
        let a = sample_instance(5, &g, &c, &p, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_instance(5, &g, &c, &p, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        a.validate(&p).unwrap();
    }

    #[test]
    fn inconsistent_instance_rejected() {
        let (g, c, p) = (geom(), ChannelConfig::default(), SystemParams::default());
        let mut inst = sample_instance(2, &g, &c, &p, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        inst.z[1] *= 1.01;
        assert!(inst.validate(&p).is_err());
    }

    #[test]
    fn geometry_violations() {
        let g = GeometryConfig {
            blockage_radius_m: 6.0,
            sampling_box: SamplingBox {
                x_min: 1.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            },
            ..geom()
        };
        assert_eq!(g.violations().len(), 3);
        let bad_chan = ChannelConfig {
            eta_nlos: 2.0,
            ..ChannelConfig::default()
        };
        assert_eq!(bad_chan.violations().len(), 1);
    }
}
