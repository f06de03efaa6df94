//! Strategic deviations used to probe the incentive properties of the
//! auctions: off-manifold witness bids and randomized deviation families.

use rand::Rng;

use super::{score, truthful_bid, Bid, StrategyProfile};
use crate::error::{Error, Result};
use crate::optim::{self, EffectiveChannel, SystemParams};
use crate::scenario::ScenarioInstance;

/// Multiplier applied to the lower bound on the duration offset `eps2`.
pub const EPS2_MARGIN: f64 = 1.01;

/// The off-manifold bid `(T* + eps2, (2^{D/T} - 1)(z - eps1))` with
/// `eps2 = 1.01 T* eps1 / ((z - eps1) + lambda)`.
///
/// Its power is below the break-even power of a bidder with channel `z` at
/// the same duration, so a winner with channel `z` paid this bid loses
/// energy.
pub fn witness_bid(z: EffectiveChannel, eps1: f64, bidder: usize, params: &SystemParams) -> Result<Bid> {
    let zv = z.get();
    if !(eps1 > 0.0 && eps1 < zv) {
        return Err(Error::WitnessOutOfRange { eps1, z: zv });
    }
    let t_star = optim::optimal_schedule(z, params)?.duration_s;
    let eps2 = EPS2_MARGIN * t_star * eps1 / ((zv - eps1) + params.delay_power_w);
    let t = t_star + eps2;
    let p = (params.d_ln2() / t).exp_m1() * (zv - eps1);
    Bid::new(t, p, bidder, params)
}

/// [`witness_bid`] restricted to the cases where it also scores strictly
/// better than the truthful bid for `z`.
///
/// That holds whenever `2^{D/T*(z)} - 1` is comfortably above 1; in the
/// low-power regime the duration offset overshoots and
/// [`Error::WitnessUnavailable`] is returned.
pub fn non_ic_witness(z: EffectiveChannel, eps1: f64, bidder: usize, params: &SystemParams) -> Result<Bid> {
    let bid = witness_bid(z, eps1, bidder, params)?;
    let value = optim::value_of_z(z, params)?;
    let s = score(&bid, params);
    if s < value {
        Ok(bid)
    } else {
        Err(Error::WitnessUnavailable { score: s, value })
    }
}

/// `k` deviations from the truthful bid for channel `z`, cycling through
/// three families:
///
/// * on-manifold bids `truthful_bid(z')` with `z' = z 10^U(-2, 2)`,
/// * multiplicative perturbations `(T e^d1, P e^d2)`, `d ~ U(-1, 1)`,
///   with power clipped to `P_max`,
/// * [`witness_bid`] with `eps1 = z U(0.05, 0.95)`.
pub fn sample_deviations<R: Rng + ?Sized>(
    z: EffectiveChannel,
    bidder: usize,
    params: &SystemParams,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Bid>> {
    let truthful = truthful_bid(z, bidder, params)?;
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let bid = match j % 3 {
            0 => {
                let zt = z.get() * 10f64.powf(rng.random_range(-2.0..2.0));
                truthful_bid(EffectiveChannel::new(zt)?, bidder, params)?
            }
            1 => {
                let t = truthful.duration_s * rng.random_range(-1.0f64..1.0).exp();
                let p = (truthful.total_power_w * rng.random_range(-1.0f64..1.0).exp()).min(params.p_max_w);
                Bid::new(t, p, bidder, params)?
            }
            _ => {
                let eps1 = z.get() * rng.random_range(0.05..0.95);
                witness_bid(z, eps1, bidder, params)?
            }
        };
        out.push(bid);
    }
    Ok(out)
}

/// A profile under which a truthful SPOA winner loses energy.
///
/// Candidate 2 (channel `z_c`) bids `witness_bid(z_c, eps1)`. Candidate 1
/// bids truthfully with a channel chosen so that its score beats the witness
/// while the witness power stays below its break-even power; the source's
/// channel is `10 z_c`.
pub fn spoa_loss_profile(
    z_c: EffectiveChannel,
    eps1: f64,
    params: &SystemParams,
) -> Result<(ScenarioInstance, StrategyProfile)> {
    let witness = witness_bid(z_c, eps1, 2, params)?;
    let u_witness = score(&witness, params);
    let u_floor = optim::value_of_z(EffectiveChannel::new(z_c.get() - eps1)?, params)?;
    // v(z_c - eps1) <= u_witness because the witness is a feasible schedule
    // for channel z_c - eps1; split the gap in value space.
    let z_w = optim::z_of_value(0.5 * (u_floor + u_witness), params)?;
    let inst = ScenarioInstance::from_effective_channels(10.0 * z_c.get(), &[z_w.get(), z_c.get()], params)?;
    let profile = StrategyProfile::truthful(&inst, params)?.with_bid(witness);
    Ok((inst, profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{ex_post_utility, run_mspoa, run_spoa};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn golden_params() -> SystemParams {
        SystemParams {
            data_bits_per_hz: 8.0,
            delay_power_w: 1.0,
            p_max_w: 10.0,
            ..SystemParams::default()
        }
    }

    fn z(v: f64) -> EffectiveChannel {
        EffectiveChannel::new(v).unwrap()
    }

    #[test]
    fn witness_golden_values() {
        let p = golden_params();
        let b = non_ic_witness(z(1.0), 0.5, 1, &p).unwrap();
        let t_star = 8.0 * std::f64::consts::LN_2;
        let eps2 = 1.01 * t_star * 0.5 / 1.5;
        assert!((t_star * 0.5 / 1.5 - 1.848).abs() < 1e-3);
        assert!((b.duration_s - (t_star + eps2)).abs() < 1e-12);
        assert!((b.duration_s - 7.412).abs() < 1e-3);
        let expected_p = (2f64.powf(8.0 / b.duration_s) - 1.0) * 0.5;
        assert!((b.total_power_w - expected_p).abs() < 1e-12);
        assert!(score(&b, &p) < 15.0735);
        let floor = optim::min_total_power(b.duration_s, z(1.0), &p).unwrap();
        assert!(b.total_power_w < floor);
    }

    #[test]
    fn witness_rejects_out_of_range_eps() {
        let p = golden_params();
        assert!(matches!(
            witness_bid(z(1.0), 0.0, 1, &p),
            Err(Error::WitnessOutOfRange { .. })
        ));
        assert!(witness_bid(z(1.0), 1.0, 1, &p).is_err());
    }

    #[test]
    fn witness_power_always_below_break_even() {
        let p = golden_params();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let zz = 10f64.powf(rng.random_range(-3.0..3.0));
            let eps1 = zz * rng.random_range(0.001..0.999);
            let b = witness_bid(z(zz), eps1, 1, &p).unwrap();
            let floor = optim::min_total_power(b.duration_s, z(zz), &p).unwrap();
            assert!(b.total_power_w < floor);
        }
    }

    #[test]
    fn witness_undercuts_truthful_when_available() {
        // Sufficient condition for the undercut: P*(z)/z > 1.01.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut checked = 0;
        while checked < 100 {
            let lambda = 10f64.powf(rng.random_range(-1.0..2.0));
            let p = SystemParams {
                delay_power_w: lambda,
                p_max_w: 10.0,
                ..golden_params()
            };
            let zz = 10f64.powf(rng.random_range(-3.0..3.0));
            let s = optim::optimal_schedule(z(zz), &p).unwrap();
            let eps1 = zz * rng.random_range(0.01..0.99);
            match non_ic_witness(z(zz), eps1, 1, &p) {
                Ok(b) => {
                    assert!(score(&b, &p) < s.cost);
                    checked += 1;
                }
                Err(Error::WitnessUnavailable { .. }) => {
                    assert!(s.total_power_w / zz <= 1.01, "z={zz} lambda={lambda}");
                }
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn deviations_are_valid_bids() {
        let p = golden_params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zz = z(0.7);
        let devs = sample_deviations(zz, 3, &p, 30, &mut rng).unwrap();
        assert_eq!(devs.len(), 30);
        for (j, b) in devs.iter().enumerate() {
            b.validate(&p).unwrap();
            assert_eq!(b.bidder, 3);
            if j % 3 == 0 {
                let zt = optim::z_of_value(score(b, &p), &p).unwrap();
                let v = optim::value_of_z(zt, &p).unwrap();
                assert!((v - score(b, &p)).abs() <= 1e-8 * v);
            }
            if j % 3 == 2 {
                let floor = optim::min_total_power(b.duration_s, zz, &p).unwrap();
                assert!(b.total_power_w < floor);
            }
        }
    }

    #[test]
    fn loss_profile_separates_spoa_and_mspoa() {
        let p = golden_params();
        let (inst, prof) = spoa_loss_profile(z(1.0), 0.5, &p).unwrap();
        let spoa = run_spoa(&prof, &inst, &p).unwrap();
        let mspoa = run_mspoa(&prof, &inst, &p).unwrap();
        assert_eq!(spoa.winner, 1);
        assert_eq!(spoa.runner_up, Some(2));
        assert_eq!(mspoa.winner, 1);
        assert!(ex_post_utility(1, &spoa, &inst, &p).unwrap() < 0.0);
        assert!(ex_post_utility(1, &mspoa, &inst, &p).unwrap() >= 0.0);
    }
}
