use approx::assert_relative_eq;
use proptest::prelude::*;
use wpt_relay::numerics::ToleranceSpec;
use wpt_relay::optim::{
    cost_derivative, cost_function, min_feasible_duration, optimal_schedule, oracle_schedule, value_of_z, z_of_value,
};
use wpt_relay::verify::log_grid;
use wpt_relay::{EffectiveChannel, SystemParams};

fn params(lambda: f64, p_max: f64) -> SystemParams {
    SystemParams {
        delay_power_w: lambda,
        p_max_w: p_max,
        ..SystemParams::default()
    }
}

fn z(v: f64) -> EffectiveChannel {
    EffectiveChannel::new(v).unwrap()
}

#[test]
fn closed_form_matches_oracle_on_grid() {
    let tol = ToleranceSpec::default();
    for lambda in [0.1, 1.0, 10.0, 100.0] {
        for p_max in [1.0, 10.0] {
            let p = params(lambda, p_max);
            for zv in log_grid(1e-4, 1e4, 200) {
                let s = optimal_schedule(z(zv), &p).unwrap();
                let o = oracle_schedule(z(zv), &p, &tol).unwrap();
                assert!(
                    (s.cost - o.cost).abs() <= 1e-6 * o.cost,
                    "z={zv} lambda={lambda} p_max={p_max}: {} vs {}",
                    s.cost,
                    o.cost
                );
            }
        }
    }
}

#[test]
fn trivial_and_derived_examples() {
    let p = params(1.0, 10.0);
    let s = optimal_schedule(z(1.0), &p).unwrap();
    assert_relative_eq!(s.duration_s, 8.0 * std::f64::consts::LN_2, max_relative = 1e-12);
    assert_relative_eq!(s.total_power_w, std::f64::consts::E - 1.0, max_relative = 1e-12);
    assert!(!s.constraint_active);

    let s = optimal_schedule(z(1e4), &p).unwrap();
    assert!(s.constraint_active);
    assert_eq!(s.total_power_w, 10.0);
    assert_relative_eq!(s.duration_s, 8.0 / (1.001f64).log2(), max_relative = 1e-12);

    // Golden-section reference, rel tol 1e-9.
    let s = optimal_schedule(z(2.0), &p).unwrap();
    let o = oracle_schedule(z(2.0), &p, &ToleranceSpec::new(1e-14, 1e-12, 500).unwrap()).unwrap();
    assert_relative_eq!(s.duration_s, o.duration_s, max_relative = 1e-6);
    assert!((s.duration_s - 7.220).abs() < 1e-3);
}

#[test]
fn first_order_conditions() {
    for lambda in [0.1, 1.0, 10.0, 100.0] {
        let p = params(lambda, 10.0);
        for zv in log_grid(1e-3, 1e3, 60) {
            let s = optimal_schedule(z(zv), &p).unwrap();
            let d = cost_derivative(s.duration_s, z(zv), &p).unwrap();
            if s.constraint_active {
                assert!(
                    d >= -1e-9 * (lambda + p.p_max_w),
                    "active branch must sit right of the stationary point"
                );
                assert_relative_eq!(s.duration_s, min_feasible_duration(z(zv), &p), max_relative = 1e-12);
            } else {
                assert!(d.abs() <= 1e-8 * (lambda + s.total_power_w), "g'(T*) = {d} at z={zv}");
            }
        }
    }
}

#[test]
fn power_continuous_across_activation() {
    for lambda in [0.1, 1.0, 10.0, 100.0] {
        for p_max in [1.0, 10.0] {
            let p = params(lambda, p_max);
            let zs = log_grid(1e-4, 1e4, 400);
            for w in zs.windows(2) {
                let (a, b) = (
                    optimal_schedule(z(w[0]), &p).unwrap(),
                    optimal_schedule(z(w[1]), &p).unwrap(),
                );
                if a.constraint_active == b.constraint_active {
                    continue;
                }
                let (mut lo, mut hi) = (w[0], w[1]);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if optimal_schedule(z(mid), &p).unwrap().constraint_active {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let jump = optimal_schedule(z(hi), &p).unwrap().total_power_w
                    - optimal_schedule(z(lo), &p).unwrap().total_power_w;
                assert!(jump.abs() <= 1e-6, "jump {jump} at z~{lo}");
            }
        }
    }
}

#[test]
fn inverse_round_trip_on_log_uniform_samples() {
    let p = params(1.0, 10.0);
    for zv in log_grid(1e-4, 1e4, 100) {
        let back = z_of_value(value_of_z(z(zv), &p).unwrap(), &p).unwrap();
        assert_relative_eq!(back.get(), zv, max_relative = 1e-6);
    }
}

proptest! {
    #[test]
    fn schedule_invariants(zv in 1e-4f64..1e4, lambda in 0.01f64..1e3, p_max in 0.1f64..100.0) {
        let p = params(lambda, p_max);
        let s = optimal_schedule(z(zv), &p).unwrap();
        prop_assert!(s.duration_s > 0.0);
        prop_assert!(s.total_power_w > 0.0 && s.total_power_w <= p_max);
        prop_assert_eq!(s.cost, s.duration_s * (lambda + s.total_power_w));
        prop_assert!(s.duration_s >= min_feasible_duration(z(zv), &p) * (1.0 - 1e-12));
        prop_assert_eq!(s.constraint_active, (s.total_power_w - p_max).abs() <= 1e-9 * p_max);
        let g = cost_function(s.duration_s * 1.01, z(zv), &p).unwrap();
        prop_assert!(g >= s.cost * (1.0 - 1e-12));
    }

    #[test]
    fn monotone_in_z(z1 in 1e-4f64..1e4, r in 1.0001f64..10.0, lambda in 0.01f64..1e3, p_max in 0.1f64..100.0) {
        let p = params(lambda, p_max);
        let a = optimal_schedule(z(z1), &p).unwrap();
        let b = optimal_schedule(z(z1 * r), &p).unwrap();
        prop_assert!(b.duration_s > a.duration_s);
        prop_assert!(b.total_power_w >= a.total_power_w);
        prop_assert!(b.cost > a.cost);
    }

    #[test]
    fn value_round_trip(zv in 1e-4f64..1e4, lambda in 0.01f64..1e3) {
        let p = params(lambda, 10.0);
        let back = z_of_value(value_of_z(z(zv), &p).unwrap(), &p).unwrap();
        prop_assert!((back.get() - zv).abs() <= 1e-6 * zv);
    }
}
