//! Optimal transmit schedule for a sweep of effective channels, next to
//! the brute-force oracle and the inverse map back from the cost.
//!
//! `cargo run --example solve_channel -- [lambda_w] [p_max_w]`

use wpt_relay::numerics::ToleranceSpec;
use wpt_relay::optim::{optimal_schedule, oracle_schedule, z_of_value};
use wpt_relay::{EffectiveChannel, SystemParams};

fn main() -> wpt_relay::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<f64>().expect("numeric argument"));
    let p = SystemParams {
        delay_power_w: args.next().unwrap_or(1.0),
        p_max_w: args.next().unwrap_or(10.0),
        ..SystemParams::default()
    };
    p.validate()?;
    let tol = ToleranceSpec::default();
    println!(
        "lambda = {} W, P_max = {} W, D = {} bits/Hz",
        p.delay_power_w, p.p_max_w, p.data_bits_per_hz
    );
    println!(
        "{:>10} {:>12} {:>12} {:>14} {:>7} {:>10} {:>10}",
        "z", "T*", "P*", "v(z)", "capped", "oracle", "z(v(z))"
    );
    for k in -6..=8 {
        let z = EffectiveChannel::new(10f64.powf(k as f64 / 2.0))?;
        let s = optimal_schedule(z, &p)?;
        let o = oracle_schedule(z, &p, &tol)?;
        let back = z_of_value(s.cost, &p)?;
        println!(
            "{:>10.3e} {:>12.6} {:>12.6} {:>14.6} {:>7} {:>10.1e} {:>10.1e}",
            z.get(),
            s.duration_s,
            s.total_power_w,
            s.cost,
            s.constraint_active,
            (s.cost - o.cost).abs() / o.cost,
            (back.get() - z.get()).abs() / z.get(),
        );
    }
    Ok(())
}
