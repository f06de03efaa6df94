//! Randomized checks of the equilibrium properties: truthful bidding is
//! dominant in the modified auction and a Nash equilibrium in SPOA.
//!
//! `cargo run --release --example incentive_fuzz -- [instances] [deviations]`

use wpt_relay::verify::{mspoa_dominance, spoa_nash};

fn main() -> wpt_relay::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let instances = args.next().unwrap_or(200);
    let deviations = args.next().unwrap_or(60);
    let (ok, detail) = mspoa_dominance(instances, deviations, 1)?;
    println!(
        "mspoa dominant strategy: {} ({detail})",
        if ok { "holds" } else { "VIOLATED" }
    );
    let (ok, detail) = spoa_nash(instances, deviations, 2)?;
    println!(
        "spoa nash equilibrium:   {} ({detail})",
        if ok { "holds" } else { "VIOLATED" }
    );
    Ok(())
}
