//! Runs the three mechanisms on a small hand-built instance under truthful
//! bidding, then on an instance record given on the command line.
//!
//! `cargo run --example run_auctions -- [instance.json]`

use wpt_relay::mechanisms::ex_post_utility;
use wpt_relay::{records, run_truthful, Mechanism, ScenarioInstance, SystemParams};

fn report(inst: &ScenarioInstance, p: &SystemParams) -> wpt_relay::Result<()> {
    println!("z0 = {}, z = {:?}", inst.z0, inst.z);
    for m in Mechanism::ALL {
        let o = run_truthful(m, inst, p)?;
        let u = ex_post_utility(o.winner, &o, inst, p)?;
        println!(
            "  {:<12} winner {}  pays (T = {:.4} s, P = {:.4} W)  source cost {:.4}  winner utility {:.4e} J",
            m.as_str(),
            o.winner,
            o.payment_duration_s,
            o.payment_power_w,
            o.source_cost,
            u
        );
    }
    Ok(())
}

fn main() -> wpt_relay::Result<()> {
    let p = SystemParams {
        p_max_w: 10.0,
        ..SystemParams::default()
    };
    let inst = match std::env::args().nth(1) {
        Some(path) => records::read_file(path.as_ref())?,
        None => ScenarioInstance::from_effective_channels(10.0, &[1.0, 2.0], &p)?,
    };
    report(&inst, &p)
}
