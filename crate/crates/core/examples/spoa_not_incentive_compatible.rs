//! A profile in which the second-preferred-offer auction makes its winner
//! lose energy while the modified auction pays it enough.
//!
//! Candidate 2 submits an off-manifold bid whose power lies below its own
//! break-even power. Candidate 1 wins on a truthful bid and is paid that
//! bid verbatim under SPOA.

use wpt_relay::mechanisms::{ex_post_utility, spoa_loss_profile};
use wpt_relay::optim::min_total_power;
use wpt_relay::{run_mspoa, run_spoa, score, EffectiveChannel, SystemParams};

fn main() -> wpt_relay::Result<()> {
    let p = SystemParams {
        p_max_w: 10.0,
        ..SystemParams::default()
    };
    let (inst, profile) = spoa_loss_profile(EffectiveChannel::new(1.0)?, 0.5, &p)?;
    for b in &profile.bids {
        println!(
            "bid {}: T = {:.6} s, P = {:.6} W, score {:.6}",
            b.bidder,
            b.duration_s,
            b.total_power_w,
            score(b, &p)
        );
    }
    for (name, o) in [
        ("spoa", run_spoa(&profile, &inst, &p)?),
        ("mspoa", run_mspoa(&profile, &inst, &p)?),
    ] {
        let floor = min_total_power(o.payment_duration_s, inst.channel(o.winner)?, &p)?;
        println!(
            "{name:<6} winner {} paid P = {:.6} W (break-even {:.6} W), utility {:+.6e} J",
            o.winner,
            o.payment_power_w,
            floor,
            ex_post_utility(o.winner, &o, &inst, &p)?
        );
    }
    Ok(())
}
