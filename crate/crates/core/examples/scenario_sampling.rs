//! Draws a random instance with the default geometry and channel model and
//! prints it as a versioned record.
//!
//! `cargo run --example scenario_sampling -- [n] [seed]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpt_relay::records;
use wpt_relay::scenario::has_los;
use wpt_relay::{sample_instance, ChannelConfig, GeometryConfig, Point, SystemParams};

fn main() -> wpt_relay::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4, |a| a.parse().expect("n must be an integer"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed must be an integer"));
    let geom = GeometryConfig::default();
    let p = SystemParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = sample_instance(n, &geom, &ChannelConfig::default(), &p, &mut rng)?;

    eprintln!("direct link: z0 = {:.4e} W", inst.z0);
    for (i, q) in inst.candidate_positions.iter().enumerate() {
        eprintln!(
            "candidate {}: ({:6.2}, {:6.2})  z = {:.4e} W  LOS to AP {}  LOS to source {}",
            i + 1,
            q.x,
            q.y,
            inst.z[i],
            has_los(*q, Point::ORIGIN, &geom),
            has_los(*q, geom.source, &geom),
        );
    }
    println!("{}", records::to_json(&inst)?);
    Ok(())
}
