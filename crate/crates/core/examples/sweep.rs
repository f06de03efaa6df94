//! Default Monte Carlo sweep, printed as a table and checked for the
//! expected trends.
//!
//! `cargo run --release --example sweep -- [config.toml]`

use wpt_relay::montecarlo::run_sweep;
use wpt_relay::verify::sweep_trends;
use wpt_relay::ExperimentConfig;

fn main() -> wpt_relay::Result<()> {
    let exp = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::default(),
    };
    let cfg = &exp.sweep;
    let start = std::time::Instant::now();
    let cells = run_sweep(cfg, &exp.geometry, &exp.channel, &exp.system)?;
    println!("{} trials/cell in {:.1}s", cfg.trials, start.elapsed().as_secs_f64());
    println!(
        "{:>2} {:>6} {:<12} {:>12} {:>10} {:>12} {:>10} {:>12} {:>10} {:>6}",
        "n", "lambda", "mechanism", "mean T s", "se", "energy mJ", "se", "harvest J", "se", "src%"
    );
    for c in &cells {
        println!(
            "{:>2} {:>6} {:<12} {:>12.4} {:>10.4} {:>12.4} {:>10.4} {:>12.4e} {:>10.2e} {:>6.1}",
            c.n,
            c.lambda_w,
            c.mechanism.as_str(),
            c.mean_t_s,
            c.std_err_t_s,
            c.mean_energy_mj,
            c.std_err_energy_mj,
            c.mean_net_harvest_j,
            c.std_err_net_harvest_j,
            100.0 * c.win_rate_source
        );
    }
    for (name, ok, detail) in sweep_trends(&cells, cfg) {
        println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
    }
    Ok(())
}
