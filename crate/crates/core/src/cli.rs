//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::mechanisms::{run_truthful, AuctionOutcome, Mechanism};
use crate::montecarlo::{run_sweep, write_csv};
use crate::optim::{optimal_schedule, EffectiveChannel, SystemParams};
use crate::records::{self, RecordKind};
use crate::scenario::ScenarioInstance;
use crate::verify::{self, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_RECORD: &str = "sweep.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "wpt-relay",
    version,
    about = "Auction-based relay selection with wireless power transfer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal schedule for one effective channel.
    Solve {
        /// Effective channel z, W.
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run auctions on an instance record under truthful bidding.
    Auction {
        /// Instance record (JSON).
        instance: PathBuf,
        /// Mechanism to run; repeat for several. Defaults to all.
        #[arg(long, value_parser = parse_mechanism)]
        mechanism: Vec<Mechanism>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo sweep over n and lambda; writes CSV, records and manifest.
    Sweep {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the self-verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d_bits_per_hz: Option<f64>,
    #[arg(long)]
    pub lambda_w: Option<f64>,
    #[arg(long)]
    pub p_max_w: Option<f64>,
    #[arg(long)]
    pub sigma2_w: Option<f64>,
    #[arg(long)]
    pub aperture_m2: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Print machine-readable records instead of text.
    #[arg(long)]
    pub json: bool,
}

fn parse_mechanism(s: &str) -> std::result::Result<Mechanism, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl CommonArgs {
    /// Config file (or defaults) with command-line overrides applied and validated.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let s = &mut cfg.system;
        let overrides = [
            (self.d_bits_per_hz, &mut s.data_bits_per_hz),
            (self.lambda_w, &mut s.delay_power_w),
            (self.p_max_w, &mut s.p_max_w),
            (self.sigma2_w, &mut s.noise_power_w),
            (self.aperture_m2, &mut s.aperture_m2),
            (self.alpha, &mut s.harvest_efficiency),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Provenance written next to every sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub resolved: ExperimentConfig,
    pub artifact_version: String,
    pub seed: u64,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

impl RecordKind for RunManifest {
    const KIND: &'static str = "wpt-relay/manifest";
}

impl RecordKind for verify::Report {
    const KIND: &'static str = "wpt-relay/verify-report";
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerics(_) | Error::Sampling(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<W: Write>(command: Command, out: &mut W) -> Result<i32> {
    match command {
        Command::Solve { z, common } => cmd_solve(z, &common, out),
        Command::Auction {
            instance,
            mechanism,
            common,
        } => cmd_auction(&instance, &mechanism, &common, out),
        Command::Sweep {
            out: dir,
            seed,
            trials,
            threads,
            common,
        } => cmd_sweep(&dir, seed, trials, threads, &common, out),
        Command::Verify { level, out: path, json } => cmd_verify(level, path.as_deref(), json, out),
    }
}

fn cmd_solve<W: Write>(z: f64, common: &CommonArgs, out: &mut W) -> Result<i32> {
    let cfg = common.resolve()?;
    let sol = optimal_schedule(EffectiveChannel::new(z)?, &cfg.system)?;
    if common.json {
        writeln!(out, "{}", records::to_json(&sol)?)?;
    } else {
        writeln!(out, "z                 = {z:e} W")?;
        writeln!(out, "T*                = {:.10} s", sol.duration_s)?;
        writeln!(out, "P*                = {:.10} W", sol.total_power_w)?;
        writeln!(out, "v(z)              = {:.10} W s", sol.cost)?;
        writeln!(out, "constraint_active = {}", sol.constraint_active)?;
    }
    Ok(EXIT_OK)
}

fn cmd_auction<W: Write>(path: &Path, mechanisms: &[Mechanism], common: &CommonArgs, out: &mut W) -> Result<i32> {
    let cfg = common.resolve()?;
    let p: &SystemParams = &cfg.system;
    let inst: ScenarioInstance = records::read_file(path)?;
    inst.validate(p)?;
    let mechs: Vec<Mechanism> = if mechanisms.is_empty() {
        Mechanism::ALL.to_vec()
    } else {
        mechanisms.to_vec()
    };
    let outcomes = mechs
        .iter()
        .map(|&m| run_truthful(m, &inst, p))
        .collect::<Result<Vec<AuctionOutcome>>>()?;
    for o in &outcomes {
        if common.json {
            writeln!(out, "{}", serde_json::to_string(&envelope(o)?)?)?;
        } else {
            let runner = o.runner_up.map_or("-".to_string(), |r| r.to_string());
            writeln!(
                out,
                "{:<12} winner {} (runner-up {runner})  payment T = {:.6} s, P = {:.6} W  source cost {:.6} W s  winner net energy {:.6e} J",
                o.mechanism.as_str(),
                o.winner,
                o.payment_duration_s,
                o.payment_power_w,
                o.source_cost,
                o.winner_net_energy,
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn envelope<T: RecordKind + Clone>(value: &T) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&records::to_json(value)?)?)
}

fn cmd_sweep<W: Write>(
    dir: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    threads: Option<usize>,
    common: &CommonArgs,
    out: &mut W,
) -> Result<i32> {
    let mut cfg = common.resolve()?;
    if let Some(s) = seed {
        cfg.sweep.seed = s;
    }
    if let Some(t) = trials {
        cfg.sweep.trials = t;
    }
    cfg.validate()?;
    if threads == Some(0) {
        return Err(Error::Config(vec!["--threads must be >= 1".to_string()]));
    }
    let started = chrono::Utc::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(vec![format!("thread pool: {e}")]))?;
    let cells = pool.install(|| run_sweep(&cfg.sweep, &cfg.geometry, &cfg.channel, &cfg.system))?;

    std::fs::create_dir_all(dir)?;
    write_csv(&cells, std::fs::File::create(dir.join(SWEEP_CSV))?)?;
    records::write_file(&dir.join(SWEEP_RECORD), &cells)?;
    let manifest = RunManifest {
        config_path: common.config.clone(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.sweep.seed,
        threads: pool.current_num_threads(),
        resolved: cfg,
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        outputs: vec![SWEEP_CSV.to_string(), SWEEP_RECORD.to_string()],
    };
    records::write_file(&dir.join(MANIFEST), &manifest)?;
    if common.json {
        writeln!(out, "{}", records::to_json(&manifest)?)?;
    } else {
        writeln!(
            out,
            "{} cells written to {}",
            cells.len(),
            dir.join(SWEEP_CSV).display()
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify<W: Write>(level: Level, path: Option<&Path>, json: bool, out: &mut W) -> Result<i32> {
    let report = verify::run(level, optimal_schedule);
    if let Some(p) = path {
        records::write_file(p, &report)?;
    }
    if json {
        writeln!(out, "{}", records::to_json(&report)?)?;
    } else {
        for c in &report.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{tag} {:<28} {:>8.2}s  {}", c.name, c.seconds, c.detail)?;
        }
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}
