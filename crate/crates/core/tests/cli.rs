use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wpt_relay::cli::RunManifest;
use wpt_relay::numerics::ToleranceSpec;
use wpt_relay::optim::oracle_schedule;
use wpt_relay::{records, CellStats, EffectiveChannel, ScheduleSolution, SystemParams};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpt-relay"))
        .args(args)
        .output()
        .unwrap()
}

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_trivial_channel() {
    let o = bin(&["solve", "--z", "1", "--lambda-w", "1", "--p-max-w", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("5.5451774445"), "{text}");
    assert!(text.contains("1.7182818285"), "{text}");
}

#[test]
fn solve_json_matches_oracle() {
    let o = bin(&["solve", "--z", "2", "--p-max-w", "10", "--json"]);
    assert!(o.status.success());
    let s: ScheduleSolution = records::from_json(&stdout(&o)).unwrap();
    let p = SystemParams {
        p_max_w: 10.0,
        ..SystemParams::default()
    };
    let oracle = oracle_schedule(EffectiveChannel::new(2.0).unwrap(), &p, &ToleranceSpec::default()).unwrap();
    assert!((s.cost - oracle.cost).abs() <= 1e-9 * oracle.cost);
}

#[test]
fn solve_rejects_non_positive_channel() {
    for z in ["0", "-1"] {
        let o = bin(&["solve", "--z", z]);
        assert_eq!(o.status.code(), Some(1), "z = {z}");
    }
    assert_eq!(bin(&["solve"]).status.code(), Some(1));
    assert_eq!(bin(&["solve", "--z", "1", "--alpha", "2"]).status.code(), Some(1));
}

#[test]
fn auction_on_golden_instance() {
    let golden = testdata("golden_instance.json");
    let cfg = testdata("golden.toml");
    let o = bin(&[
        "auction",
        golden.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let outcomes: Vec<wpt_relay::AuctionOutcome> = stdout(&o).lines().map(|l| records::from_json(l).unwrap()).collect();
    assert_eq!(outcomes.len(), 3);
    assert!(outcomes.iter().all(|o| o.winner == 1));
    assert!((outcomes[1].payment_power_w - outcomes[2].payment_power_w).abs() <= 1e-9);

    let direct = testdata("source_best_instance.json");
    let o = bin(&[
        "auction",
        direct.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--mechanism",
        "mspoa",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("winner 0"));
}

#[test]
fn auction_rejects_bad_inputs() {
    let cfg = testdata("smoke.toml");
    assert_eq!(bin(&["auction", cfg.to_str().unwrap()]).status.code(), Some(1));
    let golden = testdata("golden_instance.json");
    assert_eq!(
        bin(&["auction", golden.to_str().unwrap(), "--mechanism", "vickrey"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_smoke_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = testdata("smoke.toml");
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let o = bin(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let csv_a = std::fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("sweep.csv")).unwrap());

    let header = String::from_utf8(csv_a).unwrap().lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "n,lambda_w,mechanism,trials,mean_t_s,std_err_t_s,mean_energy_mj,std_err_energy_mj,mean_energy_db_mj,mean_net_harvest_j,std_err_net_harvest_j,win_rate_source,mean_source_cost"
    );
    let cells: Vec<CellStats> = records::read_file(&a.join("sweep.json")).unwrap();
    assert_eq!(cells.len(), 3 * 2 * 3);
    assert!(cells.iter().all(|c| c.trials == 10));
    let manifest: RunManifest = records::read_file(&a.join("manifest.json")).unwrap();
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.threads, 1);
    assert_eq!(manifest.resolved.system.data_bits_per_hz, 8.0);
    assert_eq!(manifest.resolved.sweep.trials, 10);
}

#[test]
fn sweep_reports_every_config_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[system]\np_max_w = -1.0\n[sweep]\ntrials = 0\nn_values = []\n").unwrap();
    let o = bin(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(
        err.contains("p_max_w") && err.contains("trials") && err.contains("n_values"),
        "{err}"
    );
}

#[test]
fn verify_fast_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = bin(&["verify", "--level", "fast", "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r: wpt_relay::verify::Report = records::read_file(&report).unwrap();
    assert!(r.passed());
    assert!(r.checks.len() >= 6);
}
