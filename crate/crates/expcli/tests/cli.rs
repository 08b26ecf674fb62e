use std::process::Command;

use pimac_expcli::{execute, ExperimentConfig, ExperimentId, Grid, Mode, RunError};

fn cfg(e: ExperimentId, channel: &str, grid: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(e);
    c.channel = Some(channel.into());
    c.grid = Some(grid.parse().unwrap());
    c
}

#[test]
fn grid_parsing() {
    let g: Grid = "0:1:0.1".parse().unwrap();
    assert_eq!(g.points().len(), 11);
    assert_eq!(g.points()[3], 0.3);
    assert_eq!(g.points()[10], 1.0);
    let g: Grid = "0.02:0.7:0.04".parse().unwrap();
    assert_eq!(g.points().len(), 18);
    assert_eq!(g.points()[9], 0.38);
    assert_eq!("0.5".parse::<Grid>().unwrap().points(), &[0.5]);
    assert_eq!("0.1,0.3".parse::<Grid>().unwrap().points(), &[0.1, 0.3]);
    for bad in ["", "1:0:0.1", "0:1:0", "0:1:-1", "a,b", "0:1"] {
        assert!(bad.parse::<Grid>().is_err(), "{bad:?}");
    }
}

#[test]
fn toml_overrides() {
    let mut c = ExperimentConfig::new(ExperimentId::RateRegion);
    c.apply_toml("experiment = \"power-rate\"\nchannel = \"H2\"\nmode = \"proper\"\norder = 2\ngrid = \"0.2\"\nseed = 9\n[solver]\nr_reinit = 3\n")
        .unwrap();
    assert_eq!(c.experiment, ExperimentId::PowerRate);
    assert_eq!(c.channel_name(), "H2");
    assert_eq!(c.mode, Mode::Proper);
    assert_eq!(c.order, Some(2));
    assert_eq!(c.seed, 9);
    assert_eq!(c.solver.r_reinit, Some(3));
    assert!(c.apply_toml("colour = 1").is_err());
    assert!(c.apply_toml("grid = \"\"").is_err());
}

#[test]
fn validation() {
    let mut c = ExperimentConfig::new(ExperimentId::PowerRate);
    c.order = Some(3);
    assert!(matches!(execute(&c), Err(RunError::Config(_))));
    c.order = None;
    c.extension = 0;
    assert!(execute(&c).is_err());
    c.extension = 2;
    c.alpha = Some([0.5, 0.5, 0.5]);
    assert!(execute(&c).is_err());
    let mut c = ExperimentConfig::new(ExperimentId::Multiuser);
    c.users = vec![2];
    assert!(execute(&c).is_err());
    let c = cfg(ExperimentId::RateRegion, "H1", "2");
    assert!(execute(&c).is_err());
    let c = cfg(ExperimentId::PowerSinr, "nowhere.txt", "0.1");
    assert!(matches!(execute(&c), Err(RunError::Channel(_))));
}

#[test]
fn free_p2p_rate() {
    let r = execute(&cfg(ExperimentId::P2pVsMac, "H1", "0")).unwrap();
    assert_eq!(r.rows.len(), 2);
    for row in &r.rows {
        assert!((row.r3.unwrap() - 3.1894).abs() < 5e-3);
        assert!(row.audit_slack.unwrap() >= -1e-6);
    }
}

#[test]
fn proper_rate_baseline_on_h2() {
    let mut c = cfg(ExperimentId::PowerRate, "H2", "0.2");
    c.mode = Mode::Proper;
    let r = execute(&c).unwrap();
    let p = |mode: &str| r.rows.iter().find(|x| x.mode == mode).unwrap().p_total.unwrap();
    assert!((p("proper/order1") - 0.0646).abs() < 5e-4);
    assert!((p("proper/order2") - 0.06689).abs() < 5e-4);
}

#[test]
fn reruns_are_byte_identical() {
    let mut c = cfg(ExperimentId::PowerRate, "H1", "0.1,0.3");
    c.extension = 2;
    c.order = Some(1);
    let a = execute(&c).unwrap().csv().unwrap();
    let b = execute(&c).unwrap().csv().unwrap();
    assert_eq!(a, b);
    let c = cfg(ExperimentId::RateRegion, "H2", "0.5");
    assert_eq!(execute(&c).unwrap().csv().unwrap(), execute(&c).unwrap().csv().unwrap());
}

#[test]
fn infeasible_rows_have_no_outputs() {
    let mut c = cfg(ExperimentId::Multiuser, "H1+Hprime(7)", "0.38");
    c.mode = Mode::Proper;
    let r = execute(&c).unwrap();
    let row = &r.rows[0];
    assert_eq!(row.status, "infeasible");
    assert!(row.p_total.is_none() && row.r1.is_none() && row.p_per_user.is_empty());
    assert!(r.check("J=7 proper β=0.38").unwrap().pass);
}

#[test]
fn binary_writes_outputs_and_rejects_bad_config() {
    let exe = env!("CARGO_BIN_EXE_pimac");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe)
        .args(["--experiment", "p2p-vs-mac", "--channel", "H1", "--grid", "0", "--mode", "proper", "--out"])
        .arg(dir.path())
        .env("PIMAC_SEED", "5")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("p2p-vs-mac-H1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,channel,mode,demand,R1,R2,R3,P_total,P_per_user,status,iters,audit_slack,seed"
    );
    assert!(lines.next().unwrap().ends_with(",5"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p2p-vs-mac-H1.json")).unwrap()).unwrap();
    assert_eq!(json["rows"], 1);
    assert_eq!(json["checks"][0]["pass"], true);

    let empty = Command::new(exe).args(["--experiment", "power-rate", "--grid", ""]).output().unwrap();
    assert!(!empty.status.success());
    let cfgfile = dir.path().join("c.toml");
    std::fs::write(&cfgfile, "experiment = \"power-rate\"\ngrid = \"1:0:0.1\"\n").unwrap();
    let bad = Command::new(exe).arg("--config").arg(&cfgfile).output().unwrap();
    assert!(!bad.status.success());
    let blocked = dir.path().join("file");
    std::fs::write(&blocked, "").unwrap();
    let unwritable = Command::new(exe)
        .args(["--experiment", "p2p-vs-mac", "--grid", "0", "--mode", "proper", "--out"])
        .arg(blocked.join("sub"))
        .output()
        .unwrap();
    assert!(!unwritable.status.success());
}
