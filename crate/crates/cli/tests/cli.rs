use std::process::Command as Proc;

use qp_spectra_cli::{run, Command, Options, RunConfig};

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_qp-spectra"))
}

fn small(dir: &std::path::Path) -> RunConfig {
    RunConfig {
        n: 89,
        x_samples: 16,
        out_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

#[test]
fn config_round_trip() {
    let mut cfg = RunConfig::default();
    cfg.seed = Some(42);
    cfg.e_min = -7.123456789012345;
    cfg.options = Options {
        window: Some((-2.0, 2.0)),
        q: Some(233),
        ..Options::default()
    };
    let text = cfg.to_json();
    let back = RunConfig::from_json(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_json(), text);
    assert_eq!(back.hash(), cfg.hash());
    let moved = RunConfig {
        threads: 8,
        out_dir: "elsewhere".into(),
        ..cfg.clone()
    };
    assert_eq!(moved.hash(), cfg.hash());
    let other = RunConfig { n: 988, ..cfg.clone() };
    assert_ne!(other.hash(), cfg.hash());
}

#[test]
fn invalid_configs_name_the_field() {
    let bad = RunConfig {
        e_steps: 1,
        ..RunConfig::default()
    };
    let err = bad.validate().unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("e_steps"), "{err}");
    let mut bad = RunConfig::default();
    bad.alpha = "three".into();
    assert!(bad.validate().unwrap_err().to_string().contains("alpha"));
    let text = RunConfig::default()
        .to_json()
        .replace("\"lambda\": 2.0", "\"lambda\": -1.0");
    let err = RunConfig::from_json(&text).unwrap().validate().unwrap_err();
    assert!(err.to_string().contains("potential.lambda"), "{err}");
    let text = RunConfig::default().to_json().replace("\"n\":", "\"n_box\":");
    assert_eq!(RunConfig::from_json(&text).unwrap_err().exit_code(), 2);
}

#[test]
fn ids_writes_one_row_per_energy_and_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let paths = run(Command::Ids, &cfg).unwrap();
    let mut r = csv::Reader::from_path(&paths[0]).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["E", "N", "n", "samples"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 129);
    let first = &rows[0];
    assert_eq!(&first[0], "-8.000000000000e+00");
    let mut last = 0.0;
    for row in &rows {
        let n: f64 = row[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&n) && n >= last);
        last = n;
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ids.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config_hash"], cfg.hash());
    assert_eq!(meta["n_box"], 89);
    assert!(meta["substitutions"].is_u64() && meta["wall_time_s"].is_f64());
}

#[test]
fn every_subcommand_writes_its_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.e_steps = 9;
    cfg.options.grid = Some(50);
    cfg.options.count = Some(10);
    let cases = [
        (Command::Arithmetic, "k,p,q,dist,good"),
        (Command::Counting, "q,E,x,count"),
        (Command::Lyapunov, "E,L_cocycle,L_det,stderr,n,q_used"),
        (Command::Thouless, "E,L_thouless,L_det,diff"),
        (Command::Green, "a,b,l,log_abs_G"),
        (Command::Localize, "index,energy,center,rate_left,rate_right,r2,L_hat"),
        (Command::Coverage, "E,x_witness,gap,iterations"),
    ];
    for (cmd, header) in cases {
        let paths = run(cmd, &cfg).unwrap();
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{}", cmd.name());
        assert!(text.lines().count() > 1, "{}", cmd.name());
    }
    cfg.n = 8;
    let paths = run(Command::Curves, &cfg).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,j,lambda,cell_index");
    assert_eq!(text.lines().count() - 1, 8 * 50);
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = small(a.path());
    cfg.seed = Some(3);
    cfg.e_steps = 17;
    let pa = run(Command::Lyapunov, &cfg).unwrap();
    cfg.out_dir = b.path().to_path_buf();
    cfg.threads = 4;
    let pb = run(Command::Lyapunov, &cfg).unwrap();
    assert_eq!(std::fs::read(&pa[0]).unwrap(), std::fs::read(&pb[0]).unwrap());
}

#[test]
fn binary_flags_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["arithmetic", "--alpha", "silver", "--convergents", "5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("arithmetic.csv")).unwrap();
    let q: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(q, ["2", "5", "12", "29", "70"]);

    let out = bin()
        .args(["ids", "--e-min", "3", "--e-max", "-3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("e_max"));

    // the first orbit point sits on the pole
    let out = bin()
        .args(["green", "--n", "5", "--x", "0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let out = bin()
        .args([
            "ids",
            "--potential",
            "loglin",
            "--gamma-lin",
            "3",
            "--a-log",
            "0.5",
            "--n",
            "55",
            "--dump-config",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.n, 55);
    assert!((cfg.potential.gamma() - 5.0).abs() < 1e-12);
    let out = bin()
        .args(["ids", "--config"])
        .arg(&path)
        .args(["--x-samples", "4", "--e-steps", "5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("ids.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().ends_with(",55,4"));
}
