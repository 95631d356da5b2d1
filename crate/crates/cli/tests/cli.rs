use std::path::Path;
use std::process::{Command, Output};

fn adomian(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adomian"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn catalan_exits_zero_and_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = adomian(tmp.path(), &["catalan"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "catalan.csv");
    assert!(csv.starts_with("n,recurrence,closed,equal\n"));
    assert_eq!(csv.lines().count(), 32);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let m = manifest(tmp.path());
    assert_eq!(m["command"], "catalan");
    assert_eq!(m["passed"], true);
    assert_eq!(m["config"]["n"], 30);
    assert!(m["versions"]["adomian-core"].is_string());
}

#[test]
fn ex1_with_closed_form_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = adomian(tmp.path(), &["ex1", "--order", "15", "--check-closed"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(
        read(tmp.path(), "coefficients.csv").starts_with("n,alpha_exact,alpha,beta_exact,beta\n")
    );
    assert!(read(tmp.path(), "closed.csv")
        .starts_with("s,alpha_series,alpha_closed,beta_series,beta_closed\n"));
}

#[test]
fn ex2_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = adomian(tmp.path(), &["ex2"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn expfunc_refuses_past_blowup() {
    let tmp = tempfile::tempdir().unwrap();
    let out = adomian(tmp.path(), &["mc-expfunc", "--T", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beyond blow-up horizon π/(2√2)"), "{err}");
}

#[test]
fn mc_eq_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = [
        "mc-eq", "--paths", "500", "--steps", "50,100", "--seed", "3",
    ];
    assert_eq!(adomian(&a, &args).status.code(), Some(0));
    assert_eq!(adomian(&b, &args).status.code(), Some(0));
    let csv = read(&a, "residuals.csv");
    assert!(
        csv.starts_with("reading,n_steps,dt,log_c,mean,std,std_error,max_abs,band,within_band\n")
    );
    for f in ["residuals.csv", "results.json", "summary.txt"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    assert_eq!(manifest(&a)["seed"], 3);
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"catalan": {"n": 12}, "ex1": {"order": 5}}"#).unwrap();
    let out_dir = tmp.path().join("out");
    let out = adomian(
        &out_dir,
        &["--config", cfg.to_str().unwrap(), "catalan", "--n", "20"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(manifest(&out_dir)["config"]["n"], 12);
    assert_eq!(read(&out_dir, "catalan.csv").lines().count(), 14);
}

#[test]
fn unknown_config_key_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"nn": 12}"#).unwrap();
    let out = adomian(
        &tmp.path().join("out"),
        &["--config", cfg.to_str().unwrap(), "catalan"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key `nn`"));
}

#[test]
fn report_all_quick_passes_and_repeats() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = adomian(&a, &["report-all", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", read(&a, "summary.txt"));
    assert_eq!(
        adomian(&b, &["report-all", "--quick"]).status.code(),
        Some(0)
    );
    let gates: serde_json::Value = serde_json::from_str(&read(&a, "gates.json")).unwrap();
    assert_eq!(gates["all_passed"], true);
    assert_eq!(gates["gates"].as_array().map(Vec::len), Some(9));
    for f in ["gates.json", "gates.csv", "summary.txt"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}
