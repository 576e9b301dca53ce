use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_phonon-chill");

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const TOY: &str = "command.n_plus = 200\ncommand.r_c = 3\ncommand.sweep = n_ld\ncommand.sweep_range = 0.5, 50, 5\n";

#[test]
fn toy_run_succeeds_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("toy.cfg");
    fs::write(&cfg, TOY).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = run(&["toy"], &cfg, &a);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(code(&run(&["toy"], &cfg, &b)), 0);
    for name in ["toy.csv", "toy.json"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let csv = fs::read_to_string(a.join("toy.csv")).unwrap();
    assert!(csv.starts_with("# manifest = manifest.json\n"));
    assert_eq!(csv.lines().count(), 2 + 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"].as_array().unwrap().len(), 2);
}

#[test]
fn format_flag_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("toy.cfg");
    fs::write(&cfg, TOY).unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&run(&["toy", "--format", "json"], &cfg, &out)), 0);
    assert!(out.join("toy.json").exists());
    assert!(!out.join("toy.csv").exists());
    assert_eq!(code(&run(&["toy", "--format", "xml"], &cfg, &out)), 2);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&run(&["toy"], &dir.path().join("missing.cfg"), &out)), 2);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "oscillator.gamma = -1\n").unwrap();
    let o = run(&["rates"], &bad, &out);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    // a toy config has no qudit section
    let toy = dir.path().join("toy.cfg");
    fs::write(&toy, TOY).unwrap();
    assert_eq!(code(&run(&["rates"], &toy, &out)), 2);
}

#[test]
fn singular_qudit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sing.cfg");
    let text = fs::read_to_string(configs().join("ladder_rates.cfg"))
        .unwrap()
        .replace("qudit.gamma1 = 2", "qudit.gamma1 = 0");
    fs::write(&cfg, text).unwrap();
    let o = run(&["rates"], &cfg, &dir.path().join("o"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_validation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v.cfg");
    let text = fs::read_to_string(configs().join("validate_lambda.cfg")).unwrap()
        + "solver.n_start = 1\nsolver.n_ceiling = 1\n";
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("o");
    let o = run(&["validate"], &cfg, &out);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn lambda_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["validate"],
        &configs().join("validate_lambda.cfg"),
        &dir.path().join("o"),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
