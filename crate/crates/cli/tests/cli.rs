use std::process::Command;

use ppife_cli::{parse_config, CliError, EXTENDED_MESHES};
use ppife_core::InitialMode;

fn ppife() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ppife"))
}

#[test]
fn flags_override_defaults() {
    let s = parse_config(["ppife", "--ns", "20", "--theta", "0.5", "--epsilon", "-1", "--sigma0", "100"]).unwrap();
    assert_eq!(s.run.study, vec![20]);
    assert_eq!(s.run.theta, 0.5);
    assert_eq!(s.run.epsilon, -1.0);
    assert_eq!(s.run.sigma0, 100.0);
    assert_eq!(s.run.beta_plus, 10.0);
    assert_eq!(s.run.init, InitialMode::Interpolation);
    assert!(s.csv.is_none());
}

#[test]
fn flags_beat_config_file_beats_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "preset = cn-sym\nbeta_plus = 10000\ninit = projection\n").unwrap();
    let cfg = path.to_str().unwrap();
    let s = parse_config(["ppife", "--config", cfg, "--beta-plus", "10"]).unwrap();
    assert_eq!(s.run.beta_plus, 10.0);
    assert_eq!(s.run.theta, 0.5);
    assert_eq!(s.run.epsilon, -1.0);
    assert_eq!(s.run.init, InitialMode::EllipticProjection);
    let s = parse_config(["ppife", "--config", cfg]).unwrap();
    assert_eq!(s.run.beta_plus, 10000.0);
}

#[test]
fn invalid_settings_are_usage_errors() {
    for argv in [
        vec!["ppife", "--epsilon", "2"],
        vec!["ppife", "--ns", "20", "--study", "10,20"],
        vec!["ppife", "--study", "20,10"],
        vec!["ppife", "--preset", "nope"],
        vec!["ppife", "--init", "random"],
        vec!["ppife", "--theta", "1.5"],
        vec!["ppife", "--bogus"],
    ] {
        assert!(matches!(parse_config(argv.clone()), Err(CliError::Usage(_))), "{argv:?}");
    }
    let missing = parse_config(["ppife", "--config", "/nonexistent/ppife.cfg"]);
    assert!(matches!(missing, Err(CliError::ConfigIo { .. })));
}

#[test]
fn extended_appends_larger_meshes() {
    let s = parse_config(["ppife", "--study", "10,20", "--extended"]).unwrap();
    let mut expected = vec![10, 20];
    expected.extend(EXTENDED_MESHES);
    assert_eq!(s.run.study, expected);
}

#[test]
fn binary_writes_csv_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("errors.csv");
    let field = dir.path().join("field.txt");
    let out = ppife()
        .args(["--study", "4,8", "--csv"])
        .arg(&csv)
        .arg("--export")
        .arg(&field)
        .env("PPIFE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,dt,linf,linf_rate,l2,l2_rate,h1,h1_rate,energy,energy_rate");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2.50000e-1,"));
    assert!(lines[2].split(',').all(|f| f.parse::<f64>().is_ok()));
    let field = std::fs::read_to_string(&field).unwrap();
    assert_eq!(field.lines().count(), 64 * 25 + 1);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn binary_output_is_deterministic() {
    let run = || {
        let out = ppife().args(["--ns", "10", "--theta", "0.5"]).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn binary_rejects_bad_input() {
    let out = ppife().args(["--epsilon", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    let out = ppife().arg("--unknown-flag").output().unwrap();
    assert!(!out.status.success());
    let out = ppife().args(["--ns", "4"]).env("PPIFE_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
