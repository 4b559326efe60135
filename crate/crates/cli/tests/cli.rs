use std::io::Write;
use std::process::{Command, Output, Stdio};

fn mzl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzl"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn poly_file(name: &str, body: &str) -> String {
    let path = std::env::temp_dir().join(format!("mzl-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bounds() {
    let o = mzl(&["bound", "t2", "--d", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "65");
    assert_eq!(stdout(&mzl(&["bound", "prop", "--d", "1"])).trim(), "11");
    assert_eq!(
        stdout(&mzl(&[
            "bound", "khov", "--r", "1", "--alpha", "1", "--beta", "1"
        ]))
        .trim(),
        "2"
    );
    assert_eq!(mzl(&["bound", "khov", "--r", "1"]).status.code(), Some(2));
}

#[test]
fn eval_jinv_at_1728() {
    let o = mzl(&["eval", "jinv", "--x", "1728"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split(',').nth(2), Some("1.0"));
}

#[test]
fn eval_reads_points_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mzl"))
        .args(["eval", "j"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"0,1\n0.5,0.8660254037844386\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!((rows[0][2] - 1728.0).abs() < 1e-6);
    assert!(rows[1][2].abs() < 1e-6);
}

#[test]
fn selftest_passes() {
    let o = mzl(&["selftest", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mzl(&["--no-such-flag"]).status.code(), Some(2));
    assert_eq!(mzl(&["bound", "t2"]).status.code(), Some(2));
    let bad = poly_file("bad", "{\"deg_x\": 0}");
    assert_eq!(
        mzl(&["count-zeros", "j", "--poly", &bad]).status.code(),
        Some(2)
    );
}

#[test]
fn count_zeros_json() {
    let p = poly_file(
        "y2000i",
        r#"{"deg_x":0,"deg_y":1,"coeffs":[[[0.0,-2000.0],[1.0,0.0]]]}"#,
    );
    let o = mzl(&["count-zeros", "j", "--poly", &p, "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 1);
    assert_eq!(v["pass"], true);
}

#[test]
fn trace_csv() {
    let p = poly_file(
        "x",
        r#"{"deg_x":1,"deg_y":0,"coeffs":[[[-0.1,-1.5]],[[1.0,0.0]]]}"#,
    );
    let o = mzl(&["trace", "j", "--poly", &p]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    // one zero inside: the phase turns once
    assert!(((last[5] - first[5]) / std::f64::consts::TAU - 1.0).abs() < 1e-6);
}

#[test]
fn verify_all_is_deterministic() {
    let run = || {
        stdout(&mzl(&[
            "verify", "all", "--trials", "2", "--seed", "9", "--json",
        ]))
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.contains("\"schema\": \"mzl/1\""));
}

#[test]
fn config_file_and_env() {
    let cfg = std::env::temp_dir().join(format!("mzl-cli-{}.conf", std::process::id()));
    std::fs::write(&cfg, "# strict chain tolerance\nresidual_tol = 1e-30\n").unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    assert_eq!(
        mzl(&["--config", &cfg, "verify-chain"]).status.code(),
        Some(1)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_mzl"))
        .args(["--config", &cfg, "verify-chain"])
        .env("MZL_RESIDUAL_TOL", "1e-7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
