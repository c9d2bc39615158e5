use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maximin-power"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn curve_rows_and_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let o = bin(&[
        "curve",
        "--reward",
        "awgn:1",
        "--p",
        "0.5",
        "--x-max",
        "8",
        "--samples",
        "17",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,omega,phi,greedy"));
    assert_eq!(lines.next(), Some("0.0,0.0,0.0,0.0"));
    assert!(text.lines().any(|l| l == "4.0,3.0,2.0,4.0"), "{text}");
    let ends = fs::read_to_string(dir.path().join("fig1_endpoints.csv")).unwrap();
    assert_eq!(
        ends.lines().collect::<Vec<_>>(),
        ["k,x,y", "0,0.0,0.0", "1,1.0,1.0", "2,4.0,3.0"]
    );
}

#[test]
fn evaluate_series_json() {
    let o = bin(&[
        "evaluate",
        "--reward",
        "awgn:1",
        "--family",
        "bernoulli",
        "--c",
        "1",
        "--p",
        "0.5",
        "--method",
        "series",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["method"], "bernoulli_series");
    assert!((v["value"].as_f64().unwrap() - 0.173287).abs() < 1e-6);
    assert_eq!(v["family"], "bernoulli");
    assert!(v.get("stderr").is_none());
}

#[test]
fn sweep_header_and_shape() {
    let o = bin(&[
        "sweep", "--reward", "sqrt", "--family", "uniform", "--nmcr", "0.9", "--c-grid", "0.5,1,2",
        "--grid-N", "100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "family,c,p,nmcr,mcr,policy,policy_gain,optimal_gain,additive_gap,multiplicative_factor,tolerance"
    );
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[1..].iter().all(|l| l.starts_with("uniform,")));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = bin(&[
            "evaluate",
            "--family",
            "exponential",
            "--c",
            "2",
            "--nmcr",
            "0.5",
            "--method",
            "mc",
            "--n",
            "5000",
            "--paths",
            "8",
            "--seed",
            "99",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
    let sweep = |name: &str| {
        let path = dir.path().join(name);
        let o = bin(&[
            "sweep",
            "--family",
            "exponential",
            "--p",
            "0.2,0.6",
            "--c-grid",
            "lin:0.5:2:4",
            "--grid-N",
            "80",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(path).unwrap()
    };
    assert_eq!(sweep("a.csv"), sweep("b.csv"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cell.cfg");
    fs::write(&cfg, "# one cell\nreward = awgn:1\nfamily = bernoulli\nc = 1\np = 0.2\nmethod = series\n").unwrap();
    let o = bin(&["evaluate", "--config", cfg.to_str().unwrap(), "--p", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p"], 0.5);
    assert!((v["value"].as_f64().unwrap() - 0.25 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    // configuration errors
    assert_eq!(bin(&["evaluate", "--c", "1"]).status.code(), Some(1));
    assert_eq!(
        bin(&["evaluate", "--c", "1", "--p", "0.5", "--nmcr", "0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        bin(&["evaluate", "--family", "uniform", "--c", "1", "--p", "0.5", "--method", "series"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bin(&["curve", "--p", "1.5"]).status.code(), Some(1));
    assert_eq!(
        bin(&["sweep", "--c-grid", "1", "--p", "0.5", "--grid-N", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bin(&["bogus"]).status.code(), Some(1));
    // value iteration that cannot meet its tolerance
    let o = bin(&[
        "evaluate", "--family", "uniform", "--c", "1", "--p", "0.5", "--grid-N", "4", "--eps",
        "1e-300",
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn verify_filtered_passes() {
    let o = bin(&["verify", "--filter", "reward/"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.lines()
            .all(|l| l.starts_with("PASS") || l.ends_with("checks passed")),
        "{text}"
    );
}
