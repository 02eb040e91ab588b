use std::fs;
use std::process::{Command, Output};

fn weylbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

const ZERO: &str = r#"{"kind":"constant","c":0}"#;
const ONE: &str = r#"{"kind":"constant","c":1}"#;

#[test]
fn amplitude_of_zero_potential_is_zero() {
    let out = weylbc(&[
        "amplitude",
        "--potential",
        ZERO,
        "--xmax",
        "1",
        "--step",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,A,bound"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        let a: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(a, 0.0);
    }
}

#[test]
fn amplitude_of_unit_constant_matches_bessel_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = weylbc(&[
        "amplitude",
        "--potential",
        ONE,
        "--xmax",
        "3",
        "--step",
        "0.0025",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("norm_q=") && stderr.contains("method=march"));
    let text = fs::read_to_string(dir.path().join("amplitude.csv")).unwrap();
    let row = text.lines().nth(1 + 400).unwrap();
    let fields: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(fields[0], 1.0);
    assert!((fields[1] - 0.576725).abs() < 1e-4, "{}", fields[1]);
}

#[test]
fn misaligned_sampled_potential_is_a_config_error() {
    let q = r#"{"kind":"sampled","step":0.15,"values":[1,2,3]}"#;
    let out = weylbc(&[
        "amplitude",
        "--potential",
        q,
        "--xmax",
        "1",
        "--step",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("not an integer multiple"));
}

#[test]
fn mfunction_threshold_and_override() {
    let out = weylbc(&[
        "mfunction",
        "--potential",
        ONE,
        "--xmax",
        "4",
        "--step",
        "0.01",
        "--k",
        "3,8",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let out = weylbc(&[
        "mfunction",
        "--potential",
        ONE,
        "--xmax",
        "4",
        "--step",
        "0.01",
        "--k",
        "3,8",
        "--allow-unverified",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("re_k,im_k,re_m,im_m,tail_bound,quad_est\n"));
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows[0][4], "inf");
    let m: f64 = rows[1][2].parse().unwrap();
    assert!((m + 65f64.sqrt()).abs() < 1e-3);
}

#[test]
fn mfunction_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_weylbc"))
            .args([
                "mfunction",
                "--potential",
                r#"{"kind":"box","c":1,"w":1}"#,
                "--k-range",
                "6:40:9",
                "--xmax",
                "6",
                "--step",
                "0.01",
            ])
            .env("WEYLBC_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(String::from_utf8(one.stdout).unwrap().lines().count(), 10);
}

#[test]
fn mfunction_json_echoes_configuration() {
    let out = weylbc(&[
        "mfunction",
        "--potential",
        ONE,
        "--xmax",
        "4",
        "--step",
        "0.01",
        "--k",
        "7-0.5i",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["method"], "march");
    assert_eq!(v["config"]["potential"]["kind"], "constant");
    assert_eq!(v["evaluations"][0]["im_k"], -0.5);
    assert!(v["evaluations"][0]["im_m"].as_f64().unwrap() > 0.0);
}

#[test]
fn neumann_method_from_the_command_line() {
    let q = r#"{"kind":"box","c":0.5,"w":1}"#;
    let march = weylbc(&[
        "amplitude",
        "--potential",
        q,
        "--xmax",
        "2",
        "--step",
        "0.01",
    ]);
    let series = weylbc(&[
        "amplitude",
        "--potential",
        q,
        "--xmax",
        "2",
        "--step",
        "0.01",
        "--method",
        "neumann",
        "--tol",
        "1e-12",
    ]);
    let parse = |o: &Output| -> Vec<f64> {
        String::from_utf8(o.stdout.clone())
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let (a, b) = (parse(&march), parse(&series));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    let big = weylbc(&[
        "amplitude",
        "--potential",
        r#"{"kind":"constant","c":100}"#,
        "--xmax",
        "4",
        "--step",
        "0.05",
        "--method",
        "neumann",
        "--tol",
        "1e-12",
    ]);
    assert_eq!(big.status.code(), Some(3));
}

#[test]
fn response_with_builtin_and_file_controls() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = weylbc(&[
        "response",
        "--potential",
        ONE,
        "--xmax",
        "1",
        "--step",
        "0.01",
        "--control",
        "sine:1",
        "--out",
        d,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let kernel = fs::read_to_string(dir.path().join("response_kernel.csv")).unwrap();
    assert!(kernel.starts_with("t,r\n"));
    let r0: f64 = kernel
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(r0, -0.5);
    let rf = fs::read_to_string(dir.path().join("response.csv")).unwrap();
    assert!(rf.starts_with("t,Rf\n"));
    assert_eq!(rf.lines().count(), kernel.lines().count());

    let control = dir.path().join("control.csv");
    let rows: String = (0..=100)
        .map(|j| format!("{},{}\n", j as f64 * 0.02, (j as f64 * 0.02).sin()))
        .collect();
    fs::write(&control, format!("t,f\n{rows}")).unwrap();
    let out = weylbc(&[
        "response",
        "--potential",
        ONE,
        "--xmax",
        "1",
        "--step",
        "0.01",
        "--control",
        control.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["derivative"], "numeric");
    let first = v["response"][0]["Rf"].as_f64().unwrap();
    assert!((first + 1.0).abs() < 1e-3);

    let out = weylbc(&[
        "response",
        "--potential",
        ONE,
        "--xmax",
        "1",
        "--step",
        "0.02",
        "--control",
        control.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_default_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = weylbc(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validate.json")).unwrap())
            .unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() > 20);
}

#[test]
fn validate_reports_failure_with_exit_five() {
    // a step this coarse cannot meet the oracle tolerance
    let out = weylbc(&[
        "validate",
        "--potential",
        r#"{"kind":"box","c":1,"w":1}"#,
        "--step",
        "0.5",
        "--xmax",
        "8",
    ]);
    assert_eq!(
        out.status.code(),
        Some(5),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn potential_from_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    fs::write(&path, "x,q\n0,1\n0.5,1\n1.0,1\n").unwrap();
    let out = weylbc(&[
        "amplitude",
        "--potential",
        path.to_str().unwrap(),
        "--xmax",
        "1",
        "--step",
        "0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,q\n0,1\n0.5,oops\n").unwrap();
    let out = weylbc(&[
        "amplitude",
        "--potential",
        bad.to_str().unwrap(),
        "--xmax",
        "1",
        "--step",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));
}
