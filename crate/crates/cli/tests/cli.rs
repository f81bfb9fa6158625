use std::process::{Command, Output};

fn latdisp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latdisp"))
        .args(args)
        .env("LATDISP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("latdisp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_ladder_passes() {
    let o = latdisp(&["verify", "--graph", "ladder", "--d", "1", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().last().unwrap() == "PASS", "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_json_report() {
    let o = latdisp(&["verify", "--graph", "cylinder3_potential", "--t", "1.25", "--json", "--probes", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["oracle"]["max_error"].as_f64().unwrap() < 1e-8);
    assert!(v["fiber_quadrature"]["max_error"].as_f64().unwrap() < 1e-11);
}

#[test]
fn impossible_tolerance_exits_one() {
    let o = latdisp(&["verify", "--graph", "ladder", "--t", "1", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("FAIL:"));
}

#[test]
fn scan_rejects_reversed_window() {
    let o = latdisp(&["scan", "--graph", "ladder", "--t-min", "5", "--t-max", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--t-min"));
}

#[test]
fn no_dispersion_on_ladder() {
    let o = latdisp(&["no-dispersion", "--graph", "ladder", "--t-max", "100", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["min_sup"].as_f64().unwrap() >= 0.7071);
    assert!(v["max_return"].as_f64().unwrap() > 0.999);
}

#[test]
fn kernel_prints_real_and_imaginary_parts() {
    // e^{itH}((0, v_0), (0, v_0)) on the ladder at t = 1 is J_0(2) cos(1).
    let o = latdisp(&["kernel", "--graph", "ladder", "--t", "1", "--offset", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let parts: Vec<f64> = stdout(&o).split_whitespace().map(|s| s.parse().unwrap()).collect();
    let expected = 0.22389077914123562 * 1f64.cos();
    assert!((parts[0] - expected).abs() < 1e-14);
    assert!(parts[1].abs() < 1e-15);
}

#[test]
fn kernel_block_and_spectrum_dump() {
    let o = latdisp(&["kernel", "--graph", "star3", "--t", "0.5", "--offset", "2,-1", "--d", "2", "--block"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["block"].as_array().unwrap().len(), 4);

    let o = latdisp(&["kernel", "--graph", "ladder", "--t", "0", "--offset", "0", "--dump-spectrum"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("eigenvalues"));
}

#[test]
fn bessel_cross_check() {
    let o = latdisp(&["bessel", "--nu", "4", "--t", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.13203418392461216).abs() < 1e-14);
    assert!(v["quadrature_error"].as_f64().unwrap() < 1e-11);

    let o = latdisp(&["bessel", "--nu", "2", "--t", "10", "--nodes", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_spec_names_the_field() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"kind": "path", "size": 3, "potentail": [0, 0, 0]}"#).unwrap();
    let o = latdisp(&["kernel", "--graph", path.to_str().unwrap(), "--t", "1", "--offset", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("potentail"), "{}", stderr(&o));

    std::fs::write(&path, r#"{"kind": "path", "size": 2, "potential": [1.0]}"#).unwrap();
    let o = latdisp(&["kernel", "--graph", path.to_str().unwrap(), "--t", "1", "--offset", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("potential"), "{}", stderr(&o));

    let o = latdisp(&["kernel", "--graph", "no-such-crystal", "--t", "1", "--offset", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_then_fit() {
    let csv = scratch("single.csv");
    let spec = scratch("single.json");
    std::fs::write(&spec, r#"{"kind": "path", "size": 1}"#).unwrap();
    let o = latdisp(&[
        "scan", "--graph", spec.to_str().unwrap(), "--d", "2", "--t-min", "1", "--t-max", "500", "--points", "64",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("t,sup_norm,envelope,bound\n"));

    let o = latdisp(&["fit", "--in", csv.to_str().unwrap(), "--t-min", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["exponent"].as_f64().unwrap() + 2.0 / 3.0).abs() < 0.05, "{v}");

    let o = latdisp(&["fit", "--in", csv.to_str().unwrap(), "--column", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["verify", "--graph", "strip4", "--t", "1.5", "--seed", "7", "--json"];
    let a = latdisp(&args);
    let b = latdisp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
