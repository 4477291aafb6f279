use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floor-relu"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build(dir: &Path, extra: &[&str]) -> (String, String) {
    let net = dir.join("net.json");
    let cert = dir.join("cert.json");
    let mut args = vec!["build", "--out", p(&net), "--cert", p(&cert)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (p(&net).to_string(), p(&cert).to_string())
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (net, cert) = build(dir.path(), &["--target", "mean", "--d", "2", "--N", "2", "--L", "2", "--theorem", "1"]);
    let rep = dir.path().join("rep.json");
    let csv = dir.path().join("rows.csv");
    let out = run(&["verify", "--net", &net, "--cert", &cert, "--grid", "32", "--report", p(&rep), "--csv", p(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["audit"]["width"], 14);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x1,x2,f,phi,abs_err\n"));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (net, cert) = build(dir.path(), &["--target", "spike", "--d", "1", "--N", "3", "--L", "1", "--theorem", "2"]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for r in [&a, &b] {
        let out = run(&["verify", "--net", &net, "--cert", &cert, "--samples", "300", "--seed", "9", "--report", p(r)]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let other = tempfile::tempdir().unwrap();
    let mk = |d: &Path| {
        bin()
            .env("SOURCE_DATE_EPOCH", "1700000000")
            .args(["build", "--target", "min", "--d", "1", "--N", "2", "--L", "1", "--theorem", "2"])
            .args(["--out", p(&d.join("n.json")), "--cert", p(&d.join("c.json"))])
            .status()
            .unwrap()
    };
    assert!(mk(dir.path()).success() && mk(other.path()).success());
    for f in ["n.json", "c.json"] {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(other.path().join(f)).unwrap());
    }
}

#[test]
fn tampered_certificate_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (net, cert) = build(dir.path(), &["--target", "mean", "--d", "1", "--N", "2", "--L", "2", "--theorem", "2"]);
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["bound"] = serde_json::json!({"m": "1", "e": -20});
    std::fs::write(&cert, v.to_string()).unwrap();
    assert_eq!(code(&run(&["verify", "--net", &net, "--cert", &cert])), 1);
}

#[test]
fn extract_modes() {
    let out = run(&["extract", "--mode", "fitter", "--N", "2", "--L", "3", "--bits", "10010110", "--check"]);
    assert_eq!(code(&out), 0);
    let lines = String::from_utf8(out.stdout).unwrap();
    let got: String = lines.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(got, "10010110");
    let out = run(&["extract", "--mode", "block", "--N", "2", "--J", "2", "--bits", "1011", "--index", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "2\t11\n");
    let out = run(&["extract", "--mode", "locator", "--N", "2", "--L", "2", "--check"]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["cases"], 64);
    assert_eq!(code(&run(&["extract", "--mode", "fitter", "--N", "2", "--L", "3", "--bits", "101"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["demo", "--N", "2", "--L", "2", "--bogus"])), 2);
    assert_eq!(code(&run(&["build", "--target", "mean", "--d", "1", "--N", "2", "--L", "1", "--theorem", "3", "--out", "a", "--cert", "b"])), 2);
    assert_eq!(code(&run(&["eval", "--net", "/nonexistent/net.json", "--x", "0"])), 2);
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["build", "eval", "verify", "extract", "bounds", "demo", "probe", "targets"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        assert!(String::from_utf8(out.stdout).unwrap().contains("Usage"), "{sub}");
    }
}

#[test]
fn eval_demo_probe_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let (net, _) = build(dir.path(), &["--target", "mean", "--d", "1", "--N", "2", "--L", "2", "--theorem", "2"]);
    let out = run(&["eval", "--net", &net, "--x", "0.25;1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    let out = run(&["eval", "--net", &net, "--x", "1/2^2", "--mode", "float"]);
    assert_eq!(code(&out), 0);

    let out = run(&["demo", "--N", "2", "--L", "4", "--seed", "3"]);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((r["points"].as_u64(), r["width"].as_u64(), r["depth"].as_u64()), (Some(16), Some(6), Some(26)));
    assert_eq!(r["all_exact"], true);

    let fitter = dir.path().join("fitter.json");
    let bits = "1".repeat(64);
    // a 64-bit constant cannot survive binary64
    let out = run(&["extract", "--mode", "fitter", "--N", "2", "--L", "6", "--bits", &bits, "--check", "--out", p(&fitter)]);
    assert_eq!(code(&out), 0);
    let probe = dir.path().join("fitter-probe.json");
    let out = run(&["probe", "--net", p(&fitter), "--int-range", "1:64", "--report", p(&probe)]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&probe).unwrap()).unwrap();
    assert!(!r["divergences"].as_array().unwrap().is_empty());

    let out = run(&["bounds", "--target", "mean", "--d", "1", "--N", "2", "--L", "1,2,3", "--M", "2"]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["rows"].as_array().unwrap().len(), 3);
    assert_eq!(r["rows"][1]["theorem2"], serde_json::json!({"m": "3", "e": -3}));
    assert_eq!(r["domain"].as_array().unwrap().len(), 3);

    let rep = dir.path().join("probe.json");
    let out = run(&["probe", "--net", &net, "--grid", "17", "--report", p(&rep)]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["points"], 17);
}

#[test]
fn closed_stdout_is_not_a_panic() {
    let mut child = bin()
        .args(["bounds", "--target", "mean", "--d", "1", "--N", "2,3,4", "--L", "1,2,3,4,5,6"])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}
