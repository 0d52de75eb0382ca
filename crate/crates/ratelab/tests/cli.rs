//! End-to-end checks of the `pidenet` binary.

use std::path::Path;
use std::process::Command;

fn pidenet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pidenet"))
}

fn write_model(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn simulate_price_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "bs.json",
        r#"{"family": "black_scholes", "d": 1, "params": {"vol": 0.2}}"#,
    );

    let out = pidenet()
        .args([
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--x",
            "1.0",
            "--steps",
            "16",
            "--paths",
            "2000",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("terminal mean"));

    let out = pidenet()
        .args([
            "price",
            "--model",
            model.to_str().unwrap(),
            "--payoff",
            "basket-call",
            "--weights",
            "1.0",
            "--strike",
            "1.0",
            "--x",
            "1.0",
            "--steps",
            "32",
            "--paths",
            "20000",
            "--seed",
            "7",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("price"), "{text}");

    // build an approximator and evaluate it
    let approx = dir.path().join("approx.json");
    let out = pidenet()
        .args([
            "build",
            "--model",
            model.to_str().unwrap(),
            "--weights",
            "1.0",
            "--epsilon",
            "0.5",
            "--seed",
            "9",
            "--out",
            approx.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(approx.exists());

    let out = pidenet()
        .args([
            "eval",
            "--net",
            approx.to_str().unwrap(),
            "--input",
            "1.0,1.0",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(value.is_finite());
}

#[test]
fn study_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    for (csv, threads) in [(&csv1, "1"), (&csv2, "2")] {
        let out = pidenet()
            .args([
                "study",
                "--kind",
                "euler-rate",
                "--seed",
                "21",
                "--paths",
                "200",
                "--h-ladder",
                "3,4,5",
                "--ref-k",
                "8",
                "--threads",
                threads,
                "--out",
                csv.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("slope"));
    }
    let a = std::fs::read_to_string(&csv1).unwrap();
    let b = std::fs::read_to_string(&csv2).unwrap();
    assert_eq!(a, b, "CSV must be byte-identical across thread counts");
    assert!(a.starts_with("h,estimate,std_error\n"));
}

#[test]
fn basket_demo_runs() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "bs.json",
        r#"{"family": "black_scholes", "d": 1, "params": {"vol": 0.2}}"#,
    );
    let csv = dir.path().join("basket.csv");
    let out = pidenet()
        .args([
            "basket",
            "--model",
            model.to_str().unwrap(),
            "--x0",
            "1.0",
            "--weights",
            "1.0",
            "--strikes",
            "0.9,1.1",
            "--epsilon",
            "0.5",
            "--ref-paths",
            "5000",
            "--seed",
            "23",
            "--out",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("rms strike error"), "{text}");
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("strike,mc_price,mc_se,net_price,abs_diff\n"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn study_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let config = dir.path().join("study.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"study": "comp-mc-rate", "seed": 31, "n_paths": 150,
                "m_ladder": [4, 16, 64], "out": {:?}}}"#,
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = pidenet()
        .args(["study", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("m,estimate,std_error\n"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn unknown_model_family_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "bad.json", r#"{"family": "nope", "d": 1}"#);
    let out = pidenet()
        .args([
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--x",
            "1.0",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown model family"));
}
