use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lethargy::cli::main_with_args;

fn lethargy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lethargy")).args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn baseline_run_succeeds() {
    let out = lethargy(&["--eps", "power:0.5", "--n-hi", "15", "--grid", "5001"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,m_n,eps_n,floor,"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 16);
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row[0], n.to_string());
        assert_eq!(row[1], (n + 1).to_string());
        assert_eq!(&row[8..], ["true", "true", "true"]);
    }
}

#[test]
fn help_exits_zero() {
    let out = lethargy(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("--eps"));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let rising = dir.path().join("rising.csv");
    fs::write(&rising, "0.1\n0.2\n0.05\n").unwrap();
    let eps = format!("file:{}", rising.display());
    let out = lethargy(&["--eps", &eps, "--n-hi", "2"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("non-increasing"), "{}", stderr(&out));

    let config = dir.path().join("bad.conf");
    fs::write(&config, "eps = power:0.5\nsmoothing = 3\n").unwrap();
    let out = lethargy(&["--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("smoothing"));

    assert_eq!(code(&lethargy(&["--eps", "cubic"])), 1);
    assert_eq!(code(&lethargy(&["--grid", "10"])), 1);
    assert_eq!(code(&lethargy(&["--interval", "1", "0"])), 1);
    assert_eq!(code(&lethargy(&["--n-lo", "4", "--n-hi", "2"])), 1);
    assert_eq!(code(&lethargy(&["--no-such-flag"])), 1);
}

#[test]
fn failed_certification_exits_two() {
    // eps_n = 4^-n falls faster than the envelope can keep ahead of
    let out = lethargy(&["--eps", "geometric:4", "--n-hi", "6", "--grid", "2001"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("verification failed"));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("occupied");
    fs::write(&blocker, "not a directory").unwrap();
    let out = lethargy(&["--n-hi", "3", "--grid", "2001", "--out", blocker.join("run").to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn samples_cover_both_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = lethargy(&[
        "--n-hi",
        "4",
        "--grid",
        "2001",
        "--emit-samples",
        "2",
        "--emit-certs",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let samples = fs::read_to_string(out_dir.join("samples.csv")).unwrap();
    let rows = csv_rows(&samples);
    let ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ts[0], 0.0);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(*ts.last().unwrap(), 1.0);
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    // certificate points are flagged
    assert!(rows.iter().any(|r| r[2] == "1"));

    let certs: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("certificates.json")).unwrap()).unwrap();
    assert_eq!(certs.as_array().unwrap().len(), 5);
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = lethargy(&[
            "--n-hi",
            "8",
            "--grid",
            "3001",
            "--envelope",
            "mollified:0.2",
            "--emit-samples",
            "101",
            "--emit-certs",
            "--emit-envelope",
            "64",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push((out.stdout, snapshot(&out_dir)));
    }
    assert_eq!(outputs[0], outputs[1]);
    let names: Vec<&str> = outputs[0].1.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["certificates.json", "envelope_e.csv", "envelope_p.csv", "report.csv", "report.json", "samples.csv"]
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        "# small run\n[target]\neps = power:1\nn_hi = 9\n\n[solver]\ngrid = 2001\nformat = csv\n",
    )
    .unwrap();
    let out = lethargy(&["--config", config.to_str().unwrap(), "--n-hi", "3", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["eps"], "power:1");
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    assert_eq!(report["rows"][3]["eps_n"].as_f64().unwrap(), 1.0 / 5.0);
}

#[test]
fn geometric_rate_is_summarised() {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let status = main_with_args(
        ["lethargy", "--eps", "geometric:1.05", "--n-hi", "12", "--grid", "2001", "--format", "json"],
        &mut stdout,
        &mut stderr,
    );
    assert_eq!(status, 0, "{}", String::from_utf8_lossy(&stderr));
    let report: serde_json::Value = serde_json::from_slice(&stdout).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert!(rows[0]["floor_root"].is_null());
    let roots: Vec<f64> = rows[5..].iter().map(|r| r["floor_root"].as_f64().unwrap()).collect();
    let min = roots.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(report["min_floor_root_from_5"].as_f64().unwrap(), min);
    assert!(min >= 1.0 / 1.05);
}
