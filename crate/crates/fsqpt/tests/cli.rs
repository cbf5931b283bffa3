//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

fn fsqpt(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fsqpt"));
    c.args(args);
    if let Some(t) = threads {
        c.env("FSQPT_THREADS", t);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn homogeneous_run_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let d = dir.to_str().unwrap();
    let o = fsqpt(&["simulate", "--homogeneous", "--output-dir", d], None);
    assert_eq!(code(&o), 0, "{}", text(&o));

    // 30 waiting times × 16 experiments plus the header.
    let sig = std::fs::read_to_string(dir.join("signals_gamma_2.00.csv")).unwrap();
    let lines: Vec<&str> = sig.lines().collect();
    assert_eq!(lines[0], "T_fs,omega,re,im");
    assert_eq!(lines.len(), 1 + 30 * 16);
    assert!(lines[1].starts_with("1.2000000000000000e2,++++,"));
    for g in ["0.00", "0.50", "1.00", "1.50", "2.00"] {
        assert!(dir.join(format!("pathways_gamma_{g}.csv")).exists());
    }

    let o = fsqpt(&["reconstruct", "--dir", d], None);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let report = std::fs::read_to_string(dir.join("reconstruction_report.txt")).unwrap();
    for line in report.lines().filter(|l| l.contains("max residual")) {
        let v: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!(v <= 1e-8, "{line}");
    }

    let o = fsqpt(&["report", "--dir", d], None);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let summary = text(&o);
    let dev: f64 = summary
        .lines()
        .find(|l| l.starts_with("max pairwise"))
        .unwrap()
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev <= 1e-8, "{summary}");

    let o = fsqpt(&["validate", dir.join("chi_truth.csv").to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let o = fsqpt(&["validate", dir.join("chi_gamma_0.50.csv").to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", text(&o));

    // Same config again, once directly and once through the manifest.
    let again = tmp.path().join("again");
    let o = fsqpt(
        &["simulate", "--homogeneous", "--output-dir", again.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 0);
    let from_manifest = tmp.path().join("manifest");
    let o = fsqpt(
        &[
            "simulate",
            "--config",
            dir.join("manifest.json").to_str().unwrap(),
            "--output-dir",
            from_manifest.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    for f in ["signals_gamma_1.50.csv", "pathways_gamma_0.00.csv", "chi_truth.csv"] {
        assert_eq!(read(&dir.join(f)), read(&again.join(f)), "{f}");
        assert_eq!(read(&dir.join(f)), read(&from_manifest.join(f)), "{f}");
    }
}

#[test]
fn ensemble_output_is_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let dir = tmp.path().join(threads);
        let o = fsqpt(
            &[
                "simulate",
                "--set",
                "ensemble.n_members=300",
                "--set",
                "gammas=[1.0]",
                "--set",
                "noise={\"relative_width\": 0.001, \"intensity_fluctuation\": 0.01}",
                "--output-dir",
                dir.to_str().unwrap(),
            ],
            Some(threads),
        );
        assert_eq!(code(&o), 0, "{}", text(&o));
        files.push((
            read(&dir.join("signals_gamma_1.00.csv")),
            read(&dir.join("chi_truth.csv")),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn corrupted_tensor_fails_validation_at_its_waiting_time() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = fsqpt(
        &[
            "simulate",
            "--homogeneous",
            "--set",
            "gammas=[2]",
            "--output-dir",
            dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let truth = dir.join("chi_truth.csv");
    let body = std::fs::read_to_string(&truth).unwrap();
    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    // Second waiting time, element χ_eeee.
    let k = 1 + 20;
    assert!(lines[k].starts_with("1.4000000000000000e2,e,e,e,e,"));
    let mut cols: Vec<String> = lines[k].split(',').map(String::from).collect();
    cols[5] = "0.5".into();
    lines[k] = cols.join(",");
    std::fs::write(&truth, lines.join("\n") + "\n").unwrap();
    let o = fsqpt(&["validate", truth.to_str().unwrap()], None);
    assert_eq!(code(&o), 1, "{}", text(&o));
    let out = text(&o);
    let bad: Vec<&str> = out.lines().filter(|l| l.contains("FAIL")).collect();
    assert_eq!(bad.len(), 1, "{out}");
    assert!(bad[0].starts_with("140.0") && bad[0].contains("trace"), "{out}");
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // Bad config value: the message names the field.
    let o = fsqpt(
        &[
            "simulate",
            "--set",
            "toolbox.pulse_width_sigma=-3",
            "--output-dir",
            dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 2);
    assert!(text(&o).contains("toolbox.pulse_width_sigma"), "{}", text(&o));
    let o = fsqpt(&["simulate", "--set", "waiting_times_fs=[60]"], None);
    assert_eq!(code(&o), 2);
    assert!(text(&o).contains("waiting_times_fs[0]"), "{}", text(&o));
    let o = fsqpt(&["simulate", "--set", "toolbox.freq_minus=13480"], None);
    assert_eq!(code(&o), 2, "{}", text(&o));

    // Missing signal files.
    let o = fsqpt(&["reconstruct", "--dir", dir.to_str().unwrap()], None);
    assert_eq!(code(&o), 3, "{}", text(&o));
    assert!(text(&o).contains("signals_gamma_"), "{}", text(&o));

    // Missing config file.
    let o = fsqpt(&["simulate", "--config", dir.join("nope.json").to_str().unwrap()], None);
    assert_eq!(code(&o), 3);

    // Empty tensor file is a usage error, a malformed one names its line.
    let p = dir.join("t.csv");
    std::fs::write(&p, "T_fs,n,m,nu,mu,re,im\n").unwrap();
    let o = fsqpt(&["validate", p.to_str().unwrap()], None);
    assert_eq!(code(&o), 2, "{}", text(&o));
    std::fs::write(&p, "T_fs,n,m,nu,mu,re,im\n120,e,e,e,e,1,0\n120,e,e,e,e,zz,0\n").unwrap();
    let o = fsqpt(&["validate", p.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
    assert!(text(&o).contains("t.csv:3:"), "{}", text(&o));

    let o = fsqpt(&["simulate"], Some("zero"));
    assert_eq!(code(&o), 2);
    let o = fsqpt(&["frobnicate"], None);
    assert_eq!(code(&o), 2);
}
