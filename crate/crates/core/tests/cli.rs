use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn physector(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_physector"))
        .args(args)
        .output()
        .expect("spawn physector")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn sector(v: &Value) -> Vec<u64> {
    v["report"]["extracted_sector"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

fn write_identity(dir: &Path, d: usize) -> std::path::PathBuf {
    let rows: Vec<String> = (0..d)
        .map(|j| {
            (0..d)
                .map(|l| if j == l { "1" } else { "0" })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let p = dir.join("identity.csv");
    std::fs::write(&p, rows.join("\n") + "\n").unwrap();
    p
}

fn write_counts(dir: &Path, name: &str, counts: &[i64], n: u64) -> std::path::PathBuf {
    let p = dir.join(name);
    let body = serde_json::json!({ "n_events": n, "counts": counts });
    std::fs::write(&p, body.to_string()).unwrap();
    p
}

#[test]
fn demo_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = physector(&[
            "demo",
            "hybrid-qutrit",
            "--seed",
            "3",
            "--out-dir",
            path(out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    for file in ["report.json", "report.csv", "report_default_order.csv"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    assert_eq!(sector(&report(&a)), vec![0, 1, 2]);
}

#[test]
fn demo_ququart_exhausts_fov() {
    let dir = tempfile::tempdir().unwrap();
    let o = physector(&["demo", "hybrid-ququart", "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    let r = report(dir.path());
    assert_eq!(r["report"]["status"], "fov-exhausted");
    assert_eq!(r["report"]["d_phys"], 4);
}

#[test]
fn unknown_demo_is_a_usage_error() {
    assert_eq!(physector(&["demo", "squeezed"]).status.code(), Some(2));
    assert_eq!(physector(&["bogus"]).status.code(), Some(2));
}

#[test]
fn extract_cat_counts_on_identity() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_identity(dir.path(), 30);
    let mut counts = vec![0i64; 30];
    counts[0] = 992_200;
    counts[2] = 7_800;
    let c = write_counts(dir.path(), "counts.json", &counts, 1_000_000);
    let out = dir.path().join("out");
    let o = physector(&[
        "extract",
        "--measurement",
        path(&m),
        "--counts",
        path(&c),
        "--alpha",
        "0.05",
        "--out-dir",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(sector(&report(&out)), vec![0, 2]);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("k,subspace_levels,mean_b_sub,std_b_sub,mean_w,mean_variance\n"));
    assert!(out.join("report_default_order.csv").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("{0, 2}"), "{stdout}");
}

#[test]
fn extract_vacuum_counts() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_identity(dir.path(), 5);
    let c = write_counts(dir.path(), "counts.json", &[1000, 0, 0, 0, 0], 1000);
    let out = dir.path().join("out");
    let o = physector(&[
        "extract",
        "--measurement",
        path(&m),
        "--counts",
        path(&c),
        "--out-dir",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(sector(&report(&out)), vec![0]);
}

#[test]
fn extract_rejects_negative_counts() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_identity(dir.path(), 3);
    let c = write_counts(dir.path(), "counts.json", &[10, -1, 0], 10);
    let o = physector(&[
        "extract",
        "--measurement",
        path(&m),
        "--counts",
        path(&c),
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_rejects_fov_beyond_rank() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "0.5,0.5,0.5\n0.5,0.5,0.5\n").unwrap();
    let c = write_counts(dir.path(), "counts.json", &[5, 5], 10);
    let o = physector(&[
        "extract",
        "--measurement",
        path(&m),
        "--counts",
        path(&c),
        "--fov-dim",
        "3",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn simulate_is_deterministic_and_sums_to_n() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = physector(&[
            "simulate",
            "--state",
            "mixture:4=0.25,9=0.5,23=0.25",
            "--measurement",
            "random:40",
            "--fov-dim",
            "30",
            "--n-events",
            "1e6",
            "--seed",
            "11",
            "--out-dir",
            path(&out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        files.push(std::fs::read(out.join("counts.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let v: Value = serde_json::from_slice(&files[0]).unwrap();
    let total: u64 = v["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .sum();
    assert_eq!(total, 1_000_000);
    assert_eq!(v["n_events"], 1_000_000);
    assert_eq!(v["seed"], 11);
}

#[test]
fn simulate_then_extract_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = physector(&[
        "simulate",
        "--state",
        "mixture:1=0.5,3=0.5",
        "--measurement",
        "random:12",
        "--fov-dim",
        "6",
        "--n-events",
        "1e7",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = dir.path().join("out");
    let o = physector(&[
        "extract",
        "--measurement",
        path(&dir.path().join("measurement.json")),
        "--counts",
        path(&dir.path().join("counts.json")),
        "--out-dir",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(sector(&report(&out)), vec![1, 3]);
}

#[test]
fn campaign_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.json");
    let body = serde_json::json!({
        "state": { "kind": "mixture", "components": [[0, 0.5], [2, 0.5]] },
        "fov_dim": 5,
        "n_sets": 10,
        "outcomes": 10,
        "n_events": 1_000_000,
        "alpha": 0.05,
        "seed": 2
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let out = dir.path().join("out");
    let o = physector(&["campaign", "--config", path(&cfg), "--out-dir", path(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(sector(&report(&out)), vec![0, 2]);

    std::fs::write(&cfg, r#"{"state": {"kind": "cat"}, "bogus": 1}"#).unwrap();
    let o = physector(&["campaign", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}
