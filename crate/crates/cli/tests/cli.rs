use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn uhqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uhqkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn rates_2uh_headline() {
    let out = uhqkd(&[
        "rates-2uh",
        "--n",
        "3100",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-80",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["k"], 1356);
    assert_eq!(v["out"], 388);
    assert_eq!(v["seed"], 0x5eed_2017u64);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["schema"], "uhqkd.rates-2uh.v1");
}

#[test]
fn rates_2uh_infeasible_exit_2() {
    let out = uhqkd(&[
        "rates-2uh",
        "--n",
        "100",
        "--delta",
        "0.25",
        "--epsilon",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["feasible"], false);
    assert!(v["reason"].as_str().unwrap().contains("not positive"));
}

#[test]
fn rates_2uh_csv_is_header_plus_row() {
    let out = uhqkd(&[
        "rates-2uh",
        "--n",
        "3100",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-80",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), row.len());
    let k = header.iter().position(|h| *h == "k").unwrap();
    assert_eq!(row[k], "1356");
}

#[test]
fn min_blocksize_flag() {
    let out = uhqkd(&[
        "rates-2uh",
        "--n",
        "3100",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-6",
        "--target-bits",
        "6",
        "--rounding",
        "rate_direct",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["min_blocksize"]["n"], 204);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec![
            "rates-2uh",
            "--n",
            "10",
            "--delta",
            "0.1",
            "--epsilon",
            "1e-3",
            "--frobnicate",
        ],
        vec![
            "rates-2uh",
            "--n",
            "ten",
            "--delta",
            "0.1",
            "--epsilon",
            "1e-3",
        ],
        vec![
            "rates-2uh",
            "--n",
            "10",
            "--delta",
            "0.7",
            "--epsilon",
            "1e-3",
        ],
        vec![
            "rates-2uh",
            "--n",
            "10",
            "--delta",
            "0.1",
            "--epsilon",
            "1e-3",
            "--rounding",
            "up",
        ],
        vec![
            "compare",
            "--delta",
            "0.0451",
            "--epsilon",
            "1e-6",
            "--grid",
            "",
        ],
        vec![
            "simulate",
            "--n",
            "8",
            "--k",
            "3",
            "--r",
            "1",
            "--eve",
            "fixed:alpha=1",
        ],
        vec!["nonsense"],
        vec![],
    ] {
        let out = uhqkd(&args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(uhqkd(&["--help"]).status.code(), Some(0));
    let v = uhqkd(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn compare_is_deterministic_and_sandwiched() {
    let args = [
        "compare",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-6",
        "--grid",
        "log:1e3:1e5:3",
        "--format",
        "csv",
    ];
    let a = uhqkd(&args);
    let b = uhqkd(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# uhqkd "));
    assert_eq!(lines.next().unwrap(), uhqkd::rates::CSV_HEADER);
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1][5] > w[0][5] && w[1][7] >= w[0][7]);
    }
    for r in &rows {
        assert!(r[7] <= r[8]);
    }

    let json_out = uhqkd(&[
        "compare",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-6",
        "--grid",
        "3100",
    ]);
    assert_eq!(json(&json_out)["sampling_below_bound"], true);
    assert_eq!(json(&json_out)["rows"][0]["tuh_k"], 864);
}

#[test]
fn single_point_compare_matches_rates() {
    let c = json(&uhqkd(&[
        "compare",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-6",
        "--grid",
        "3100",
    ]));
    let t = json(&uhqkd(&[
        "rates-2uh",
        "--n",
        "3100",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-6",
    ]));
    let s = json(&uhqkd(&[
        "rates-sampling",
        "--n",
        "3100",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-6",
    ]));
    let row = &c["rows"][0];
    assert_eq!(row["tuh_out"], t["out"]);
    assert_eq!(row["samp_out"], s["n_out"]);
    assert_eq!(row["bound_rate"], s["bound"]["rate"]);
}

#[test]
fn simulate_benign_batch() {
    let out = uhqkd(&[
        "simulate", "--n", "256", "--k", "100", "--r", "8", "--eve", "none", "--trials", "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["accepts"], 1000);
    assert_eq!(v["mismatches"], 0);
    assert_eq!(v["schema"], "uhqkd.run-summary.v1");
}

#[test]
fn simulate_statevector_relations_and_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let tdir = dir.path().join("runs");
    let out = uhqkd(&[
        "simulate",
        "--backend",
        "statevector",
        "--n",
        "3",
        "--k",
        "1",
        "--r",
        "1",
        "--eve",
        "fixed:alpha=100,beta=000",
        "--trials",
        "200",
        "--transcripts",
        tdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["offset_relations_hold"], true);
    assert_eq!(v["accepts"], 200);
    let files = fs::read_dir(&tdir).unwrap().count();
    assert_eq!(files, 200);
    let first = fs::read_to_string(tdir.join("run-000.txt")).unwrap();
    let rec = uhqkd::protocol::parse_transcript(&first).unwrap();
    assert_eq!(rec.pattern.alpha.to_string(), "100");
}

#[test]
fn simulate_statevector_too_large_exit_2() {
    let out = uhqkd(&[
        "simulate",
        "--backend",
        "statevector",
        "--n",
        "6",
        "--k",
        "2",
        "--r",
        "1",
        "--trials",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"], "resource");
}

#[test]
fn simulate_same_seed_same_summary() {
    let run = |seed: &str| {
        let mut v = json(&uhqkd(&[
            "simulate", "--n", "64", "--k", "24", "--r", "2", "--eve", "iid:0.02", "--trials",
            "300", "--seed", seed,
        ]));
        v.as_object_mut().unwrap().remove("wallclock_ms");
        v
    };
    assert_eq!(run("7"), run("7"));
    assert_eq!(run("0x10"), run("16"));
    assert_ne!(run("7")["accepts"], Value::Null);
}

#[test]
fn simulate_with_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l.txt");
    fs::write(&path, "10000\n01000\n00100\n00010\n00001\n").unwrap();
    let out = uhqkd(&[
        "simulate",
        "--n",
        "5",
        "--k",
        "2",
        "--r",
        "1",
        "--eve",
        "iid:0.1",
        "--trials",
        "100",
        "--matrix-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["fixed_matrix"], true);
    assert_eq!(v["offset_relations_hold"], true);

    fs::write(&path, "11\n11\n").unwrap();
    let bad = uhqkd(&[
        "simulate",
        "--n",
        "5",
        "--k",
        "2",
        "--r",
        "1",
        "--matrix-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = uhqkd(&[
        "rates-2uh",
        "--n",
        "3100",
        "--delta",
        "0.0451",
        "--epsilon",
        "1e-80",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["out"], 388);
}

#[test]
fn selftest_suite_filter() {
    let out = uhqkd(&["selftest", "--suite", "hashball"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "hashball");
    assert!(suites[0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "f-vs-g-exhaustive-n4-k3-r1"));
}

#[test]
fn selftest_full_passes() {
    let out = uhqkd(&["selftest"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["suites"].as_array().unwrap().len(), 5);
    assert!(v["failed_suites"].as_array().unwrap().is_empty());
}

#[test]
fn selftest_negative_control() {
    let out = uhqkd(&["selftest", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(v["failed_suites"]
        .as_array()
        .unwrap()
        .contains(&Value::from("hashball")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hashball"));
}
