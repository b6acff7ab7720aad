//! End-to-end runs of the `tsp-dual` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsp-dual"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_square(dir: &Path) -> String {
    let s = 2f64.sqrt();
    let doc = serde_json::json!({
        "n": 4,
        "d": [0.0, 1.0, s, 1.0, 1.0, 0.0, 1.0, s, s, 1.0, 0.0, 1.0, 1.0, s, 1.0, 0.0],
    });
    let path = dir.join("square.json");
    fs::write(&path, doc.to_string()).unwrap();
    path.display().to_string()
}

#[test]
fn malformed_input_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"n\": 4, \"d\": [0, 1,").unwrap();
    let out_dir = dir.path().join("out");
    let o = run(&[
        "formulate",
        "--instance",
        bad.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    let two = dir.path().join("two.json");
    fs::write(&two, "{\"n\": 2, \"d\": [0, 1, 1, 0]}").unwrap();
    let o = run(&[
        "reduce",
        "--instance",
        two.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n >= 3"));

    let o = run(&["formulate", "--n", "2", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    let asym = dir.path().join("asym.json");
    fs::write(&asym, "{\"n\": 3, \"d\": [0, 1, 2, 1, 0, 1, 3, 1, 0]}").unwrap();
    let o = run(&[
        "reduce",
        "--instance",
        asym.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_with_code_2() {
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["dual"])), 2);
}

#[test]
fn formulate_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_square(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "formulate",
        "--instance",
        &inst,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("formulation.json"));
    assert_eq!(summary["command"], "formulate");
    assert_eq!(summary["oracle_length"].as_f64(), Some(4.0));
    assert_eq!(summary["oracle_tour_objective"].as_f64(), Some(4.0));
    assert_eq!(summary["a_symmetric"], true);
    assert_eq!(summary["a_zero_diagonal"], true);
    let a = fs::read_to_string(out.join("A.csv")).unwrap();
    assert_eq!(a.lines().count(), 16);
    assert!(a.lines().all(|l| l.split(',').count() == 16));
    assert_eq!(
        fs::read_to_string(out.join("C.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    assert_eq!(
        fs::read_to_string(out.join("D.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
}

#[test]
fn reduce_shapes_and_reference_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out5 = dir.path().join("n5");
    assert_eq!(
        code(&run(&[
            "reduce",
            "--n",
            "5",
            "--seed",
            "3",
            "--out",
            out5.to_str().unwrap()
        ])),
        0
    );
    let r = read_json(&out5.join("reduced.json"));
    let a_r = r["A_r"].as_array().unwrap();
    assert_eq!(a_r.len(), 16);
    assert!(a_r.iter().all(|row| row.as_array().unwrap().len() == 16));
    let e_r = r["E_r"].as_array().unwrap();
    assert_eq!(e_r.len(), 7);
    assert!(e_r.iter().all(|row| row.as_array().unwrap().len() == 16));
    assert_eq!(r["b_r"].as_array().unwrap().len(), 16);
    assert_eq!(r["c0"].as_f64(), Some(0.0));
    assert!(r.get("reference_match").is_none());

    let out4 = dir.path().join("n4");
    let inst = write_square(dir.path());
    assert_eq!(
        code(&run(&[
            "reduce",
            "--instance",
            &inst,
            "--out",
            out4.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        read_json(&out4.join("reduced.json"))["reference_match"],
        true
    );
}

#[test]
fn dual_reports_a_nonnegative_gap_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&[
            "dual",
            "--n",
            "5",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let gap = read_json(&a.join("gap.json"));
    assert!(gap["record"]["gap"].as_f64().unwrap() >= -1e-8);
    assert_eq!(gap["counterexample"], false);
    assert_eq!(gap["verification"]["verdict"], "NotCritical");
    for file in ["trace.csv", "ascent.json", "gap.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,g,grad_norm,min_eig\n"));
}

#[test]
fn dual_rejects_unknown_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\"gtol\": 1e-6, \"bogus\": 1}").unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "dual",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn experiment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty_cfg = dir.path().join("empty.json");
    fs::write(&empty_cfg, "{\"k\": 0}").unwrap();
    let empty = dir.path().join("empty");
    assert_eq!(
        code(&run(&[
            "experiment",
            "--config",
            empty_cfg.to_str().unwrap(),
            "--out",
            empty.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        fs::read_to_string(empty.join("experiment.csv")).unwrap(),
        "instance_id,n,seed,oracle_optimum,dual_bound,gap,iterations,termination\n"
    );

    let cfg = dir.path().join("ten.json");
    fs::write(&cfg, "{\"k\": 10, \"n\": [4]}").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&[
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = fs::read_to_string(a.join("experiment.csv")).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with("summary_"))
        .collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let gap: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(gap >= -1e-8, "{row}");
    }
    for file in ["experiment.csv", "experiment.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn inverse_with_no_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["inverse", "--restarts", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("inverse_report.json"));
    assert_eq!(report["verdict"], "NoFeasiblePointFound");
    assert!(report["best"].is_null());
}

#[test]
fn inverse_rejects_bad_sizes() {
    let dir = tempfile::tempdir().unwrap();
    for n in [2, 11] {
        let cfg = dir.path().join(format!("n{n}.json"));
        fs::write(&cfg, format!("{{\"n\": {n}}}")).unwrap();
        let out = dir.path().join("out");
        let o = run(&[
            "inverse",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 2);
    }
}
