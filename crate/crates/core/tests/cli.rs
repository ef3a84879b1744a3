use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use specgap::encoding::{GroupSpec, LinearOrderSpec};
use specgap::filter::FilterPolynomial;

fn specgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specgap"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn estimate_lands_near_the_lazy_cycle_gap() {
    let out = specgap(&[
        "estimate",
        "--family",
        "lazy_cycle",
        "--n",
        "8",
        "--eps",
        "0.25",
        "--pf",
        "0.1",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let hat = report["gamma_hat"].as_f64().unwrap();
    assert!(
        (1.0 - 0.25) * hat <= 0.1464466 && 0.1464466 <= 1.25 * hat,
        "gamma_hat {hat}"
    );
    assert_eq!(report["succeeded"], Value::Bool(true));
    // defaults are part of the embedded configuration
    assert_eq!(
        report["config"]["estimator"]["c_tilde_l"].as_f64(),
        Some(0.125)
    );
    assert_eq!(report["resolved"]["kappa"].as_f64(), Some(2.0));
    assert_eq!(
        report["rounds"].as_array().unwrap().len(),
        report["filter_kinds"].as_array().unwrap().len()
    );
    let ledger_total: u64 = report["ledger"]["breakdown"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| {
            [
                "queries_per_use",
                "qcount_iterations",
                "trials",
                "lcu_factor",
            ]
            .iter()
            .map(|k| x[*k].as_u64().unwrap())
            .product::<u64>()
        })
        .sum();
    assert_eq!(ledger_total, report["total_queries"].as_u64().unwrap());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "estimate", "--family", "search", "--n", "16", "--marked", "--eps", "0.5", "--seed", "4",
    ];
    assert_eq!(specgap(&args).stdout, specgap(&args).stdout);
    let sweep = [
        "sweep",
        "--family",
        "lazy_cycle",
        "--ns",
        "4,8",
        "--reps",
        "3",
        "--eps",
        "0.5",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_specgap"))
        .args(sweep)
        .env("SPECGAP_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_specgap"))
        .args(sweep)
        .env("SPECGAP_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let csv = String::from_utf8(one.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn encode_check_on_marked_search() {
    let out = specgap(&[
        "encode-check",
        "--family",
        "search",
        "--n",
        "16",
        "--marked",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["block_residual"].as_f64().unwrap() <= 1e-10);
    assert!(report["unitarity_residual"].as_f64().unwrap() <= 1e-10);
    // an impossible tolerance is a validation failure
    let strict = specgap(&[
        "encode-check",
        "--family",
        "random_stochastic",
        "--n",
        "5",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn filter_plot_has_2001_points() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("out.csv");
    let export = dir.path().join("filter.txt");
    let out = specgap(&[
        "filter",
        "--kind",
        "dolph",
        "--delta",
        "0.01",
        "--t",
        "0.6",
        "--alpha",
        "0.1",
        "--plot",
        path(&plot),
        "--export",
        path(&export),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&plot).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2001);
    let last: Vec<f64> = rows[2000].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 0.5).abs() <= 1e-12);
    let p = FilterPolynomial::from_text(&std::fs::read_to_string(&export).unwrap()).unwrap();
    assert_eq!(p.degree() as u64, json(&out)["degree"].as_u64().unwrap());
    assert!((p.eval(1.0) - 0.5).abs() <= 1e-12);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(specgap(&["sweep", "--ns", ""]).status.code(), Some(1));
    assert_eq!(specgap(&["sweep"]).status.code(), Some(1));
    assert_eq!(specgap(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        specgap(&[
            "estimate",
            "--family",
            "lazy_cycle",
            "--n",
            "8",
            "--eps",
            "0.25",
            "--pf",
            "1.5"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        specgap(&["filter", "--kind", "sign", "--delta", "0", "--alpha", "0.1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(specgap(&["--help"]).status.code(), Some(0));
}

#[test]
fn matrix_files_round_trip_and_raw_mode_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.txt");
    let out = specgap(&[
        "gen",
        "--family",
        "two_state",
        "--a",
        "0.5",
        "--b",
        "0.25",
        "--out",
        path(&file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&specgap(&["classify", "--matrix", path(&file)]));
    assert_eq!(report["class"]["reversible"], Value::Bool(true));
    assert_eq!(report["class"]["doubly_stochastic"], Value::Bool(false));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2\n0.5 0.6\n0.5 0.5\n").unwrap();
    assert_eq!(
        specgap(&["classify", "--matrix", path(&bad)]).status.code(),
        Some(2)
    );
    let raw = specgap(&["classify", "--matrix", path(&bad), "--raw"]);
    assert_eq!(raw.status.code(), Some(2));
    assert_eq!(json(&raw)["stochastic"], Value::Bool(false));
}

#[test]
fn group_and_order_files_drive_their_encodings() {
    let dir = tempfile::tempdir().unwrap();
    let group = dir.path().join("z3.txt");
    std::fs::write(&group, GroupSpec::cyclic(3).unwrap().format()).unwrap();
    let out = specgap(&["encode-check", "--group", path(&group), "--mu", "0,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["kind"], Value::String("group".into()));

    let preset = specgap(&[
        "encode-check",
        "--group-preset",
        "z2:3",
        "--mu",
        "0.25,0.25,0.25,0,0.25,0,0,0",
    ]);
    assert_eq!(preset.status.code(), Some(0));

    let order = dir.path().join("cycle.txt");
    std::fs::write(&order, LinearOrderSpec::directed_cycle(5).unwrap().format()).unwrap();
    let out = specgap(&["encode-check", "--order", path(&order)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["block_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn oracle_moments_threshold_and_degree_sweep() {
    let oracle = json(&specgap(&[
        "oracle",
        "--family",
        "lazy_cycle",
        "--n",
        "8",
        "--tv-eps",
        "0.01",
    ]));
    assert_eq!(oracle["report"]["tv_mixing_time"].as_u64(), Some(26));

    let moments = specgap(&["moments", "--n", "16", "--trials", "20000", "--seed", "3"]);
    assert_eq!(moments.status.code(), Some(0));
    assert_eq!(
        json(&moments)["estimate"]["target_m2"].as_f64(),
        Some(1.0 / 16.0)
    );

    let threshold = json(&specgap(&[
        "threshold",
        "--family",
        "search",
        "--n",
        "16",
        "--marked",
        "--l",
        "0.09375",
        "--eps",
        "0.046875",
    ]));
    assert_eq!(threshold["outcome"]["bit"], Value::Bool(true));

    let degrees = specgap(&["sweep", "--kind", "degrees", "--deltas", "0.01,0.001"]);
    assert_eq!(degrees.status.code(), Some(0));
    let csv = String::from_utf8(degrees.stdout).unwrap();
    let dolph: Vec<u64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(dolph, vec![19, 59]);
}

#[test]
fn library_entry_point_matches_the_binary() {
    assert_eq!(specgap::cli::run(["specgap", "sweep", "--ns", ""]), 1);
    assert_eq!(
        specgap::cli::run([
            "specgap",
            "encode-check",
            "--family",
            "lazy_cycle",
            "--n",
            "4"
        ]),
        0
    );
}
