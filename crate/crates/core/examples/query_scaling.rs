//! Ledger totals of the estimator on marked search as N grows, with the
//! log-log slope. Pass a list of sizes to override the default.

use specgap::estimator::ThresholdConfig;
use specgap::markov::ChainFamily;
use specgap::sweep::{estimate_sweep, log_log_slope, EstimateSweep};

fn main() -> specgap::Result<()> {
    let ns: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let ns = if ns.is_empty() {
        vec![8, 16, 32, 64]
    } else {
        ns
    };
    let sweep = EstimateSweep {
        ns,
        reps: 3,
        eps_gamma: 0.25,
        p_f: 0.1,
        seed: 1,
        config: ThresholdConfig::default(),
    };
    let rows = estimate_sweep(|n| ChainFamily::Search { n, marked: true }, &sweep)?;
    for r in &rows {
        println!(
            "N={:>4} rep {} queries {:>12} rounds {:>3} ok={}",
            r.n, r.rep, r.queries, r.rounds, r.success
        );
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n as f64, r.queries as f64))
        .collect();
    println!("slope of ln(queries) vs ln N: {:.3}", log_log_slope(&pts));
    Ok(())
}
