//! Full bisection estimate on a lazy cycle, compared with the exact gap.

use specgap::encoding::szegedy_encoding;
use specgap::estimator::{estimate_gap, relative_prime_check, ThresholdConfig};
use specgap::markov::{generate, ChainFamily};
use specgap::oracle::exact_gaps;

fn main() -> specgap::Result<()> {
    let p = generate(&ChainFamily::LazyCycle { n: 8 })?;
    let truth = exact_gaps(&p).1;
    let be = szegedy_encoding(&p)?;
    let eps = 0.25;
    for seed in 0..5 {
        let est = estimate_gap(
            &be,
            eps,
            0.1,
            &ThresholdConfig {
                seed,
                ..Default::default()
            },
        )?;
        println!(
            "seed {seed}: gamma_hat {:.5} (true {truth:.5}) ok={} rounds={} queries={}",
            est.gamma_hat,
            relative_prime_check(est.gamma_hat, truth, eps),
            est.rounds.len(),
            est.total_queries()
        );
    }
    Ok(())
}
