//! One thresholding call on either side of the singular gap of a marked
//! search chain.

use specgap::encoding::szegedy_encoding;
use specgap::estimator::{singular_threshold, ThresholdConfig};
use specgap::markov::{generate, ChainFamily};

fn main() -> specgap::Result<()> {
    let n = 16;
    let be = szegedy_encoding(&generate(&ChainFamily::Search { n, marked: true })?)?;
    let cfg = ThresholdConfig {
        seed: 5,
        ..Default::default()
    };
    // gap is 1/16; the first threshold sits above it, the second below
    for (l, eps) in [(0.2, 0.1), (0.02, 0.01)] {
        let (out, ledger) = singular_threshold(&be, l, eps, 0.05, &cfg)?;
        println!(
            "L={l:<5} eps={eps:<5} bit={} filter={:?} degree={} trials={} queries={}",
            out.bit,
            out.filter_kind,
            out.filter_degree,
            out.trials,
            ledger.total()
        );
    }
    Ok(())
}
