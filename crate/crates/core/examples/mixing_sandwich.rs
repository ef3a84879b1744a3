//! Exact TV mixing times against the gap-based bounds.

use specgap::markov::{
    generate, mixing_bounds, stationary_distribution, ChainFamily, MixingBoundKind,
};
use specgap::oracle::{exact_gaps, exact_tv_mixing_time};

fn main() -> specgap::Result<()> {
    let eps = 0.01;
    for n in [4, 8, 16, 32] {
        let p = generate(&ChainFamily::LazyCycle { n })?;
        let gamma = exact_gaps(&p).0.expect("lazy cycle is reversible");
        let pi_star = stationary_distribution(&p)?.min_weight();
        let (lo, hi) = mixing_bounds(gamma, eps, MixingBoundKind::Reversible { pi_star })?;
        let tau = exact_tv_mixing_time(&p, eps)?;
        println!("lazy_cycle({n:>2}): {lo:>9.2} <= tau {tau:>5} <= {hi:>9.2}");
    }
    Ok(())
}
