//! Structural classification and spectral gaps of the built-in families.

use specgap::markov::{classify, generate, spectral_summary, ChainFamily, STRUCTURAL_TOL};

fn main() -> specgap::Result<()> {
    let families = [
        ChainFamily::LazyCycle { n: 8 },
        ChainFamily::Complete { n: 6 },
        ChainFamily::Search {
            n: 16,
            marked: true,
        },
        ChainFamily::CyclePermutation { n: 5 },
        ChainFamily::HypercubeLazy { dim: 3 },
        ChainFamily::SinkhornRandom { n: 6, seed: 1 },
        ChainFamily::TwoState { a: 0.1, b: 0.3 },
        ChainFamily::RandomStochastic { n: 6, seed: 2 },
    ];
    println!(
        "{:<18} {:>3} {:>6} {:>6} {:>6} {:>10} {:>10}",
        "family", "N", "DS", "sym", "rev", "gamma", "gamma_s"
    );
    for f in &families {
        let p = generate(f)?;
        let c = classify(&p, STRUCTURAL_TOL);
        let s = spectral_summary(&p);
        let gamma = s
            .spectral_gap()
            .map_or("-".to_string(), |g| format!("{g:.6}"));
        println!(
            "{:<18} {:>3} {:>6} {:>6} {:>6} {:>10} {:>10.6}",
            f.name(),
            p.n(),
            c.doubly_stochastic,
            c.symmetric,
            c.reversible.map_or("-".to_string(), |r| r.to_string()),
            gamma,
            s.singular_gap
        );
    }
    Ok(())
}
