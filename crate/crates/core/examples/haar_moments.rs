//! Second and fourth moments of Haar-random overlaps.

use num_complex::Complex64;
use specgap::ensemble::{moment_check, EnsembleSpec};

fn main() -> specgap::Result<()> {
    for n in [2, 4, 16, 64] {
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        psi[n - 1] = Complex64::new(1.0, 0.0);
        let m = moment_check(&EnsembleSpec::haar(n, 11), &psi, 50_000)?;
        println!(
            "N={n:>3}: m2 {:.5} (1/N {:.5})  m4 {:.6} (2/(N(N+1)) {:.6})  within 3se: {}",
            m.m2,
            m.target_m2,
            m.m4,
            m.target_m4,
            m.within(3.0)
        );
    }
    Ok(())
}
