//! The three unscaled block encodings, checked against their targets.

use specgap::encoding::{
    group_encoding, linear_order_encoding, szegedy_encoding, verify_encoding, GroupSpec,
    LinearOrderSpec, ENCODING_TOL,
};
use specgap::markov::{generate, symmetrised_discriminant, ChainFamily};

fn main() -> specgap::Result<()> {
    let p = generate(&ChainFamily::RandomStochastic { n: 6, seed: 7 })?;
    let be = szegedy_encoding(&p)?;
    let check = verify_encoding(&be, &symmetrised_discriminant(&p), ENCODING_TOL)?;
    println!(
        "szegedy       dim {:>4}  block {:.2e}  unitarity {:.2e}",
        be.dim(),
        check.residual,
        be.unitarity_residual()
    );

    let group = GroupSpec::z2_power(3)?;
    let mu = [0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05];
    let be = group_encoding(&group, &mu)?;
    let target = generate(&ChainFamily::GroupChain {
        group,
        mu: mu.to_vec(),
    })?;
    let check = verify_encoding(&be, target.matrix(), ENCODING_TOL)?;
    println!(
        "group Z2^3    dim {:>4}  block {:.2e}  unitarity {:.2e}",
        be.dim(),
        check.residual,
        be.unitarity_residual()
    );

    let spec = LinearOrderSpec::directed_cycle(7)?;
    let be = linear_order_encoding(&spec)?;
    let check = verify_encoding(&be, spec.to_transition_matrix()?.matrix(), ENCODING_TOL)?;
    println!(
        "linear order  dim {:>4}  block {:.2e}  unitarity {:.2e}",
        be.dim(),
        check.residual,
        be.unitarity_residual()
    );
    Ok(())
}
