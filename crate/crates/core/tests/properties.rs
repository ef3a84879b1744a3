use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use specgap::encoding::{
    extract_block, group_encoding, group_permutation, linear_order_encoding,
    linear_order_permutation, szegedy_encoding, GroupSpec, LinearOrderSpec, Permutation,
};
use specgap::ensemble::{moment_check, sample_state, substream, EnsembleSpec};
use specgap::estimator::{bisect, relative_prime_check};
use specgap::filter::{
    dolph_closed_form, dolph_filter, monomial_filter, sign_filter, t_star, verify_filter,
    FilterPolynomial,
};
use specgap::markov::{
    classify, detailed_balance_residual, generate, spectral_summary, stationary_distribution,
    symmetrised_discriminant, ChainFamily, TransitionMatrix, STRUCTURAL_TOL,
};
use specgap::oracle::oracle_singular_values;
use specgap::qsvt::{sv_transform, LedgerEntry, QueryLedger, TransformMode};

fn chain(kind: u8, n: usize, seed: u64) -> TransitionMatrix {
    match kind % 4 {
        0 => generate(&ChainFamily::SinkhornRandom { n, seed }).unwrap(),
        1 => generate(&ChainFamily::RandomSymmetric { n, seed }).unwrap(),
        2 => generate(&ChainFamily::RandomStochastic { n, seed }).unwrap(),
        _ => {
            let map: Vec<usize> = (0..n)
                .map(|i| (i * (2 * (seed as usize % 3) + 1) + seed as usize) % n)
                .collect();
            match Permutation::from_map(map) {
                Ok(p) => TransitionMatrix::new(p.to_dense()).unwrap(),
                Err(_) => generate(&ChainFamily::CyclePermutation { n }).unwrap(),
            }
        }
    }
}

fn is_permutation_matrix(m: &DMatrix<f64>) -> bool {
    let ones = |it: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = it.collect();
        v.iter().filter(|&&x| x == 1.0).count() == 1 && v.iter().all(|&x| x == 0.0 || x == 1.0)
    };
    m.row_iter().all(|r| ones(&mut r.iter().copied()))
        && m.column_iter().all(|c| ones(&mut c.iter().copied()))
}

fn is_doubly_stochastic(m: &DMatrix<f64>) -> bool {
    m.row_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-10)
        && m.column_iter().all(|c| (c.sum() - 1.0).abs() <= 1e-10)
}

fn any_filter(kind: u8, a: f64, b: f64, alpha: f64) -> FilterPolynomial {
    match kind % 3 {
        0 => sign_filter(0.05 + 0.45 * a, 0.2 + 0.6 * b, alpha).unwrap(),
        1 => monomial_filter(0.05 + 0.45 * a, alpha).unwrap(),
        _ => dolph_filter(0.005 + 0.045 * a, 0.6 + 0.3 * b, 0.1).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reversible_chains_satisfy_detailed_balance(n in 2usize..20, seed in any::<u64>(), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        for p in [
            generate(&ChainFamily::RandomSymmetric { n, seed }).unwrap(),
            generate(&ChainFamily::TwoState { a, b }).unwrap(),
            generate(&ChainFamily::LazyCycle { n }).unwrap(),
        ] {
            let pi = stationary_distribution(&p).unwrap();
            prop_assert!(detailed_balance_residual(&p, &pi) <= 1e-10);
        }
    }

    #[test]
    fn class_flags_are_consistent(kind in 0u8..4, n in 2usize..16, seed in any::<u64>()) {
        prop_assert!(classify(&chain(kind, n, seed), STRUCTURAL_TOL).is_consistent());
    }

    #[test]
    fn reversible_eigenvalue_moduli_are_discriminant_singular_values(n in 2usize..16, seed in any::<u64>()) {
        let p = generate(&ChainFamily::RandomSymmetric { n, seed }).unwrap();
        let mut moduli: Vec<f64> = spectral_summary(&p).eigenvalues.iter().map(|(re, im)| re.hypot(*im)).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        let sv = oracle_singular_values(&symmetrised_discriminant(&p));
        for (m, s) in moduli.iter().zip(&sv) {
            prop_assert!((m - s).abs() <= 1e-8, "{m} vs {s}");
        }
    }

    #[test]
    fn gaps_are_nonnegative(kind in 0u8..4, n in 2usize..16, seed in any::<u64>()) {
        let s = spectral_summary(&chain(kind, n, seed));
        prop_assert!(s.singular_gap >= 0.0);
        if let Some(g) = s.spectral_gap {
            prop_assert!(g >= -1e-12);
        }
    }

    #[test]
    fn szegedy_block_is_the_discriminant(kind in 0u8..4, n in 2usize..12, seed in any::<u64>()) {
        let p = chain(kind, n, seed);
        let be = szegedy_encoding(&p).unwrap();
        let diff = (extract_block(&be) - symmetrised_discriminant(&p)).abs().max();
        prop_assert!(diff <= 1e-10);
        prop_assert!(be.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn group_blocks_are_p_and_doubly_stochastic(order in 2usize..17, k in 1usize..5, use_z2 in any::<bool>(), seed in any::<u64>()) {
        let g = if use_z2 { GroupSpec::z2_power(k).unwrap() } else { GroupSpec::cyclic(order).unwrap() };
        let mut rng = substream(seed, 0);
        let w: Vec<f64> = (0..g.order()).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
        let s: f64 = w.iter().sum();
        let mu: Vec<f64> = w.iter().map(|x| x / s).collect();
        let be = group_encoding(&g, &mu).unwrap();
        let block = extract_block(&be);
        let p = generate(&ChainFamily::GroupChain { group: g.clone(), mu }).unwrap();
        prop_assert!((&block - p.matrix()).abs().max() <= 1e-10);
        prop_assert!(is_doubly_stochastic(&block));
        prop_assert!(be.unitarity_residual() <= 1e-10);
        prop_assert!(is_permutation_matrix(&group_permutation(&g, g.order()).unwrap().to_dense()));
    }

    #[test]
    fn linear_order_blocks_are_doubly_stochastic(n in 3usize..16) {
        let spec = LinearOrderSpec::directed_cycle(n).unwrap();
        let be = linear_order_encoding(&spec).unwrap();
        prop_assert!(is_doubly_stochastic(&extract_block(&be)));
        prop_assert!(be.unitarity_residual() <= 1e-10);
        prop_assert!(is_permutation_matrix(&linear_order_permutation(&spec, n).unwrap().to_dense()));
    }

    #[test]
    fn filters_are_bounded(kind in 0u8..3, a in 0.0f64..1.0, b in 0.0f64..1.0, alpha in 0.01f64..0.2) {
        let p = any_filter(kind, a, b, alpha);
        prop_assert!(verify_filter(&p, 2001).sup_ok);
    }

    #[test]
    fn dolph_series_matches_closed_form(a in 0.0f64..1.0, b in 0.0f64..1.0, x in -1.0f64..1.0) {
        let p = dolph_filter(0.005 + 0.045 * a, 0.6 + 0.3 * b, 0.1).unwrap();
        let x0 = p.band().x0();
        prop_assert!((p.eval(x) - dolph_closed_form(p.degree(), x0, x)).abs() <= 1e-10);
    }

    #[test]
    fn transformed_values_are_bounded_and_charged(kind in 0u8..3, a in 0.0f64..1.0, b in 0.0f64..1.0, n in 2usize..10, seed in any::<u64>()) {
        let be = szegedy_encoding(&generate(&ChainFamily::RandomStochastic { n, seed }).unwrap()).unwrap();
        let p = any_filter(kind, a, b, 0.1);
        let ideal = sv_transform(&be, &p, TransformMode::Ideal).unwrap();
        let split = sv_transform(&be, &p, TransformMode::ParitySplit).unwrap();
        prop_assert!(ideal.filtered_values().iter().all(|v| v.abs() <= 1.0 + 1e-9));
        prop_assert_eq!(ideal.queries_per_use(), p.degree() as u64);
        prop_assert_eq!(split.queries_per_use(), 2 * p.degree() as u64);
    }

    #[test]
    fn ledger_reconstructs(entries in prop::collection::vec((1usize..500, 1u64..50, 1u64..10, 1u64..3), 0..20)) {
        let mut ledger = QueryLedger::new();
        for (round, &(d, it, trials, lcu)) in entries.iter().enumerate() {
            ledger.charge(LedgerEntry { round, filter_degree: d, queries_per_use: d as u64 * lcu, qcount_iterations: it, trials, lcu_factor: lcu });
        }
        prop_assert_eq!(ledger.total(), ledger.reconstructed_total());
        prop_assert_eq!(ledger.bisection_rounds(), entries.len());
    }

    #[test]
    fn complement_samples_are_orthogonal(n in 2usize..32, seed in any::<u64>()) {
        let mut rng = substream(seed, 1);
        let raw: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.1..1.0)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let top: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let spec = EnsembleSpec::complement(top.clone(), seed).unwrap();
        for _ in 0..10 {
            let v = sample_state(&spec, &mut rng).unwrap();
            let overlap: Complex64 = top.iter().zip(&v).map(|(a, z)| z * *a).sum();
            prop_assert!(overlap.norm() <= 1e-12);
        }
    }

    #[test]
    fn bisection_shrinks_by_three_quarters(bits in prop::collection::vec(any::<bool>(), 64), eps in 0.05f64..1.0, p_f in 0.001f64..0.5) {
        let (_, trace) = bisect(eps, p_f, 1e-9, |round, _, _, _| Ok(bits[round % bits.len()])).unwrap();
        let mut budget = 0.0;
        for r in &trace {
            let before = r.gamma_max - r.gamma_min;
            let after = r.gamma_max_after - r.gamma_min_after;
            prop_assert!((after - 0.75 * before).abs() <= 1e-12 * before);
            budget += r.p_f_round;
        }
        prop_assert!(budget <= p_f);
        let width = trace.last().map(|r| r.gamma_max_after - r.gamma_min_after).unwrap();
        prop_assert!(trace.len() <= (width.ln() / 0.75f64.ln()).ceil() as usize + 1);
    }

    #[test]
    fn relative_prime_bounds_relative_error(truth in 1e-6f64..1.0, hat in 1e-6f64..1.0, eps in 0.01f64..0.9) {
        if relative_prime_check(hat, truth, eps) {
            prop_assert!((hat - truth).abs() / truth <= eps / (1.0 - eps) + 1e-12);
        }
    }
}

#[test]
fn t_star_rises_toward_one() {
    let values: Vec<f64> = (1..=6)
        .map(|k| t_star(10f64.powi(-k), 0.1, 0.1).unwrap().t_star)
        .collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    assert!(values.iter().all(|&t| t > 0.0 && t < 1.0));
}

#[test]
fn haar_moments_do_not_depend_on_the_probe_direction() {
    let n = 8;
    let mut e1 = vec![Complex64::new(0.0, 0.0); n];
    e1[0] = Complex64::new(1.0, 0.0);
    let random = sample_state(&EnsembleSpec::haar(n, 99), &mut substream(99, 5)).unwrap();
    let a = moment_check(&EnsembleSpec::haar(n, 1), &e1, 40_000).unwrap();
    let b = moment_check(&EnsembleSpec::haar(n, 2), &random, 40_000).unwrap();
    let z2 = (a.m2 - b.m2).abs() / a.se2.hypot(b.se2);
    let z4 = (a.m4 - b.m4).abs() / a.se4.hypot(b.se4);
    assert!(z2 <= 3.0 && z4 <= 3.0, "z2 {z2}, z4 {z4}");
}
