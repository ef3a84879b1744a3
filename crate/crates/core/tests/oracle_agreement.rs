use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specgap::encoding::szegedy_encoding;
use specgap::ensemble::{sample_state, substream, EnsembleSpec};
use specgap::estimator::{estimate_gap, relative_prime_check, singular_threshold, ThresholdConfig};
use specgap::filter::{dolph_filter_with, sign_filter, DolphParams};
use specgap::markov::{
    generate, spectral_summary, stationary_distribution, ChainFamily, TransitionMatrix,
};
use specgap::oracle::{
    brute_force_weight, brute_force_weight_parity, exact_gaps, oracle_report, oracle_stationary,
};
use specgap::qsvt::{sv_transform, transformed_weight, TransformMode};

fn random_chain(k: usize, rng: &mut ChaCha8Rng) -> TransitionMatrix {
    let n = rng.gen_range(2..=20);
    let seed = rng.gen();
    match k % 5 {
        0 => generate(&ChainFamily::SinkhornRandom { n, seed }).unwrap(),
        1 => generate(&ChainFamily::RandomSymmetric { n, seed }).unwrap(),
        2 => generate(&ChainFamily::RandomStochastic { n, seed }).unwrap(),
        3 => generate(&ChainFamily::TwoState {
            a: rng.gen_range(0.01..1.0),
            b: rng.gen_range(0.01..1.0),
        })
        .unwrap(),
        _ => {
            // reversible but not symmetric: a birth-death chain
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                let up = if i + 1 < n {
                    rng.gen_range(0.05..0.45)
                } else {
                    0.0
                };
                let down = if i > 0 {
                    rng.gen_range(0.05..0.45)
                } else {
                    0.0
                };
                if i + 1 < n {
                    m[(i, i + 1)] = up;
                }
                if i > 0 {
                    m[(i, i - 1)] = down;
                }
                m[(i, i)] = 1.0 - up - down;
            }
            TransitionMatrix::new(m).unwrap()
        }
    }
}

#[test]
fn gaps_agree_with_the_oracle_on_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut reversible_seen = 0;
    for k in 0..100 {
        let p = random_chain(k, &mut rng);
        let summary = spectral_summary(&p);
        let (gamma, gamma_s) = exact_gaps(&p);
        assert!(
            (summary.singular_gap - gamma_s).abs() <= 1e-8,
            "chain {k}: {} vs {gamma_s}",
            summary.singular_gap
        );
        if let Some(g) = gamma {
            reversible_seen += 1;
            let main = summary
                .spectral_gap
                .expect("reversible chains have a real spectrum");
            assert!((main - g).abs() <= 1e-8, "chain {k}: {main} vs {g}");
        }
    }
    assert!(reversible_seen >= 60);
}

#[test]
fn stationary_distributions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for k in 0..50 {
        let p = random_chain(k, &mut rng);
        let main = stationary_distribution(&p).unwrap();
        let oracle = oracle_stationary(&p).unwrap();
        for (a, b) in main.weights().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn oracle_report_matches_spectral_summary() {
    let p = generate(&ChainFamily::LazyCycle { n: 8 }).unwrap();
    let report = oracle_report(&p, 0.01);
    let summary = spectral_summary(&p);
    for (a, b) in report.singular_values.iter().zip(&summary.singular_values) {
        assert!((a - b).abs() <= 1e-8);
    }
    let expected = (1.0 - (std::f64::consts::PI / 4.0).cos()) / 2.0;
    assert!((report.gamma.unwrap() - expected).abs() <= 1e-12);
    assert!((report.gamma_s - expected).abs() <= 1e-12);
}

#[test]
fn weights_match_brute_force_on_general_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for k in 0..30u64 {
        let p = random_chain(k as usize, &mut rng);
        let be = szegedy_encoding(&p).unwrap();
        let filter = sign_filter(rng.gen_range(0.05..0.5), rng.gen_range(0.2..0.8), 0.1).unwrap();
        let phi = sample_state(&EnsembleSpec::haar(p.n(), k), &mut substream(102, k)).unwrap();
        let te = sv_transform(&be, &filter, TransformMode::Ideal).unwrap();
        let main = transformed_weight(&te, &phi).unwrap();
        assert!((main - brute_force_weight(&be, &filter, &phi).unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn parity_split_weight_matches_explicit_assembly_on_marked_search() {
    let be = szegedy_encoding(
        &generate(&ChainFamily::Search {
            n: 16,
            marked: true,
        })
        .unwrap(),
    )
    .unwrap();
    let filter = dolph_filter_with(
        0.2,
        0.6,
        0.1,
        &DolphParams {
            delta_star: 0.25,
            ..Default::default()
        },
    )
    .unwrap();
    let te = sv_transform(&be, &filter, TransformMode::ParitySplit).unwrap();
    for k in 0..20 {
        let phi = sample_state(&EnsembleSpec::haar(16, k), &mut substream(103, k)).unwrap();
        let main = transformed_weight(&te, &phi).unwrap();
        let brute = brute_force_weight_parity(&be, &filter, &phi).unwrap();
        assert!((main - brute).abs() <= 1e-8, "{main} vs {brute}");
    }
}

#[test]
fn rank_one_chain_never_crosses_the_threshold() {
    let be = szegedy_encoding(
        &generate(&ChainFamily::Search {
            n: 8,
            marked: false,
        })
        .unwrap(),
    )
    .unwrap();
    // eps = L/2 with L + eps < 1 keeps sigma = 0 inside the stop band
    for (k, l) in [0.05, 0.1, 0.3, 0.5, 0.6].iter().enumerate() {
        let cfg = ThresholdConfig {
            seed: k as u64,
            ..Default::default()
        };
        let (out, _) = singular_threshold(&be, *l, l / 2.0, 0.1, &cfg).unwrap();
        assert!(!out.bit);
    }
}

#[test]
fn marked_search_fires_above_its_gap() {
    let n = 16;
    let be =
        szegedy_encoding(&generate(&ChainFamily::Search { n, marked: true }).unwrap()).unwrap();
    let l = 1.5 / n as f64;
    let p_f = 0.1;
    let fired = (0..50u64)
        .filter(|&seed| {
            singular_threshold(
                &be,
                l,
                l / 2.0,
                p_f,
                &ThresholdConfig {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap()
            .0
            .bit
        })
        .count();
    assert!(fired as f64 >= (1.0 - p_f) * 50.0, "fired {fired}/50");
}

#[test]
fn rank_one_chain_estimates_a_unit_gap() {
    let p = generate(&ChainFamily::Search {
        n: 8,
        marked: false,
    })
    .unwrap();
    let truth = exact_gaps(&p).1;
    assert!((truth - 1.0).abs() <= 1e-12);
    let est = estimate_gap(
        &szegedy_encoding(&p).unwrap(),
        0.25,
        0.1,
        &ThresholdConfig::default(),
    )
    .unwrap();
    assert!(
        relative_prime_check(est.gamma_hat, truth, 0.25),
        "gamma_hat {}",
        est.gamma_hat
    );
}
