use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::TransitionMatrix;
use crate::encoding::GroupSpec;
use crate::error::{Error, Result};

const SINKHORN_TOL: f64 = 1e-12;
const SINKHORN_MAX_ITERS: usize = 10_000;

/// Named chain constructors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChainFamily {
    /// `I/2 + (S + S^T)/4` on the N-cycle.
    LazyCycle { n: usize },
    /// Simple random walk on the complete graph `K_N` (no self-loops).
    Complete { n: usize },
    /// Unstructured-search instance: `J/N`, with the last row replaced by
    /// the absorbing row `e_N` when `marked`.
    Search { n: usize, marked: bool },
    /// Deterministic directed cycle `i -> i + 1 mod N`.
    CyclePermutation { n: usize },
    /// Walk on `{0,1}^dim` holding with probability `1/(dim+1)` and flipping
    /// each coordinate with probability `1/(dim+1)`.
    HypercubeLazy { dim: usize },
    /// Sinkhorn-balanced doubly-stochastic matrix.
    SinkhornRandom { n: usize, seed: u64 },
    /// `P[g][x g] = mu(x)` over a finite group.
    GroupChain {
        #[serde(skip)]
        group: GroupSpec,
        mu: Vec<f64>,
    },
    /// `[[1-a, a], [b, 1-b]]`.
    TwoState { a: f64, b: f64 },
    /// Rows drawn i.i.d. uniform(0,1) then normalized; generically not
    /// doubly stochastic.
    RandomStochastic { n: usize, seed: u64 },
    /// Symmetric chain from random symmetric weights, padded on the diagonal.
    RandomSymmetric { n: usize, seed: u64 },
}

impl ChainFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ChainFamily::LazyCycle { .. } => "lazy_cycle",
            ChainFamily::Complete { .. } => "complete",
            ChainFamily::Search { .. } => "search",
            ChainFamily::CyclePermutation { .. } => "cycle_permutation",
            ChainFamily::HypercubeLazy { .. } => "hypercube_lazy",
            ChainFamily::SinkhornRandom { .. } => "sinkhorn_random",
            ChainFamily::GroupChain { .. } => "group_chain",
            ChainFamily::TwoState { .. } => "two_state",
            ChainFamily::RandomStochastic { .. } => "random_stochastic",
            ChainFamily::RandomSymmetric { .. } => "random_symmetric",
        }
    }
}

fn need(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::BadParams(msg.into()))
    }
}

pub fn generate(family: &ChainFamily) -> Result<TransitionMatrix> {
    let m = match family {
        ChainFamily::LazyCycle { n } => {
            let n = *n;
            need(n >= 1, "lazy_cycle needs N >= 1")?;
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                m[(i, i)] += 0.5;
                m[(i, (i + 1) % n)] += 0.25;
                m[(i, (i + n - 1) % n)] += 0.25;
            }
            m
        }
        ChainFamily::Complete { n } => {
            let n = *n;
            need(n >= 2, "complete needs N >= 2")?;
            let w = 1.0 / (n - 1) as f64;
            DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w })
        }
        ChainFamily::Search { n, marked } => {
            let n = *n;
            need(n >= 1, "search needs N >= 1")?;
            let w = 1.0 / n as f64;
            let mut m = DMatrix::from_element(n, n, w);
            if *marked {
                m.row_mut(n - 1).fill(0.0);
                m[(n - 1, n - 1)] = 1.0;
            }
            m
        }
        ChainFamily::CyclePermutation { n } => {
            let n = *n;
            need(n >= 1, "cycle_permutation needs N >= 1")?;
            DMatrix::from_fn(n, n, |i, j| if j == (i + 1) % n { 1.0 } else { 0.0 })
        }
        ChainFamily::HypercubeLazy { dim } => {
            let dim = *dim;
            need(dim <= 16, "hypercube dimension too large for dense storage")?;
            let n = 1usize << dim;
            let w = 1.0 / (dim + 1) as f64;
            let mut m = DMatrix::zeros(n, n);
            for x in 0..n {
                m[(x, x)] = w;
                for k in 0..dim {
                    m[(x, x ^ (1 << k))] = w;
                }
            }
            m
        }
        ChainFamily::SinkhornRandom { n, seed } => {
            need(*n >= 1, "sinkhorn_random needs N >= 1")?;
            sinkhorn(*n, *seed)
        }
        ChainFamily::GroupChain { group, mu } => return group_chain(group, mu),
        ChainFamily::TwoState { a, b } => {
            let ok = |x: f64| (0.0..=1.0).contains(&x);
            need(ok(*a) && ok(*b), "two_state needs a, b in [0, 1]")?;
            DMatrix::from_row_slice(2, 2, &[1.0 - a, *a, *b, 1.0 - b])
        }
        ChainFamily::RandomStochastic { n, seed } => {
            need(*n >= 1, "random_stochastic needs N >= 1")?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut m = DMatrix::from_fn(*n, *n, |_, _| rng.gen_range(0.0..1.0));
            for mut row in m.row_iter_mut() {
                let s = row.sum();
                row /= s;
            }
            m
        }
        ChainFamily::RandomSymmetric { n, seed } => {
            need(*n >= 1, "random_symmetric needs N >= 1")?;
            random_symmetric(*n, *seed)
        }
    };
    TransitionMatrix::new(m)
}

fn sinkhorn(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(0.1..1.0));
    for _ in 0..SINKHORN_MAX_ITERS {
        for mut row in m.row_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        for mut col in m.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        let worst_row = m
            .row_iter()
            .map(|r| (r.sum() - 1.0f64).abs())
            .fold(0.0, f64::max);
        if worst_row < SINKHORN_TOL {
            break;
        }
    }
    // finish on a row pass so the result validates as row-stochastic
    for mut row in m.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    m
}

fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let x: f64 = rng.gen_range(0.0..1.0);
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let max_row = w.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let scale = if max_row > 0.0 {
        1.0 / (max_row * rng.gen_range(1.0..2.0))
    } else {
        0.0
    };
    let mut m = w * scale;
    for i in 0..n {
        let off: f64 = m.row(i).sum();
        m[(i, i)] = 1.0 - off;
    }
    m
}

fn group_chain(group: &GroupSpec, mu: &[f64]) -> Result<TransitionMatrix> {
    let n = group.order();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu.len(),
        });
    }
    crate::markov::Distribution::new(mu.to_vec())?;
    let mut m = DMatrix::zeros(n, n);
    for g in 0..n {
        for x in 0..n {
            m[(g, group.mul(x, g))] += mu[x];
        }
    }
    TransitionMatrix::new(m)
}
