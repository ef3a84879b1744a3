//! Finite Markov chains: validation, classification, discriminants, gaps and
//! mixing-time bounds.
//!
//! Row `i` of a transition matrix holds the one-step probabilities out of
//! state `i`. Distributions are row vectors, so stationarity reads `pi P = pi`.

mod families;
pub mod io;

pub use families::{generate, ChainFamily};

use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for structural checks (row sums, detailed balance, symmetry).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for comparisons that go through an eigen or singular value solver.
pub const SPECTRAL_TOL: f64 = 1e-8;

const SCHUR_MAX_ITERS: usize = 10_000;
/// Base of the logarithm in the mixing-time bounds (natural log).
pub const MIXING_LOG_BASE: f64 = std::f64::consts::E;

/// A validated row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
}

impl TransitionMatrix {
    /// Validates `raw` as a row-stochastic matrix.
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(&raw)?;
        Ok(Self { p: raw })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// Strongly connected support digraph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let w = if forward {
                        self.p[(u, v)]
                    } else {
                        self.p[(v, u)]
                    };
                    if w > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Period of the support digraph as seen from state 0: the gcd of
    /// `level(u) + 1 - level(v)` over every edge reachable from state 0.
    pub fn period(&self) -> usize {
        let n = self.n();
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if self.p[(u, v)] <= 0.0 {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    let diff = (level[u] + 1).abs_diff(level[v]);
                    g = gcd(g, diff);
                }
            }
        }
        g
    }

    /// Irreducible and aperiodic.
    pub fn is_ergodic(&self) -> bool {
        self.is_irreducible() && self.period() == 1
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Checks that `raw` is square, non-negative, and row-stochastic within
/// [`STRUCTURAL_TOL`].
pub fn validate_stochastic(raw: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = raw.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Empty);
    }
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    for i in 0..rows {
        let mut sum = 0.0;
        for j in 0..cols {
            let v = raw[(i, j)];
            if v < 0.0 || v.is_nan() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::RowSumViolation { row: i, sum });
        }
    }
    Ok(())
}

/// A probability vector over the states of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((i, &w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| **w < 0.0 || w.is_nan())
        {
            return Err(Error::NegativeEntry {
                row: 0,
                col: i,
                value: w,
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::RowSumViolation { row: 0, sum });
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest weight, `pi*` in the mixing bounds.
    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Entrywise square root, the top singular vector of a reversible
    /// chain's discriminant.
    pub fn sqrt(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }
}

/// Class flags of a chain. `reversible` is `None` when the chain has no
/// unique stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainClass {
    pub reversible: Option<bool>,
    pub doubly_stochastic: bool,
    pub symmetric: bool,
    pub normal: bool,
    pub ergodic: bool,
}

impl ChainClass {
    /// Both structural implications between the flags hold.
    pub fn is_consistent(&self) -> bool {
        let sym_iff = match self.reversible {
            Some(rev) => self.symmetric == (rev && self.doubly_stochastic),
            None => true,
        };
        let normal_ergodic = !(self.normal && self.ergodic) || self.doubly_stochastic;
        sym_iff && normal_ergodic
    }
}

pub fn is_doubly_stochastic(p: &TransitionMatrix, tol: f64) -> bool {
    let m = p.matrix();
    (0..p.n()).all(|j| (m.column(j).sum() - 1.0).abs() <= tol)
}

pub fn classify(p: &TransitionMatrix, tol: f64) -> ChainClass {
    let m = p.matrix();
    let mt = m.transpose();
    let symmetric = max_abs_diff(m, &mt) <= tol;
    let normal = max_abs_diff(&(m * &mt), &(&mt * m)) <= tol;
    let reversible = stationary_distribution(p)
        .ok()
        .map(|pi| detailed_balance_residual(p, &pi) <= tol);
    ChainClass {
        reversible,
        doubly_stochastic: is_doubly_stochastic(p, tol),
        symmetric,
        normal,
        ergodic: p.is_ergodic(),
    }
}

/// `max_{i,j} |pi_i P_ij - pi_j P_ji|`.
pub fn detailed_balance_residual(p: &TransitionMatrix, pi: &Distribution) -> f64 {
    let n = p.n();
    let w = pi.weights();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((w[i] * p.get(i, j) - w[j] * p.get(j, i)).abs());
        }
    }
    worst
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Unique stationary distribution, from the null space of `P^T - I`.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Distribution> {
    let n = p.n();
    if n == 1 {
        return Ok(Distribution::uniform(1));
    }
    let a = p.matrix().transpose() - DMatrix::<f64>::identity(n, n);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or(Error::CompletionFailure)?;
    let null_dim = svd
        .singular_values
        .iter()
        .filter(|s| **s <= SPECTRAL_TOL)
        .count();
    if null_dim != 1 {
        return Err(Error::NotErgodic);
    }
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("n > 0");
    let row = v_t.row(idx);
    let sum: f64 = row.iter().sum();
    let mut w: Vec<f64> = row.iter().map(|x| (x / sum).max(0.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(Distribution { weights: w })
}

/// `D[i][j] = sqrt(P[i][j] * P[j][i])`.
pub fn symmetrised_discriminant(p: &TransitionMatrix) -> DMatrix<f64> {
    let n = p.n();
    DMatrix::from_fn(n, n, |i, j| (p.get(i, j) * p.get(j, i)).sqrt())
}

/// `D'[i][j] = sqrt(pi_i) P[i][j] / sqrt(pi_j)`.
pub fn discriminant(p: &TransitionMatrix, pi: &Distribution) -> Result<DMatrix<f64>> {
    let n = p.n();
    if pi.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pi.n(),
        });
    }
    if let Some(j) = pi.weights().iter().position(|w| *w <= 0.0) {
        return Err(Error::ZeroStationaryEntry(j));
    }
    let s = pi.sqrt();
    Ok(DMatrix::from_fn(n, n, |i, j| s[i] * p.get(i, j) / s[j]))
}

/// Eigenvalues and singular values of a chain together with its gaps.
///
/// Singular values are those of the operator the gap estimator would encode:
/// `P` itself when it is doubly stochastic, otherwise the symmetrised
/// discriminant.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    /// `(re, im)` pairs sorted by modulus, largest first.
    pub eigenvalues: Vec<(f64, f64)>,
    pub singular_values: Vec<f64>,
    /// Absent when the spectrum is not real within [`SPECTRAL_TOL`].
    pub spectral_gap: Option<f64>,
    pub singular_gap: f64,
}

impl SpectralSummary {
    pub fn spectral_gap(&self) -> Result<f64> {
        self.spectral_gap
            .ok_or_else(|| Error::DomainError("complex spectrum".into()))
    }
}

pub fn spectral_summary(p: &TransitionMatrix) -> SpectralSummary {
    let mut eig = eigenvalues(p.matrix());
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    let real = eig.iter().all(|z| z.im.abs() <= SPECTRAL_TOL);
    let spectral_gap = real.then(|| {
        let second = eig.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
        (1.0 - second).clamp(0.0, 1.0)
    });
    let encoded = if is_doubly_stochastic(p, STRUCTURAL_TOL) {
        p.matrix().clone()
    } else {
        symmetrised_discriminant(p)
    };
    let singular_values = sorted_singular_values(&encoded);
    SpectralSummary {
        eigenvalues: eig.iter().map(|z| (z.re, z.im)).collect(),
        singular_gap: singular_gap_of(&singular_values),
        singular_values,
        spectral_gap,
    }
}

/// Eigenvalues through a capped real Schur iteration. Orthogonal inputs
/// such as permutation matrices can stall the unshifted QR sweep, so a stall
/// is retried on `M + cI` for a few shifts `c`.
fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    for shift in [0.0, 0.5, 0.3141592653589793, 1.2345] {
        let shifted = m + DMatrix::identity(n, n) * shift;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, SCHUR_MAX_ITERS) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z - shift)
                .collect();
        }
    }
    panic!("real Schur iteration did not converge under any shift");
}

pub(crate) fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `1 - sigma_2`, clamped to `[0, 1]`.
pub fn singular_gap_of(sorted: &[f64]) -> f64 {
    (1.0 - sorted.get(1).copied().unwrap_or(0.0)).clamp(0.0, 1.0)
}

/// Which pair of mixing-time bounds to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingBoundKind {
    /// Reversible or normal chains; carries the smallest stationary weight.
    Reversible { pi_star: f64 },
    /// Doubly-stochastic chains; carries the number of states.
    DoublyStochastic { n: usize },
}

/// Lower and upper bounds on the TV mixing time `tau(eps)` from a gap.
pub fn mixing_bounds(gap: f64, eps: f64, kind: MixingBoundKind) -> Result<(f64, f64)> {
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(Error::DomainError(format!("gap {gap} not in (0, 1]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("eps {eps} not in (0, 1)")));
    }
    let ln = |x: f64| x.log(MIXING_LOG_BASE);
    match kind {
        MixingBoundKind::Reversible { pi_star } => {
            if !(pi_star > 0.0 && pi_star <= 1.0) {
                return Err(Error::DomainError(format!("pi* {pi_star} not in (0, 1]")));
            }
            let lower = ln(1.0 / (2.0 * eps)) / (2.0 * gap);
            let upper = ln(1.0 / (2.0 * eps * pi_star.sqrt())) / gap;
            Ok((lower, upper))
        }
        MixingBoundKind::DoublyStochastic { n } => {
            if n == 0 {
                return Err(Error::DomainError("N must be positive".into()));
            }
            Ok((ln(1.0 / eps) / gap, ln(n as f64 / eps) / gap))
        }
    }
}
