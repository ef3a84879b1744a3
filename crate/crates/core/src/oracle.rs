//! Ground truth computed along a separate numerical route from the main
//! pipeline: cyclic Jacobi for symmetric spectra, one-sided Jacobi for
//! singular values, Gaussian elimination for stationary distributions and
//! repeated squaring for mixing times. Nothing here calls into nalgebra's
//! factorizations.

use num_complex::Complex64;
use serde::Serialize;

use crate::encoding::{extract_block, BlockEncoding};
use crate::error::{Error, Result};
use crate::filter::{parity_split, FilterPolynomial};
use crate::markov::TransitionMatrix;

/// Powering cap for [`exact_tv_mixing_time`].
pub const MIXING_CAP: u64 = 1_000_000;
const JACOBI_MAX_SWEEPS: usize = 100;
const CHECK_TOL: f64 = 1e-10;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
struct Square {
    n: usize,
    a: Vec<f64>,
}

impl Square {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
        }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    fn from_chain(p: &TransitionMatrix) -> Self {
        let n = p.n();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = p.get(i, j);
            }
        }
        m
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn mul(&self, other: &Square) -> Square {
        let n = self.n;
        let mut out = Square::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == 0.0 {
                    continue;
                }
                let row = &other.a[k * n..(k + 1) * n];
                for (o, r) in out.a[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += x * r;
                }
            }
        }
        out
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
fn jacobi_symmetric_eigenvalues(mut m: Square) -> Vec<f64> {
    let n = m.n;
    let total: f64 = m.a.iter().map(|x| x * x).sum();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.at(i, j).powi(2))
            .sum();
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m.at(k, p), m.at(k, q));
                    m.a[k * n + p] = c * akp - s * akq;
                    m.a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m.at(p, k), m.at(q, k));
                    m.a[p * n + k] = c * apk - s * aqk;
                    m.a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.at(i, i)).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Singular triplets by one-sided (Hestenes) Jacobi: `A V = U S`.
/// Returns `(u columns, sigma, v columns)` sorted by descending sigma, with
/// left vectors of zero singular values completed by Gram-Schmidt.
fn jacobi_svd(m: &Square) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let n = m.n;
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| m.at(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut cols, &mut v] {
                    let (lo, hi) = mat.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (xp, yq) = (*x, *y);
                        *x = c * xp - s * yq;
                        *y = s * xp + c * yq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let scale = norms.iter().copied().fold(0.0, f64::max).max(1e-300);
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &k in &order {
        if norms[k] > 1e-13 * scale {
            u.push(cols[k].iter().map(|x| x / norms[k]).collect());
        } else {
            // complete with the first basis vector independent of the rest
            let mut best = vec![0.0; n];
            for e in 0..n {
                let mut cand: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
                for _ in 0..2 {
                    for prev in &u {
                        let d = dot(prev, &cand);
                        cand.iter_mut().zip(prev).for_each(|(c, p)| *c -= d * p);
                    }
                }
                let norm = dot(&cand, &cand).sqrt();
                if norm > 0.5 {
                    best = cand.iter().map(|x| x / norm).collect();
                    break;
                }
            }
            u.push(best);
        }
    }
    let sigma = order.iter().map(|&k| norms[k]).collect();
    let v = order.iter().map(|&k| v[k].clone()).collect();
    (u, sigma, v)
}

/// Stationary distribution by Gaussian elimination on `(P^T - I) pi = 0`
/// with the last equation replaced by `sum pi = 1`.
fn stationary_by_elimination(p: &Square) -> Result<Vec<f64>> {
    let n = p.n;
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p.at(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::NotErgodic);
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect())
}

fn is_doubly_stochastic(p: &Square) -> bool {
    (0..p.n).all(|j| ((0..p.n).map(|i| p.at(i, j)).sum::<f64>() - 1.0).abs() <= CHECK_TOL)
}

fn symmetrised(p: &Square) -> Square {
    let n = p.n;
    let mut d = Square::zeros(n);
    for i in 0..n {
        for j in 0..n {
            d.a[i * n + j] = (p.at(i, j) * p.at(j, i)).sqrt();
        }
    }
    d
}

fn reversible_with_positive_pi(p: &Square, pi: &[f64]) -> bool {
    pi.iter().all(|&x| x > CHECK_TOL)
        && (0..p.n)
            .all(|i| (0..p.n).all(|j| (pi[i] * p.at(i, j) - pi[j] * p.at(j, i)).abs() <= CHECK_TOL))
}

fn symmetric_similar(p: &Square, pi: &[f64]) -> Square {
    let n = p.n;
    let mut s = Square::zeros(n);
    for i in 0..n {
        for j in 0..n {
            s.a[i * n + j] = 0.5
                * (pi[i].sqrt() * p.at(i, j) / pi[j].sqrt()
                    + pi[j].sqrt() * p.at(j, i) / pi[i].sqrt());
        }
    }
    s
}

fn gap_from_sorted(eig: &[f64]) -> f64 {
    1.0 - eig.iter().skip(1).map(|x| x.abs()).fold(0.0, f64::max)
}

/// Spectral gap (for reversible chains with positive `pi`, else absent) and
/// singular gap (of `P` if doubly stochastic, else of the symmetrised
/// discriminant).
pub fn exact_gaps(p: &TransitionMatrix) -> (Option<f64>, f64) {
    let m = Square::from_chain(p);
    let gamma = stationary_by_elimination(&m)
        .ok()
        .filter(|pi| reversible_with_positive_pi(&m, pi))
        .map(|pi| gap_from_sorted(&jacobi_symmetric_eigenvalues(symmetric_similar(&m, &pi))));
    let target = if is_doubly_stochastic(&m) {
        m
    } else {
        symmetrised(&m)
    };
    let (_, sigma, _) = jacobi_svd(&target);
    let gamma_s = (1.0 - sigma.get(1).copied().unwrap_or(0.0)).clamp(0.0, 1.0);
    (gamma, gamma_s)
}

/// Stationary distribution by elimination; errors when it is not unique.
pub fn oracle_stationary(p: &TransitionMatrix) -> Result<Vec<f64>> {
    stationary_by_elimination(&Square::from_chain(p))
}

/// Singular values of an arbitrary square matrix, descending.
pub fn oracle_singular_values(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let sq = Square {
        n,
        a: (0..n * n).map(|k| m[(k / n, k % n)]).collect(),
    };
    jacobi_svd(&sq).1
}

fn tv_distance(pn: &Square, pi: &[f64]) -> f64 {
    (0..pn.n)
        .map(|x| 0.5 * (0..pn.n).map(|y| (pn.at(x, y) - pi[y]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `n` with `max_x TV(P^n(x, .), pi) <= eps`.
pub fn exact_tv_mixing_time(p: &TransitionMatrix, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("eps = {eps} outside (0, 1)")));
    }
    let m = Square::from_chain(p);
    let pi = stationary_by_elimination(&m)?;
    let n = m.n;
    if tv_distance(&Square::identity(n), &pi) <= eps {
        return Ok(0);
    }
    // powers[k] = P^(2^k); the TV distance is non-increasing in the power
    let mut powers = vec![m];
    loop {
        let k = powers.len() - 1;
        if tv_distance(&powers[k], &pi) <= eps {
            break;
        }
        if (1u64 << k) >= MIXING_CAP {
            return Err(Error::IterationCap(MIXING_CAP as usize));
        }
        let next = powers[k].mul(&powers[k]);
        powers.push(next);
    }
    let top = powers.len() - 1;
    if top == 0 {
        return Ok(1);
    }
    // binary search on (2^(top-1), 2^top]: build the answer bit by bit
    let mut base = powers[top - 1].clone();
    let mut steps = 1u64 << (top - 1);
    for bit in (0..top - 1).rev() {
        let candidate = base.mul(&powers[bit]);
        if tv_distance(&candidate, &pi) > eps {
            base = candidate;
            steps += 1 << bit;
        }
    }
    let answer = steps + 1;
    if answer > MIXING_CAP {
        return Err(Error::IterationCap(MIXING_CAP as usize));
    }
    Ok(answer)
}

fn weight_of(m: &[Vec<f64>], phi: &[Complex64]) -> f64 {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(phi)
                .map(|(a, z)| z * *a)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}

fn assemble(terms: &[(&[Vec<f64>], Vec<f64>, &[Vec<f64>])], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; n];
    for (left, vals, right) in terms {
        for k in 0..n {
            if vals[k] == 0.0 {
                continue;
            }
            for r in 0..n {
                let lr = left[k][r] * vals[k];
                for c in 0..n {
                    out[r][c] += lr * right[k][c];
                }
            }
        }
    }
    out
}

fn block_svd(be: &BlockEncoding) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let block = extract_block(be);
    let n = block.nrows();
    jacobi_svd(&Square {
        n,
        a: (0..n * n).map(|k| block[(k / n, k % n)]).collect(),
    })
}

/// `|| sum_i p(sigma_i) u_i v_i^T phi ||^2` with the filtered block assembled
/// entry by entry from an independent decomposition.
pub fn brute_force_weight(
    be: &BlockEncoding,
    p: &FilterPolynomial,
    phi: &[Complex64],
) -> Result<f64> {
    let n = be.target_n();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    let (u, sigma, v) = block_svd(be);
    let vals = sigma.iter().map(|&s| p.eval(s)).collect();
    Ok(weight_of(&assemble(&[(&u, vals, &v)], n), phi))
}

/// As [`brute_force_weight`] for the parity-split operator
/// `V p_even(S) V^T + U p_odd(S) V^T`.
pub fn brute_force_weight_parity(
    be: &BlockEncoding,
    p: &FilterPolynomial,
    phi: &[Complex64],
) -> Result<f64> {
    let n = be.target_n();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    let (u, sigma, v) = block_svd(be);
    let (even, odd) = parity_split(p);
    let ev = sigma.iter().map(|&s| even.eval(s)).collect();
    let ov = sigma.iter().map(|&s| odd.eval(s)).collect();
    Ok(weight_of(&assemble(&[(&v, ev, &v), (&u, ov, &v)], n), phi))
}

/// Self-loop `lambda_i` on each of the first states, the rest of the mass
/// sent to a final absorbing state. Its symmetrised discriminant is
/// `diag(lambda_1, ..., lambda_{N-1}, 1)`.
pub fn absorbing_diagonal_chain(lambdas: &[f64]) -> Result<TransitionMatrix> {
    if lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(Error::BadParams(
            "self-loop weights must lie in [0, 1]".into(),
        ));
    }
    let n = lambdas.len() + 1;
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for (i, &l) in lambdas.iter().enumerate() {
        m[(i, i)] = l;
        m[(i, n - 1)] = 1.0 - l;
    }
    m[(n - 1, n - 1)] = 1.0;
    TransitionMatrix::new(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    /// Real spectrum, present for reversible chains with positive `pi`.
    pub eigenvalues: Option<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub gamma: Option<f64>,
    pub gamma_s: f64,
    pub pi: Option<Vec<f64>>,
    pub tv_eps: f64,
    pub tv_mixing_time: Option<u64>,
    pub doubly_stochastic: bool,
    pub reversible: bool,
}

pub fn oracle_report(p: &TransitionMatrix, tv_eps: f64) -> OracleReport {
    let m = Square::from_chain(p);
    let pi = stationary_by_elimination(&m).ok();
    let reversible = pi
        .as_ref()
        .is_some_and(|pi| reversible_with_positive_pi(&m, pi));
    let eigenvalues = match (&pi, reversible) {
        (Some(pi), true) => Some(jacobi_symmetric_eigenvalues(symmetric_similar(&m, pi))),
        _ => None,
    };
    let ds = is_doubly_stochastic(&m);
    let (_, singular_values, _) = jacobi_svd(&if ds { m.clone() } else { symmetrised(&m) });
    let (gamma, gamma_s) = exact_gaps(p);
    OracleReport {
        n: p.n(),
        eigenvalues,
        singular_values,
        gamma,
        gamma_s,
        pi,
        tv_eps,
        tv_mixing_time: exact_tv_mixing_time(p, tv_eps).ok(),
        doubly_stochastic: ds,
        reversible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{generate, ChainFamily};
    use approx::assert_abs_diff_eq;

    #[test]
    fn gap_examples() {
        let (g, _) = exact_gaps(&generate(&ChainFamily::LazyCycle { n: 4 }).unwrap());
        assert_abs_diff_eq!(g.unwrap(), 0.5, epsilon = 1e-12);
        let (_, gs) = exact_gaps(&generate(&ChainFamily::Search { n: 4, marked: true }).unwrap());
        assert_abs_diff_eq!(gs, 0.25, epsilon = 1e-12);
        let (g, gs) = exact_gaps(
            &generate(&ChainFamily::Search {
                n: 8,
                marked: false,
            })
            .unwrap(),
        );
        assert_abs_diff_eq!(gs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        let p = generate(&ChainFamily::RandomStochastic { n: 7, seed: 2 }).unwrap();
        let m = Square::from_chain(&p);
        let (u, s, v) = jacobi_svd(&m);
        for r in 0..7 {
            for c in 0..7 {
                let x: f64 = (0..7).map(|k| u[k][r] * s[k] * v[k][c]).sum();
                assert_abs_diff_eq!(x, m.at(r, c), epsilon = 1e-13);
            }
        }
        // rank-deficient input gets a completed orthonormal U
        let rank_one = Square {
            n: 3,
            a: vec![1.0 / 3.0; 9],
        };
        let (u, s, _) = jacobi_svd(&rank_one);
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-14);
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = u[a].iter().zip(&u[b]).map(|(x, y)| x * y).sum();
                assert_abs_diff_eq!(d, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mixing_examples() {
        let cyc = generate(&ChainFamily::CyclePermutation { n: 5 }).unwrap();
        assert_eq!(
            exact_tv_mixing_time(&cyc, 0.1),
            Err(Error::IterationCap(MIXING_CAP as usize))
        );
        let j = generate(&ChainFamily::Search {
            n: 6,
            marked: false,
        })
        .unwrap();
        assert_eq!(exact_tv_mixing_time(&j, 0.01), Ok(1));
        let ts = generate(&ChainFamily::TwoState { a: 0.5, b: 0.5 }).unwrap();
        assert_eq!(exact_tv_mixing_time(&ts, 0.1), Ok(1));
        // two_state(a, a): TV after n steps is |1 - 2a|^n / 2
        let ts = generate(&ChainFamily::TwoState { a: 0.1, b: 0.1 }).unwrap();
        let expected = (0..).find(|&n| 0.5 * 0.8f64.powi(n) <= 0.01).unwrap() as u64;
        assert_eq!(exact_tv_mixing_time(&ts, 0.01), Ok(expected));
        let identity = TransitionMatrix::new(nalgebra::DMatrix::identity(2, 2)).unwrap();
        assert_eq!(exact_tv_mixing_time(&identity, 0.1), Err(Error::NotErgodic));
    }

    #[test]
    fn absorbing_fixture() {
        let lambdas = [0.9, 0.5, 0.2];
        let p = absorbing_diagonal_chain(&lambdas).unwrap();
        let d = crate::markov::symmetrised_discriminant(&p);
        let expected = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            0.9, 0.5, 0.2, 1.0,
        ]));
        assert_eq!(d, expected);
        let sv = oracle_singular_values(&d);
        assert_abs_diff_eq!(sv[1], 0.9, epsilon = 1e-15);
    }
}
