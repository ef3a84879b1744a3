//! Unscaled block encodings of Markov chain matrices.
//!
//! Every encoding here has the shape `U = U_P^T * Pi * U_P` on an `m^2`
//! dimensional space, where `U_P` prepares the transition amplitudes of each
//! source state and `Pi` is a basis permutation: the register swap for the
//! symmetrised discriminant, or an algebraic permutation for group and
//! linear-order chains.
//!
//! Basis state `|j, i>` (first register `j` = destination, second register
//! `i` = source) has index `j * m + i`. The encoded block sits on the
//! first-register-zero rows and columns, i.e. indices `0..N`.
//!
//! The unitary is kept in factored form, so applying it costs `O(m^2)` and
//! extracting the block costs `O(N m^2)`. [`BlockEncoding::unitary`]
//! materializes the dense matrix for small instances.

mod group;
mod linear_order;

pub use group::{
    group_encoding, group_encoding_with, group_permutation, mu_is_reversible, GroupSpec,
};
pub use linear_order::{
    linear_order_encoding, linear_order_encoding_with, linear_order_permutation, LinearOrderSpec,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{max_abs_diff, TransitionMatrix, SPECTRAL_TOL};

/// Default tolerance for block and unitarity checks.
pub const ENCODING_TOL: f64 = 1e-10;

/// A permutation of basis indices: basis vector `a` is sent to `map[a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self {
            map: (0..len).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut hit = vec![false; map.len()];
        for (a, &b) in map.iter().enumerate() {
            if b >= map.len() || std::mem::replace(&mut hit[b], true) {
                return Err(Error::NotInjective(format!(
                    "basis {a} maps onto taken index {b}"
                )));
            }
        }
        Ok(Self { map })
    }

    /// Completes a partial injective map by matching the unused domain
    /// indices to the unused image indices in ascending order.
    pub(crate) fn complete(
        len: usize,
        partial: &[(usize, usize)],
    ) -> std::result::Result<Self, (usize, usize)> {
        let mut map = vec![usize::MAX; len];
        let mut taken = vec![false; len];
        for &(a, b) in partial {
            if map[a] != usize::MAX || taken[b] {
                return Err((a, b));
            }
            map[a] = b;
            taken[b] = true;
        }
        let free_images: Vec<usize> = (0..len).filter(|b| !taken[*b]).collect();
        let mut next = free_images.into_iter();
        for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = next
                .next()
                .expect("domain and image complements have equal size");
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, a: usize) -> usize {
        self.map[a]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (a, &b) in self.map.iter().enumerate() {
            inv[b] = a;
        }
        Self { map: inv }
    }

    /// `y = Pi x`, i.e. `y[map[a]] = x[a]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (a, &b) in self.map.iter().enumerate() {
            y[b] = x[a];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.map.len();
        let mut m = DMatrix::zeros(n, n);
        for (a, &b) in self.map.iter().enumerate() {
            m[(b, a)] = 1.0;
        }
        m
    }
}

/// The register swap `F |j, i> = |i, j>` on an `m^2` space.
pub fn shift_operator(m: usize) -> Permutation {
    Permutation {
        map: (0..m * m).map(|idx| (idx % m) * m + idx / m).collect(),
    }
}

/// The state-preparation unitary `U_P |0, i> = sum_j sqrt(P[i][j]) |j, i>`.
///
/// For each source `i` the destination register is acted on by
/// `G_i = H_i * S`, where `S` flips the sign of `e_0` and `H_i` is the
/// Householder reflection through `e_0 + v_i`. Then `G_i e_0 = v_i` exactly
/// and the remaining columns of `G_i` complete an orthonormal basis. Sources
/// beyond `N` (register padding) are left untouched.
#[derive(Debug, Clone)]
pub struct StatePrep {
    n: usize,
    reg: usize,
    amplitudes: Vec<Vec<f64>>,
    reflectors: Vec<Vec<f64>>,
}

impl StatePrep {
    pub fn chain_size(&self) -> usize {
        self.n
    }

    pub fn register_dim(&self) -> usize {
        self.reg
    }

    pub fn dim(&self) -> usize {
        self.reg * self.reg
    }

    /// Amplitude column `U_P |0, i>` restricted to the destination register.
    pub fn amplitudes(&self, i: usize) -> &[f64] {
        &self.amplitudes[i]
    }

    fn reflect(u: &[f64], y: &mut [f64]) {
        let dot: f64 = u.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        for (yk, uk) in y.iter_mut().zip(u) {
            *yk -= 2.0 * dot * uk;
        }
    }

    fn apply_inner(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let m = self.reg;
        let mut out = x.to_vec();
        let mut buf = vec![0.0; m];
        for (i, u) in self.reflectors.iter().enumerate() {
            for j in 0..m {
                buf[j] = x[j * m + i];
            }
            if transpose {
                Self::reflect(u, &mut buf);
                buf[0] = -buf[0];
            } else {
                buf[0] = -buf[0];
                Self::reflect(u, &mut buf);
            }
            for j in 0..m {
                out[j * m + i] = buf[j];
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_inner(x, false)
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.apply_inner(x, true)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        dense_from_operator(self.dim(), |x| self.apply(x))
    }
}

fn dense_from_operator(dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for k in 0..dim {
        e[k] = 1.0;
        out.set_column(k, &nalgebra::DVector::from_vec(f(&e)));
        e[k] = 0.0;
    }
    out
}

/// Register options shared by the three constructions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EncodingOptions {
    /// Pad each register to the next power of two, matching qubit circuits.
    pub pad_to_power_of_two: bool,
}

impl EncodingOptions {
    pub fn register_dim(&self, n: usize) -> usize {
        if self.pad_to_power_of_two {
            n.next_power_of_two()
        } else {
            n
        }
    }
}

pub fn state_prep_unitary(p: &TransitionMatrix) -> Result<StatePrep> {
    state_prep_with(p, EncodingOptions::default())
}

pub fn state_prep_with(p: &TransitionMatrix, opts: EncodingOptions) -> Result<StatePrep> {
    let n = p.n();
    let m = opts.register_dim(n);
    let mut amplitudes = Vec::with_capacity(n);
    let mut reflectors = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vec![0.0; m];
        for j in 0..n {
            v[j] = p.get(i, j).sqrt();
        }
        let mut w = v.clone();
        w[0] += 1.0;
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        // |e_0 + v| >= 1 for any non-negative unit v
        if !(norm >= 1.0 - 1e-12) {
            return Err(Error::CompletionFailure);
        }
        w.iter_mut().for_each(|x| *x /= norm);
        amplitudes.push(v);
        reflectors.push(w);
    }
    Ok(StatePrep {
        n,
        reg: m,
        amplitudes,
        reflectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    /// `U_P^T F U_P`, encodes the symmetrised discriminant.
    Szegedy,
    /// `U_P^T R^T U_P` over a finite group, encodes `P`.
    Group,
    /// `U_P^T R^T U_P` over a linearly ordered digraph, encodes `P`.
    LinearOrder,
}

/// A unitary whose first-register-zero block is `A / scale`.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    kind: EncodingKind,
    prep: StatePrep,
    middle: Permutation,
    scale: f64,
}

impl BlockEncoding {
    pub(crate) fn new(kind: EncodingKind, prep: StatePrep, middle: Permutation) -> Self {
        debug_assert_eq!(prep.dim(), middle.len());
        Self {
            kind,
            prep,
            middle,
            scale: 1.0,
        }
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    /// Ambient dimension of the unitary.
    pub fn dim(&self) -> usize {
        self.prep.dim()
    }

    pub fn target_n(&self) -> usize {
        self.prep.chain_size()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn state_prep(&self) -> &StatePrep {
        &self.prep
    }

    pub fn permutation(&self) -> &Permutation {
        &self.middle
    }

    /// Ambient indices of the block rows, `|0, i>` for `i < N`.
    pub fn block_rows(&self) -> Vec<usize> {
        (0..self.target_n()).collect()
    }

    pub fn block_cols(&self) -> Vec<usize> {
        self.block_rows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.prep
            .apply_transpose(&self.middle.apply(&self.prep.apply(x)))
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.prep
            .apply_transpose(&self.middle.inverse().apply(&self.prep.apply(x)))
    }

    /// Dense unitary; `O(dim^2)` memory.
    pub fn unitary(&self) -> DMatrix<f64> {
        dense_from_operator(self.dim(), |x| self.apply(x))
    }

    /// `max |U^T U - I|`, computed column by column: each dense column
    /// `U e_k` is pulled back through the transpose operator.
    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        let mut e = vec![0.0; dim];
        let mut worst: f64 = 0.0;
        let inv = self.middle.inverse();
        for k in 0..dim {
            e[k] = 1.0;
            let col = self.apply(&e);
            let back = self
                .prep
                .apply_transpose(&inv.apply(&self.prep.apply(&col)));
            for (idx, v) in back.iter().enumerate() {
                let target = if idx == k { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
            e[k] = 0.0;
        }
        worst
    }
}

pub fn szegedy_encoding(p: &TransitionMatrix) -> Result<BlockEncoding> {
    szegedy_encoding_with(p, EncodingOptions::default())
}

pub fn szegedy_encoding_with(p: &TransitionMatrix, opts: EncodingOptions) -> Result<BlockEncoding> {
    let prep = state_prep_with(p, opts)?;
    let swap = shift_operator(prep.register_dim());
    Ok(BlockEncoding::new(EncodingKind::Szegedy, prep, swap))
}

/// Reads `<0, r| U |0, c>` times the scale for every block row and column.
pub fn extract_block(be: &BlockEncoding) -> DMatrix<f64> {
    let n = be.target_n();
    let mut block = DMatrix::zeros(n, n);
    let mut e = vec![0.0; be.dim()];
    for c in 0..n {
        e[c] = 1.0;
        let col = be.apply(&e);
        for r in 0..n {
            block[(r, c)] = col[r] * be.scale;
        }
        e[c] = 0.0;
    }
    block
}

/// Outcome of comparing an encoded block against its intended target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncodingCheck {
    pub residual: f64,
    pub tolerance: f64,
}

impl EncodingCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub fn verify_encoding(
    be: &BlockEncoding,
    target: &DMatrix<f64>,
    tol: f64,
) -> Result<EncodingCheck> {
    let n = be.target_n();
    if target.nrows() != n || target.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.nrows().max(target.ncols()),
        });
    }
    Ok(EncodingCheck {
        residual: max_abs_diff(&extract_block(be), target),
        tolerance: tol,
    })
}

/// Whether `P` admits an unscaled block encoding, with its spectral norm.
pub fn is_unscaled_encodable(p: &TransitionMatrix) -> (bool, f64) {
    let norm = p
        .matrix()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    (norm <= 1.0 + SPECTRAL_TOL, norm)
}
