//! Matrix-level singular value transformation of an encoded block, with
//! block-encoding query accounting.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::encoding::{extract_block, BlockEncoding};
use crate::error::{Error, Result};
use crate::filter::{parity_split, FilterPolynomial};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    /// `sum_i p(sigma_i) |u_i><v_i|`, charged `degree` queries per use.
    #[default]
    Ideal,
    /// `V p_even(S) V^T + U p_odd(S) V^T`, recombined by an LCU step that
    /// succeeds with probability at least 1/2; charged `2 degree` queries
    /// per use and an expected repeat factor of 2.
    ParitySplit,
}

/// Singular value decomposition of a block, sorted descending, each right
/// vector's first non-negligible component made non-negative.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub left: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub right: DMatrix<f64>,
}

impl SvdFactors {
    pub fn of(block: &DMatrix<f64>) -> Self {
        let n = block.nrows();
        let svd = block.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested V^T").transpose();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let mut left = DMatrix::zeros(n, n);
        let mut right = DMatrix::zeros(n, n);
        let mut singular_values = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            let mut uc = u.column(src).into_owned();
            let mut vc = v.column(src).into_owned();
            if vc
                .iter()
                .find(|x| x.abs() > 1e-12)
                .is_some_and(|&x| x < 0.0)
            {
                uc.neg_mut();
                vc.neg_mut();
            }
            left.set_column(dst, &uc);
            right.set_column(dst, &vc);
            singular_values.push(svd.singular_values[src]);
        }
        Self {
            left,
            singular_values,
            right,
        }
    }

    pub fn n(&self) -> usize {
        self.singular_values.len()
    }
}

#[derive(Debug, Clone)]
pub struct TransformedEncoding {
    factors: SvdFactors,
    filtered_values: Vec<f64>,
    even_values: Vec<f64>,
    odd_values: Vec<f64>,
    queries_per_use: u64,
    filter_degree: usize,
    mode: TransformMode,
}

impl TransformedEncoding {
    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.factors.left
    }

    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.factors.right
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.factors.singular_values
    }

    pub fn filtered_values(&self) -> &[f64] {
        &self.filtered_values
    }

    pub fn queries_per_use(&self) -> u64 {
        self.queries_per_use
    }

    pub fn filter_degree(&self) -> usize {
        self.filter_degree
    }

    pub fn mode(&self) -> TransformMode {
        self.mode
    }

    /// Expected block-encoding uses per successful application.
    pub fn lcu_factor(&self) -> u64 {
        match self.mode {
            TransformMode::Ideal => 1,
            TransformMode::ParitySplit => 2,
        }
    }

    /// The transformed block as a dense matrix.
    pub fn block(&self) -> DMatrix<f64> {
        let f = &self.factors;
        let scaled = |m: &DMatrix<f64>, vals: &[f64]| {
            let mut m = m.clone();
            for (k, mut col) in m.column_iter_mut().enumerate() {
                col *= vals[k];
            }
            m
        };
        match self.mode {
            TransformMode::Ideal => scaled(&f.left, &self.filtered_values) * f.right.transpose(),
            TransformMode::ParitySplit => {
                scaled(&f.right, &self.even_values) * f.right.transpose()
                    + scaled(&f.left, &self.odd_values) * f.right.transpose()
            }
        }
    }
}

pub fn sv_transform(
    be: &BlockEncoding,
    p: &FilterPolynomial,
    mode: TransformMode,
) -> Result<TransformedEncoding> {
    if be.scale() != 1.0 {
        return Err(Error::ScaledEncoding(be.scale()));
    }
    Ok(sv_transform_factors(
        SvdFactors::of(&extract_block(be)),
        p,
        mode,
    ))
}

/// As [`sv_transform`], reusing a decomposition computed once per block.
pub fn sv_transform_factors(
    factors: SvdFactors,
    p: &FilterPolynomial,
    mode: TransformMode,
) -> TransformedEncoding {
    let sigma = &factors.singular_values;
    let filtered_values: Vec<f64> = sigma.iter().map(|&s| p.eval(s)).collect();
    let (even_values, odd_values, queries_per_use) = match mode {
        TransformMode::Ideal => (Vec::new(), Vec::new(), p.degree() as u64),
        TransformMode::ParitySplit => {
            let (even, odd) = parity_split(p);
            (
                sigma.iter().map(|&s| even.eval(s)).collect(),
                sigma.iter().map(|&s| odd.eval(s)).collect(),
                2 * p.degree() as u64,
            )
        }
    };
    TransformedEncoding {
        factors,
        filtered_values,
        even_values,
        odd_values,
        queries_per_use,
        filter_degree: p.degree(),
        mode,
    }
}

pub(crate) fn check_normalized(phi: &[Complex64]) -> Result<()> {
    let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

fn right_overlaps(te: &TransformedEncoding, phi: &[Complex64]) -> Vec<Complex64> {
    te.factors
        .right
        .column_iter()
        .map(|v| v.iter().zip(phi).map(|(a, z)| z * *a).sum())
        .collect()
}

/// Squared norm of the signal-block output on input `|0>|phi>`.
pub fn transformed_weight(te: &TransformedEncoding, phi: &[Complex64]) -> Result<f64> {
    let n = te.factors.n();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    check_normalized(phi)?;
    let overlaps = right_overlaps(te, phi);
    Ok(match te.mode {
        TransformMode::Ideal => overlaps
            .iter()
            .zip(&te.filtered_values)
            .map(|(c, f)| f * f * c.norm_sqr())
            .sum(),
        TransformMode::ParitySplit => {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for k in 0..n {
                let e = overlaps[k] * te.even_values[k];
                let o = overlaps[k] * te.odd_values[k];
                for r in 0..n {
                    out[r] += e * te.factors.right[(r, k)] + o * te.factors.left[(r, k)];
                }
            }
            out.iter().map(|z| z.norm_sqr()).sum()
        }
    })
}

/// One priced batch of block-encoding uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub round: usize,
    pub filter_degree: usize,
    pub queries_per_use: u64,
    pub qcount_iterations: u64,
    pub trials: u64,
    pub lcu_factor: u64,
}

impl LedgerEntry {
    pub fn uses(&self) -> u64 {
        self.queries_per_use * self.qcount_iterations * self.trials * self.lcu_factor
    }
}

/// Running count of block-encoding uses with its per-round breakdown.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    block_encoding_uses: u64,
    bisection_rounds: usize,
    breakdown: Vec<LedgerEntry>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, entry: LedgerEntry) {
        self.block_encoding_uses += entry.uses();
        self.bisection_rounds = self.bisection_rounds.max(entry.round + 1);
        self.breakdown.push(entry);
    }

    /// Folds a sub-ledger (e.g. from a worker thread) into this one.
    pub fn merge(&mut self, other: &QueryLedger) {
        for e in &other.breakdown {
            self.charge(*e);
        }
    }

    pub fn total(&self) -> u64 {
        self.block_encoding_uses
    }

    pub fn bisection_rounds(&self) -> usize {
        self.bisection_rounds
    }

    pub fn breakdown(&self) -> &[LedgerEntry] {
        &self.breakdown
    }

    pub fn reconstructed_total(&self) -> u64 {
        self.breakdown.iter().map(LedgerEntry::uses).sum()
    }
}
