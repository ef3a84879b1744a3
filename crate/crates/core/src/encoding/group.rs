use std::fmt::Write as _;

use super::{state_prep_with, BlockEncoding, EncodingKind, EncodingOptions, Permutation};
use crate::error::{Error, Result};
use crate::markov::{generate, ChainFamily, STRUCTURAL_TOL};

/// A finite group given by its multiplication table; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    order: usize,
    mul_table: Vec<usize>,
    inverse_table: Vec<usize>,
}

impl Default for GroupSpec {
    fn default() -> Self {
        Self::cyclic(1).expect("trivial group")
    }
}

impl GroupSpec {
    /// `table[a][b] = a * b`. Checks closure, identity at 0, inverses and
    /// associativity.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::BadParams("group order must be positive".into()));
        }
        let mut mul_table = Vec::with_capacity(order * order);
        for (a, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: row.len(),
                });
            }
            if let Some(&bad) = row.iter().find(|&&c| c >= order) {
                return Err(Error::BadParams(format!(
                    "row {a} contains element {bad} outside the group"
                )));
            }
            mul_table.extend_from_slice(row);
        }
        let at = |a: usize, b: usize| mul_table[a * order + b];
        for a in 0..order {
            if at(0, a) != a || at(a, 0) != a {
                return Err(Error::BadParams(format!(
                    "element 0 is not an identity for {a}"
                )));
            }
        }
        let mut inverse_table = vec![0; order];
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| at(a, b) == 0 && at(b, a) == 0)
                .ok_or_else(|| Error::BadParams(format!("element {a} has no inverse")))?;
            inverse_table[a] = inv;
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::BadParams(format!("({a} {b}) {c} != {a} ({b} {c})")));
                    }
                }
            }
        }
        Ok(Self {
            order,
            mul_table,
            inverse_table,
        })
    }

    /// `Z_n` under addition.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::from_table(
            (0..n)
                .map(|a| (0..n).map(|b| (a + b) % n).collect())
                .collect(),
        )
    }

    /// `Z_2^k` under bitwise xor.
    pub fn z2_power(k: usize) -> Result<Self> {
        if k > 12 {
            return Err(Error::BadParams("Z2^k limited to k <= 12".into()));
        }
        let n = 1usize << k;
        Self::from_table((0..n).map(|a| (0..n).map(|b| a ^ b).collect()).collect())
    }

    /// The symmetric group on `k` letters, permutations listed in
    /// lexicographic order and composed as `(a * b)(i) = a(b(i))`.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k == 0 || k > 5 {
            return Err(Error::BadParams(
                "symmetric group limited to 1..=5 letters".into(),
            ));
        }
        let mut perms = vec![(0..k).collect::<Vec<usize>>()];
        loop {
            let mut next = perms.last().unwrap().clone();
            let Some(i) = (0..k.saturating_sub(1))
                .rev()
                .find(|&i| next[i] < next[i + 1])
            else {
                break;
            };
            let j = (i + 1..k).rev().find(|&j| next[j] > next[i]).unwrap();
            next.swap(i, j);
            next[i + 1..].reverse();
            perms.push(next);
        }
        let index = |p: &[usize]| perms.iter().position(|q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index(&b.iter().map(|&i| a[i]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        Self::from_table(table)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul_table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse_table[a]
    }

    pub fn parse(text: &str) -> Result<Self> {
        let rows = crate::markov::io::parse_index_rows(text)?;
        Self::from_table(rows)
    }

    pub fn format(&self) -> String {
        let mut out = format!("{}\n", self.order);
        for a in 0..self.order {
            let row: Vec<String> = (0..self.order)
                .map(|b| self.mul(a, b).to_string())
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// The register permutation `R |x g, g> = |x^2 g, x g>` on a register of
/// dimension `reg >= order`; padding basis states are fixed.
pub fn group_permutation(spec: &GroupSpec, reg: usize) -> Result<Permutation> {
    let n = spec.order();
    assert!(reg >= n);
    let idx = |a: usize, b: usize| a * reg + b;
    let mut map: Vec<usize> = (0..reg * reg).collect();
    for x in 0..n {
        let xx = spec.mul(x, x);
        for g in 0..n {
            map[idx(spec.mul(x, g), g)] = idx(spec.mul(xx, g), spec.mul(x, g));
        }
    }
    Permutation::from_map(map)
}

pub fn group_encoding(spec: &GroupSpec, mu: &[f64]) -> Result<BlockEncoding> {
    group_encoding_with(spec, mu, EncodingOptions::default())
}

pub fn group_encoding_with(
    spec: &GroupSpec,
    mu: &[f64],
    opts: EncodingOptions,
) -> Result<BlockEncoding> {
    let p = generate(&ChainFamily::GroupChain {
        group: spec.clone(),
        mu: mu.to_vec(),
    })?;
    let prep = state_prep_with(&p, opts)?;
    let r = group_permutation(spec, prep.register_dim())?;
    Ok(BlockEncoding::new(EncodingKind::Group, prep, r.inverse()))
}

/// Whether `mu(x) = mu(x^-1)` for every element.
pub fn mu_is_reversible(spec: &GroupSpec, mu: &[f64]) -> bool {
    mu.len() == spec.order()
        && (0..spec.order()).all(|x| (mu[x] - mu[spec.inverse(x)]).abs() <= STRUCTURAL_TOL)
}
