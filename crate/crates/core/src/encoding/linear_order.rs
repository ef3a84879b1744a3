use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{state_prep_with, BlockEncoding, EncodingKind, EncodingOptions, Permutation};
use crate::error::{Error, Result};
use crate::markov::{TransitionMatrix, STRUCTURAL_TOL};

/// A d-out-regular chain: state `x` steps to `neighbors[i][x]` with
/// probability `step_probs[i]`, independent of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOrderSpec {
    n_states: usize,
    neighbors: Vec<Vec<usize>>,
    step_probs: Vec<f64>,
}

impl LinearOrderSpec {
    pub fn new(n_states: usize, neighbors: Vec<Vec<usize>>, step_probs: Vec<f64>) -> Result<Self> {
        if n_states == 0 || neighbors.is_empty() {
            return Err(Error::BadParams(
                "need at least one state and one neighbour function".into(),
            ));
        }
        if step_probs.len() != neighbors.len() {
            return Err(Error::DimensionMismatch {
                expected: neighbors.len(),
                found: step_probs.len(),
            });
        }
        if step_probs.iter().any(|&q| !(q >= 0.0)) {
            return Err(Error::BadParams(
                "step probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = step_probs.iter().sum();
        if (total - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::BadParams(format!(
                "step probabilities sum to {total}"
            )));
        }
        for f in &neighbors {
            if f.len() != n_states {
                return Err(Error::DimensionMismatch {
                    expected: n_states,
                    found: f.len(),
                });
            }
            if f.iter().any(|&y| y >= n_states) {
                return Err(Error::BadParams("neighbour index out of range".into()));
            }
        }
        for x in 0..n_states {
            let mut images: Vec<usize> = neighbors.iter().map(|f| f[x]).collect();
            images.sort_unstable();
            if images.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::BadParams(format!(
                    "state {x} has repeated out-neighbours"
                )));
            }
        }
        Ok(Self {
            n_states,
            neighbors,
            step_probs,
        })
    }

    /// The directed cycle `x -> x + 1 mod N`.
    pub fn directed_cycle(n: usize) -> Result<Self> {
        Self::new(n, vec![(0..n).map(|x| (x + 1) % n).collect()], vec![1.0])
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn out_degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn step_probs(&self) -> &[f64] {
        &self.step_probs
    }

    pub fn to_transition_matrix(&self) -> Result<TransitionMatrix> {
        let n = self.n_states;
        let mut m = DMatrix::zeros(n, n);
        for (f, &q) in self.neighbors.iter().zip(&self.step_probs) {
            for x in 0..n {
                m[(x, f[x])] += q;
            }
        }
        TransitionMatrix::new(m)
    }

    /// File layout: `N`, `d`, then `d` neighbour rows, then `d` probabilities.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
        let mut next_usize = |what: &str| -> Result<(usize, usize)> {
            let (line, tok) = tokens.next().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing {what}"),
            })?;
            tok.parse().map(|v| (line, v)).map_err(|_| Error::Parse {
                line,
                message: format!("bad {what} {tok:?}"),
            })
        };
        let (_, n) = next_usize("state count")?;
        let (_, d) = next_usize("out-degree")?;
        let mut neighbors = Vec::with_capacity(d);
        for _ in 0..d {
            let row = (0..n)
                .map(|_| next_usize("neighbour").map(|(_, v)| v))
                .collect::<Result<Vec<_>>>()?;
            neighbors.push(row);
        }
        let mut rest = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .skip(2 + n * d);
        let mut probs = Vec::with_capacity(d);
        for _ in 0..d {
            let (line, tok) = rest.next().ok_or_else(|| Error::Parse {
                line: 0,
                message: "missing probability".into(),
            })?;
            probs.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?);
        }
        if let Some((line, _)) = rest.next() {
            return Err(Error::Parse {
                line,
                message: "trailing content".into(),
            });
        }
        Self::new(n, neighbors, probs)
    }

    pub fn format(&self) -> String {
        let mut out = format!("{}\n{}\n", self.n_states, self.out_degree());
        for f in &self.neighbors {
            let row: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        let probs: Vec<String> = self.step_probs.iter().map(|q| format!("{q:?}")).collect();
        let _ = writeln!(out, "{}", probs.join(" "));
        out
    }
}

/// `R |f_i(x), x> = |f_i(f_i(x)), f_i(x)>` on the edge states, extended to
/// the rest of the register by matching the leftover basis states in
/// ascending order.
pub fn linear_order_permutation(spec: &LinearOrderSpec, reg: usize) -> Result<Permutation> {
    assert!(reg >= spec.n_states);
    let idx = |a: usize, b: usize| a * reg + b;
    let mut partial = Vec::with_capacity(spec.n_states * spec.out_degree());
    for f in &spec.neighbors {
        for x in 0..spec.n_states {
            let y = f[x];
            partial.push((idx(y, x), idx(f[y], y)));
        }
    }
    Permutation::complete(reg * reg, &partial).map_err(|(a, b)| {
        Error::NotPermutation(format!("edge state {a} or its image {b} is hit twice"))
    })
}

pub fn linear_order_encoding(spec: &LinearOrderSpec) -> Result<BlockEncoding> {
    linear_order_encoding_with(spec, EncodingOptions::default())
}

pub fn linear_order_encoding_with(
    spec: &LinearOrderSpec,
    opts: EncodingOptions,
) -> Result<BlockEncoding> {
    let p = spec.to_transition_matrix()?;
    let prep = state_prep_with(&p, opts)?;
    let r = linear_order_permutation(spec, prep.register_dim())?;
    Ok(BlockEncoding::new(
        EncodingKind::LinearOrder,
        prep,
        r.inverse(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{extract_block, verify_encoding, ENCODING_TOL};
    use crate::markov::{generate, is_doubly_stochastic, ChainFamily};

    #[test]
    fn cycles_encode_exactly() {
        for n in 1..=16 {
            let spec = LinearOrderSpec::directed_cycle(n).unwrap();
            let be = linear_order_encoding(&spec).unwrap();
            let cycle = generate(&ChainFamily::CyclePermutation { n }).unwrap();
            assert!(
                verify_encoding(&be, cycle.matrix(), ENCODING_TOL)
                    .unwrap()
                    .passed(),
                "n={n}"
            );
            assert!(be.unitarity_residual() <= 1e-12);
        }
    }

    #[test]
    fn lazy_directed_cycle() {
        let n = 5;
        let spec = LinearOrderSpec::new(
            n,
            vec![(0..n).collect(), (0..n).map(|x| (x + 1) % n).collect()],
            vec![0.5, 0.5],
        )
        .unwrap();
        let be = linear_order_encoding(&spec).unwrap();
        let target = DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j || j == (i + 1) % n { 0.5 } else { 0.0 },
        );
        assert!(verify_encoding(&be, &target, ENCODING_TOL)
            .unwrap()
            .passed());
        assert!(is_doubly_stochastic(
            &spec.to_transition_matrix().unwrap(),
            1e-12
        ));
    }

    #[test]
    fn self_loop_state() {
        let spec = LinearOrderSpec::new(1, vec![vec![0]], vec![1.0]).unwrap();
        let block = extract_block(&linear_order_encoding(&spec).unwrap());
        assert_eq!(block[(0, 0)], 1.0);
    }

    #[test]
    fn collisions_are_rejected() {
        // everything collapses onto state 0
        let spec = LinearOrderSpec::new(3, vec![vec![0, 0, 0]], vec![1.0]).unwrap();
        assert!(matches!(
            linear_order_encoding(&spec),
            Err(Error::NotPermutation(_))
        ));
        assert!(
            LinearOrderSpec::new(3, vec![vec![1, 2, 0], vec![1, 0, 1]], vec![0.5, 0.5]).is_err()
        );
    }

    #[test]
    fn file_round_trip() {
        let spec = LinearOrderSpec::new(
            4,
            vec![vec![1, 2, 3, 0], vec![3, 0, 1, 2]],
            vec![0.25, 0.75],
        )
        .unwrap();
        assert_eq!(LinearOrderSpec::parse(&spec.format()).unwrap(), spec);
        assert!(LinearOrderSpec::parse("2\n1\n1 0\n").is_err());
    }

    #[test]
    fn permutation_property() {
        let spec = LinearOrderSpec::new(
            4,
            vec![vec![1, 2, 3, 0], vec![3, 0, 1, 2]],
            vec![0.25, 0.75],
        )
        .unwrap();
        let dense = linear_order_permutation(&spec, 4).unwrap().to_dense();
        for k in 0..16 {
            assert_eq!(dense.row(k).sum(), 1.0);
            assert_eq!(dense.column(k).sum(), 1.0);
        }
        let be = linear_order_encoding(&spec).unwrap();
        let p = spec.to_transition_matrix().unwrap();
        assert!(verify_encoding(&be, p.matrix(), ENCODING_TOL)
            .unwrap()
            .passed());
    }
}
