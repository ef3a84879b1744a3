//! Experiment sweeps over chain size and filter band, emitted as CSV rows.

use rayon::prelude::*;
use serde::Serialize;

use crate::encoding::szegedy_encoding;
use crate::ensemble::substream;
use crate::error::{Error, Result};
use crate::estimator::{relative_prime_check, GapProblem, ThresholdConfig};
use crate::filter::{dolph_filter_with, sign_filter, t_star, DolphParams};
use crate::markov::{generate, ChainFamily};
use crate::oracle::exact_gaps;
use rand::RngCore;

#[derive(Debug, Clone, Serialize)]
pub struct EstimateSweep {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub eps_gamma: f64,
    pub p_f: f64,
    pub seed: u64,
    pub config: ThresholdConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub queries: u64,
    pub rounds: usize,
    pub gamma_hat: f64,
    pub gamma_true: f64,
    pub success: bool,
    pub max_filter_degree: usize,
    /// Shrink, budget and round-count checks on the bisection trace.
    pub mechanics_ok: bool,
}

/// Seed of repetition `rep` at size `n`, drawn from its own substream.
pub fn run_seed(seed: u64, n: usize, rep: usize) -> u64 {
    substream(seed, ((n as u64) << 20) | rep as u64).next_u64()
}

/// One estimation per `(N, rep)` on `family(N)`, in parallel; rows come back
/// in `(N, rep)` order regardless of scheduling.
pub fn estimate_sweep(
    family: impl Fn(usize) -> ChainFamily + Sync,
    sweep: &EstimateSweep,
) -> Result<Vec<EstimateRow>> {
    if sweep.ns.is_empty() {
        return Err(Error::BadParams("sweep needs at least one N".into()));
    }
    if sweep.reps == 0 {
        return Err(Error::BadParams(
            "sweep needs at least one repetition".into(),
        ));
    }
    let problems = sweep
        .ns
        .iter()
        .map(|&n| {
            let p = generate(&family(n))?;
            let gamma_true = exact_gaps(&p).1;
            Ok((n, GapProblem::new(&szegedy_encoding(&p)?)?, gamma_true))
        })
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|k| (0..sweep.reps).map(move |rep| (k, rep)))
        .collect();
    tasks
        .par_iter()
        .map(|&(k, rep)| {
            let (n, problem, gamma_true) = &problems[k];
            let seed = run_seed(sweep.seed, *n, rep);
            let cfg = ThresholdConfig {
                seed,
                ..sweep.config
            };
            let est = problem.estimate(sweep.eps_gamma, sweep.p_f, &cfg)?;
            Ok(EstimateRow {
                n: *n,
                rep,
                seed,
                queries: est.total_queries(),
                rounds: est.rounds.len(),
                gamma_hat: est.gamma_hat,
                gamma_true: *gamma_true,
                success: relative_prime_check(est.gamma_hat, *gamma_true, sweep.eps_gamma),
                max_filter_degree: est
                    .rounds
                    .iter()
                    .filter_map(|r| r.filter_degree)
                    .max()
                    .unwrap_or(0),
                mechanics_ok: est.mechanics().holds(sweep.p_f),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeRow {
    pub delta: f64,
    pub t: f64,
    pub alpha: f64,
    pub sign_degree: usize,
    /// Absent when the band is infeasible for the Dolph construction.
    pub dolph_degree: Option<usize>,
}

/// Sign and Dolph degrees at `t = max(t_min, t*)` for each `delta`.
pub fn degree_sweep(
    deltas: &[f64],
    alpha: f64,
    t_min: f64,
    params: &DolphParams,
) -> Result<Vec<DegreeRow>> {
    if deltas.is_empty() {
        return Err(Error::BadParams("sweep needs at least one delta".into()));
    }
    let t = t_min.max(t_star(alpha, params.k, params.k_tilde)?.t_star);
    deltas
        .iter()
        .map(|&delta| {
            Ok(DegreeRow {
                delta,
                t,
                alpha,
                sign_degree: sign_filter(delta, t, alpha)?.degree(),
                dolph_degree: dolph_filter_with(delta, t, alpha, params)
                    .ok()
                    .map(|p| p.degree()),
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn estimate_csv(rows: &[EstimateRow]) -> String {
    let mut out = String::from(
        "n,rep,seed,queries,rounds,gamma_hat,gamma_true,success,max_filter_degree,mechanics_ok\n",
    );
    for r in rows {
        out += &format!(
            "{},{},{},{},{},{:e},{:e},{},{},{}\n",
            r.n,
            r.rep,
            r.seed,
            r.queries,
            r.rounds,
            r.gamma_hat,
            r.gamma_true,
            r.success,
            r.max_filter_degree,
            r.mechanics_ok
        );
    }
    out
}

pub fn degree_csv(rows: &[DegreeRow]) -> String {
    let mut out = String::from("delta,t,alpha,sign_degree,dolph_degree\n");
    for r in rows {
        let dolph = r.dolph_degree.map_or(String::new(), |d| d.to_string());
        out += &format!(
            "{:e},{:e},{:e},{},{}\n",
            r.delta, r.t, r.alpha, r.sign_degree, dolph
        );
    }
    out
}
