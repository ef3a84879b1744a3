//! Emulated quantum counting, second-singular-value thresholding and the
//! bisection singular-gap estimator.

use rand::Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::Serialize;

use crate::encoding::{BlockEncoding, EncodingKind};
use crate::ensemble::{sample_state, substream, EnsembleSpec};
use crate::error::{Error, Result};
use crate::filter::{
    dolph_filter_with, sign_filter, t_star, DolphParams, FilterKind, FilterPolynomial,
};
use crate::markov::{is_doubly_stochastic, TransitionMatrix, STRUCTURAL_TOL};
use crate::qsvt::{
    sv_transform_factors, transformed_weight, LedgerEntry, QueryLedger, SvdFactors, TransformMode,
};

/// Per-trial probability that a Haar state puts at least half its expected
/// weight on a fixed direction, `exp(-1/2)`.
pub fn detection_probability() -> f64 {
    (-0.5f64).exp()
}

const TOP_SINGULAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// Initial states orthogonal to the known top singular vector.
    #[default]
    Complement,
    /// Haar initial states and the literal counting constants.
    Paper,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterPreference {
    #[default]
    Auto,
    SignOnly,
    DolphOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QCountMode {
    /// Compare the exact weight against the midpoint threshold.
    #[default]
    Exact,
    /// Compare a binomial estimate from `iterations^2` shots instead.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdConfig {
    pub c_tilde_l: f64,
    pub kappa: f64,
    /// Trials per threshold call; derived from the failure budget when absent.
    pub trials: Option<usize>,
    pub mode: EstimatorMode,
    pub filter_preference: FilterPreference,
    pub transform: TransformMode,
    pub dolph: DolphParams,
    pub qcount_mode: QCountMode,
    pub gap_floor: f64,
    pub seed: u64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            c_tilde_l: 0.125,
            kappa: 2.0,
            trials: None,
            mode: EstimatorMode::Complement,
            filter_preference: FilterPreference::Auto,
            transform: TransformMode::Ideal,
            dolph: DolphParams::default(),
            qcount_mode: QCountMode::Exact,
            gap_floor: 1e-6,
            seed: 0,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_tilde_l > 0.0 && self.c_tilde_l < 0.25) {
            return Err(Error::BadParams(format!(
                "c~_l = {} outside (0, 1/4)",
                self.c_tilde_l
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::BadParams("kappa must be positive".into()));
        }
        if self.trials == Some(0) {
            return Err(Error::BadParams("at least one trial is required".into()));
        }
        if !(self.gap_floor > 0.0) {
            return Err(Error::BadParams("gap floor must be positive".into()));
        }
        Ok(())
    }

    /// `(c_l, c_u)` for a filter with value `f_at_1` at `sigma = 1`.
    pub fn counting_thresholds(&self, f_at_1: f64) -> (f64, f64) {
        match self.mode {
            EstimatorMode::Complement => (self.c_tilde_l, 1.0 / (4.0 * std::f64::consts::SQRT_2)),
            EstimatorMode::Paper => {
                let cl2 = self.c_tilde_l.powi(2) + f_at_1 * f_at_1;
                (cl2.sqrt(), (cl2 + 1.0 / 16.0).sqrt())
            }
        }
    }

    pub fn trials_for(&self, p_f: f64) -> usize {
        self.trials.unwrap_or_else(|| trials_for(p_f))
    }
}

/// `ceil(ln(1/p_f) / ln(1/(1 - p_1)))` trials push the miss probability below `p_f`.
pub fn trials_for(p_f: f64) -> usize {
    let per_trial_miss = 1.0 - detection_probability();
    (((1.0 / p_f).ln() / (1.0 / per_trial_miss).ln()).ceil() as usize).max(1)
}

/// State preparations per counting call, `ceil(kappa sqrt N)`.
pub fn qcount_iterations(kappa: f64, n: usize) -> u64 {
    (kappa * (n as f64).sqrt()).ceil() as u64
}

/// Price of one counting call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QCountCost {
    pub round: usize,
    pub filter_degree: usize,
    pub queries_per_use: u64,
    pub lcu_factor: u64,
    pub iterations: u64,
}

fn qcount_decide(a_squared: f64, c_l: f64, c_u: f64, n: usize) -> Result<bool> {
    if !(-1e-12..=1.0 + 1e-9).contains(&a_squared) {
        return Err(Error::DomainError(format!(
            "weight {a_squared} outside [0, 1]"
        )));
    }
    if !(c_l < c_u) {
        return Err(Error::DomainError(format!(
            "need c_l < c_u, got {c_l} >= {c_u}"
        )));
    }
    let midpoint = (c_l * c_l + c_u * c_u) / (2.0 * n as f64);
    Ok(a_squared >= midpoint)
}

/// Decides whether `a^2` is below `c_l^2/N` (0) or above `c_u^2/N` (1);
/// values in between go to whichever side of the midpoint they fall on,
/// ties to 1. Charges one counting call to the ledger.
pub fn qcount(
    a_squared: f64,
    c_l: f64,
    c_u: f64,
    n: usize,
    cost: QCountCost,
    ledger: &mut QueryLedger,
) -> Result<bool> {
    let bit = qcount_decide(a_squared, c_l, c_u, n)?;
    ledger.charge(LedgerEntry {
        round: cost.round,
        filter_degree: cost.filter_degree,
        queries_per_use: cost.queries_per_use,
        qcount_iterations: cost.iterations,
        trials: 1,
        lcu_factor: cost.lcu_factor,
    });
    Ok(bit)
}

fn qcount_sampled(
    a_squared: f64,
    c_l: f64,
    c_u: f64,
    n: usize,
    iterations: u64,
    rng: &mut impl Rng,
) -> Result<bool> {
    qcount_decide(a_squared, c_l, c_u, n)?;
    let shots = iterations * iterations;
    let hits = Binomial::new(shots, a_squared.clamp(0.0, 1.0))
        .map_err(|e| Error::DomainError(e.to_string()))?
        .sample(rng);
    qcount_decide(hits as f64 / shots as f64, c_l, c_u, n)
}

/// Dolph filter when `eps_abs / L >= t*` and `L <= delta*` (falling back to
/// the sign filter if the Dolph degree window is empty), sign filter otherwise.
pub fn choose_filter(
    l: f64,
    eps_abs: f64,
    alpha: f64,
    preference: FilterPreference,
    dolph: &DolphParams,
) -> Result<FilterPolynomial> {
    let t = eps_abs / l;
    match preference {
        FilterPreference::SignOnly => sign_filter(l, t, alpha),
        FilterPreference::DolphOnly => dolph_filter_with(l, t, alpha, dolph),
        FilterPreference::Auto => {
            let ts = t_star(alpha, dolph.k, dolph.k_tilde)?;
            if t >= ts.t_star && l <= dolph.delta_star {
                match dolph_filter_with(l, t, alpha, dolph) {
                    Ok(p) => return Ok(p),
                    Err(Error::InfeasibleBand(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            sign_filter(l, t, alpha)
        }
    }
}

/// Result of one thresholding call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdOutcome {
    pub bit: bool,
    pub filter_kind: FilterKind,
    pub filter_degree: usize,
    pub t: f64,
    pub alpha: f64,
    pub trials: usize,
    pub weights: Vec<f64>,
}

/// A block with its decomposition and known top vector, reused across rounds.
#[derive(Debug, Clone)]
pub struct GapProblem {
    factors: SvdFactors,
    top_vector: Vec<f64>,
}

/// Known top right singular vector: uniform for doubly-stochastic chains
/// and for group/linear-order encodings, `sqrt(pi)` for the symmetrised
/// discriminant of any other chain.
pub fn known_top_vector(be: &BlockEncoding) -> Result<Vec<f64>> {
    let p = chain_of(be)?;
    let n = p.n();
    if be.kind() != EncodingKind::Szegedy || is_doubly_stochastic(&p, STRUCTURAL_TOL) {
        return Ok(vec![1.0 / (n as f64).sqrt(); n]);
    }
    Ok(crate::oracle::oracle_stationary(&p)?
        .iter()
        .map(|x| x.sqrt())
        .collect())
}

/// Recovers `P` from the state-preparation amplitudes of an encoding.
pub fn chain_of(be: &BlockEncoding) -> Result<TransitionMatrix> {
    let prep = be.state_prep();
    let n = prep.chain_size();
    TransitionMatrix::new(nalgebra::DMatrix::from_fn(n, n, |i, j| {
        prep.amplitudes(i)[j].powi(2)
    }))
}

impl GapProblem {
    pub fn new(be: &BlockEncoding) -> Result<Self> {
        let top = known_top_vector(be)?;
        Self::with_top_vector(be, top)
    }

    pub fn with_top_vector(be: &BlockEncoding, top_vector: Vec<f64>) -> Result<Self> {
        if be.scale() != 1.0 {
            return Err(Error::ScaledEncoding(be.scale()));
        }
        let factors = SvdFactors::of(&crate::encoding::extract_block(be));
        let sigma1 = factors.singular_values[0];
        if (sigma1 - 1.0).abs() > TOP_SINGULAR_TOL {
            return Err(Error::BadParams(format!(
                "top singular value {sigma1} is not 1"
            )));
        }
        if top_vector.len() != factors.n() {
            return Err(Error::DimensionMismatch {
                expected: factors.n(),
                found: top_vector.len(),
            });
        }
        Ok(Self {
            factors,
            top_vector,
        })
    }

    pub fn n(&self) -> usize {
        self.factors.n()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.factors.singular_values
    }

    fn ensemble(&self, cfg: &ThresholdConfig) -> Result<EnsembleSpec> {
        match cfg.mode {
            EstimatorMode::Complement => {
                EnsembleSpec::complement(self.top_vector.clone(), cfg.seed)
            }
            EstimatorMode::Paper => Ok(EnsembleSpec::haar(self.n(), cfg.seed)),
        }
    }

    /// One call of the thresholding routine with band `[L - eps, L + eps]`
    /// on the gap; every trial runs and the counting bits are OR-ed.
    pub fn threshold(
        &self,
        l: f64,
        eps_abs: f64,
        p_f: f64,
        cfg: &ThresholdConfig,
        rng: &mut impl Rng,
        round: usize,
        ledger: &mut QueryLedger,
    ) -> Result<ThresholdOutcome> {
        cfg.validate()?;
        if !(l > 0.0 && l < 1.0 && eps_abs > 0.0 && eps_abs < l) {
            return Err(Error::DomainError(format!(
                "need 0 < eps < L < 1, got L = {l}, eps = {eps_abs}"
            )));
        }
        if !(p_f > 0.0 && p_f < 1.0) {
            return Err(Error::DomainError(format!("p_f = {p_f} outside (0, 1)")));
        }
        let n = self.n();
        let alpha = cfg.c_tilde_l / n as f64;
        let filter = choose_filter(l, eps_abs, alpha, cfg.filter_preference, &cfg.dolph)?;
        let te = sv_transform_factors(self.factors.clone(), &filter, cfg.transform);
        let (c_l, c_u) = cfg.counting_thresholds(filter.eval(1.0));
        let trials = cfg.trials_for(p_f);
        let iterations = qcount_iterations(cfg.kappa, n);
        let ensemble = self.ensemble(cfg)?;
        let mut bit = false;
        let mut weights = Vec::with_capacity(trials);
        for _ in 0..trials {
            let phi = sample_state(&ensemble, rng)?;
            let a2 = transformed_weight(&te, &phi)?;
            let b = match cfg.qcount_mode {
                QCountMode::Exact => qcount_decide(a2, c_l, c_u, n)?,
                QCountMode::Stochastic => qcount_sampled(a2, c_l, c_u, n, iterations, rng)?,
            };
            bit |= b;
            weights.push(a2);
        }
        ledger.charge(LedgerEntry {
            round,
            filter_degree: filter.degree(),
            queries_per_use: te.queries_per_use(),
            qcount_iterations: iterations,
            trials: trials as u64,
            lcu_factor: te.lcu_factor(),
        });
        Ok(ThresholdOutcome {
            bit,
            filter_kind: filter.kind(),
            filter_degree: filter.degree(),
            t: eps_abs / l,
            alpha,
            trials,
            weights,
        })
    }

    pub fn estimate(&self, eps_gamma: f64, p_f: f64, cfg: &ThresholdConfig) -> Result<GapEstimate> {
        cfg.validate()?;
        let mut ledger = QueryLedger::new();
        let mut kinds = Vec::new();
        let (gamma_hat, rounds) =
            bisect(eps_gamma, p_f, cfg.gap_floor, |round, l, eps, p_round| {
                let mut rng = substream(cfg.seed, round as u64);
                let out = self.threshold(l, eps, p_round, cfg, &mut rng, round, &mut ledger)?;
                kinds.push((out.filter_kind, out.filter_degree));
                Ok(out.bit)
            })?;
        let rounds = rounds
            .into_iter()
            .zip(kinds)
            .map(|(r, (kind, degree))| RoundTrace {
                filter_kind: Some(kind),
                filter_degree: Some(degree),
                ..r
            })
            .collect();
        Ok(GapEstimate {
            gamma_hat,
            eps_gamma,
            p_f,
            ledger,
            rounds,
            succeeded: None,
        })
    }
}

/// Stand-alone thresholding call on a fresh decomposition, using stream 0
/// of `cfg.seed`.
pub fn singular_threshold(
    be: &BlockEncoding,
    l: f64,
    eps_abs: f64,
    p_f: f64,
    cfg: &ThresholdConfig,
) -> Result<(ThresholdOutcome, QueryLedger)> {
    let problem = GapProblem::new(be)?;
    let mut ledger = QueryLedger::new();
    let out = problem.threshold(
        l,
        eps_abs,
        p_f,
        cfg,
        &mut substream(cfg.seed, 0),
        0,
        &mut ledger,
    )?;
    Ok((out, ledger))
}

pub fn estimate_gap(
    be: &BlockEncoding,
    eps_gamma: f64,
    p_f: f64,
    cfg: &ThresholdConfig,
) -> Result<GapEstimate> {
    GapProblem::new(be)?.estimate(eps_gamma, p_f, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_hat: f64,
    pub eps: f64,
    pub p_f_round: f64,
    pub bit: bool,
    pub gamma_min_after: f64,
    pub gamma_max_after: f64,
    pub filter_kind: Option<FilterKind>,
    pub filter_degree: Option<usize>,
}

/// Bisection over `[0, 1]`: each round queries `oracle(round, gamma_hat,
/// eps, p_round)` with `eps` a quarter of the current width and `p_round`
/// halving every round; a 1 moves the upper end to `gamma_hat + eps`, a 0
/// moves the lower end to `gamma_hat - eps`. Stops once the interval sits
/// inside `[gamma_hat (1 - eps_gamma), gamma_hat (1 + eps_gamma)]`.
pub fn bisect(
    eps_gamma: f64,
    p_f: f64,
    floor: f64,
    mut oracle: impl FnMut(usize, f64, f64, f64) -> Result<bool>,
) -> Result<(f64, Vec<RoundTrace>)> {
    if !(eps_gamma > 0.0 && eps_gamma <= 1.0) {
        return Err(Error::DomainError(format!(
            "eps_gamma = {eps_gamma} outside (0, 1]"
        )));
    }
    if !(p_f > 0.0 && p_f < 1.0) {
        return Err(Error::DomainError(format!("p_f = {p_f} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut p_round = p_f;
    let mut trace = Vec::new();
    loop {
        if hi < floor {
            return Err(Error::GapTooSmall(hi));
        }
        let gamma_hat = 0.5 * (hi + lo);
        let eps = 0.25 * (hi - lo);
        p_round *= 0.5;
        let round = trace.len();
        let bit = oracle(round, gamma_hat, eps, p_round)?;
        let (new_lo, new_hi) = if bit {
            (lo, gamma_hat + eps)
        } else {
            (gamma_hat - eps, hi)
        };
        trace.push(RoundTrace {
            round,
            gamma_min: lo,
            gamma_max: hi,
            gamma_hat,
            eps,
            p_f_round: p_round,
            bit,
            gamma_min_after: new_lo,
            gamma_max_after: new_hi,
            filter_kind: None,
            filter_degree: None,
        });
        lo = new_lo;
        hi = new_hi;
        if lo >= gamma_hat * (1.0 - eps_gamma) && hi <= gamma_hat * (1.0 + eps_gamma) {
            return Ok((gamma_hat, trace));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEstimate {
    pub gamma_hat: f64,
    pub eps_gamma: f64,
    pub p_f: f64,
    pub ledger: QueryLedger,
    pub rounds: Vec<RoundTrace>,
    /// Filled in by callers that know the true gap.
    pub succeeded: Option<bool>,
}

/// Structural checks on a bisection trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BisectionMechanics {
    pub worst_shrink_error: f64,
    pub budget_spent: f64,
    pub rounds: usize,
    pub round_bound: usize,
    pub final_width: f64,
}

impl BisectionMechanics {
    pub fn holds(&self, p_f: f64) -> bool {
        self.worst_shrink_error <= 1e-12
            && self.budget_spent <= p_f
            && self.rounds <= self.round_bound
    }
}

impl GapEstimate {
    pub fn mechanics(&self) -> BisectionMechanics {
        let worst_shrink_error = self
            .rounds
            .iter()
            .map(|r| {
                let before = r.gamma_max - r.gamma_min;
                ((r.gamma_max_after - r.gamma_min_after) - 0.75 * before).abs() / before
            })
            .fold(0.0, f64::max);
        let final_width = self
            .rounds
            .last()
            .map_or(1.0, |r| r.gamma_max_after - r.gamma_min_after);
        BisectionMechanics {
            worst_shrink_error,
            budget_spent: self.rounds.iter().map(|r| r.p_f_round).sum(),
            rounds: self.rounds.len(),
            round_bound: (final_width.ln() / 0.75f64.ln()).ceil() as usize + 1,
            final_width,
        }
    }

    pub fn total_queries(&self) -> u64 {
        self.ledger.total()
    }
}

/// `(1 - eps) gamma_hat <= gamma_true <= (1 + eps) gamma_hat`.
pub fn relative_prime_check(gamma_hat: f64, gamma_true: f64, eps: f64) -> bool {
    (1.0 - eps) * gamma_hat <= gamma_true && gamma_true <= gamma_hat * (1.0 + eps)
}
