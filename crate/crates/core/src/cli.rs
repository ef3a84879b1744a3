//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 on usage errors, 2 when a check fails or the input is rejected.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::encoding::{
    group_encoding_with, linear_order_encoding_with, szegedy_encoding_with, verify_encoding,
    BlockEncoding, EncodingOptions, GroupSpec, LinearOrderSpec, ENCODING_TOL,
};
use crate::ensemble::{moment_check, substream, EnsembleSpec};
use crate::error::Error;
use crate::estimator::{
    relative_prime_check, EstimatorMode, FilterPreference, GapProblem, QCountMode, ThresholdConfig,
};
use crate::filter::{
    dolph_filter_with, monomial_filter, sign_filter, t_star, uniform_grid, verify_filter,
    DolphParams, FilterKind,
};
use crate::markov::io::{format_matrix, parse_raw_matrix, parse_transition_matrix};
use crate::markov::{
    classify, generate, spectral_summary, validate_stochastic, ChainFamily, TransitionMatrix,
    STRUCTURAL_TOL,
};
use crate::oracle::{exact_gaps, oracle_report};
use crate::qsvt::{QueryLedger, TransformMode};
use crate::sweep::{
    degree_csv, degree_sweep, estimate_csv, estimate_sweep, log_log_slope, EstimateSweep,
};

const PLOT_POINTS: usize = 2001;

#[derive(Parser, Debug)]
#[command(
    name = "specgap",
    version,
    about = "Singular-gap estimation for block-encoded Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Print a transition matrix in the matrix text format.
    Gen(GenArgs),
    /// Structural and spectral classification of a chain.
    Classify(ClassifyArgs),
    /// Build a block encoding and check it against its target.
    EncodeCheck(EncodeArgs),
    /// Design a filter polynomial and verify its band.
    Filter(FilterArgs),
    /// One singular-value thresholding call.
    Threshold(ThresholdArgs),
    /// Full bisection estimate of the singular gap.
    Estimate(EstimateArgs),
    /// Monte-Carlo check of the Haar moment identities.
    Moments(MomentArgs),
    /// Exact classical ground truth.
    Oracle(OracleArgs),
    /// Query-count or filter-degree sweep as CSV.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum Family {
    LazyCycle,
    Complete,
    Search,
    CyclePermutation,
    HypercubeLazy,
    SinkhornRandom,
    TwoState,
    RandomStochastic,
    RandomSymmetric,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ChainArgs {
    /// Named chain family.
    #[arg(long, value_enum, conflicts_with_all = ["matrix", "group", "group_preset", "order"])]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    /// Absorbing last state for the search family.
    #[arg(long)]
    marked: bool,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    #[arg(long, default_value_t = 0.2)]
    b: f64,
    /// Seed for the random families.
    #[arg(long, default_value_t = 0)]
    chain_seed: u64,
    /// Matrix file (line 1 = N, then N rows).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Group multiplication-table file; needs --mu.
    #[arg(long, conflicts_with = "group_preset")]
    group: Option<PathBuf>,
    /// Built-in group: cyclic:N, z2:K or sym:K.
    #[arg(long)]
    group_preset: Option<String>,
    /// Step distribution over group elements, comma separated.
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    /// Linear-order spec file (N, d, d neighbor rows, d probabilities).
    #[arg(long)]
    order: Option<PathBuf>,
    /// Pad the register to the next power of two.
    #[arg(long)]
    pad: bool,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Load --matrix without enforcing stochasticity.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EncodeArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = ENCODING_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum KindArg {
    Sign,
    Monomial,
    Dolph,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct DolphArgs {
    #[arg(long, default_value_t = DolphParams::default().k)]
    k: f64,
    #[arg(long, default_value_t = DolphParams::default().k_tilde)]
    k_tilde: f64,
    #[arg(long, default_value_t = DolphParams::default().delta_star)]
    delta_star: f64,
}

impl DolphArgs {
    fn params(&self) -> DolphParams {
        DolphParams {
            k: self.k,
            k_tilde: self.k_tilde,
            delta_star: self.delta_star,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct FilterArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    delta: f64,
    /// Relative half-width; ignored by the monomial filter.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    dolph: DolphArgs,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    /// Write (x, f(x)) over 2001 points of [-1, 1] as CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write the polynomial in the filter text format.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Complement,
    Paper,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum PrefArg {
    Auto,
    SignOnly,
    DolphOnly,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum TransformArg {
    Ideal,
    ParitySplit,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum QCountArg {
    Exact,
    Stochastic,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Complement)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = PrefArg::Auto)]
    filter_preference: PrefArg,
    #[arg(long, value_enum, default_value_t = TransformArg::Ideal)]
    transform: TransformArg,
    #[arg(long, value_enum, default_value_t = QCountArg::Exact)]
    qcount: QCountArg,
    #[arg(long, default_value_t = 0.125)]
    c_tilde_l: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Trials per thresholding call; derived from the failure budget if absent.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    gap_floor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    dolph: DolphArgs,
}

impl EstimatorArgs {
    fn config(&self) -> ThresholdConfig {
        ThresholdConfig {
            c_tilde_l: self.c_tilde_l,
            kappa: self.kappa,
            trials: self.trials,
            mode: match self.mode {
                ModeArg::Complement => EstimatorMode::Complement,
                ModeArg::Paper => EstimatorMode::Paper,
            },
            filter_preference: match self.filter_preference {
                PrefArg::Auto => FilterPreference::Auto,
                PrefArg::SignOnly => FilterPreference::SignOnly,
                PrefArg::DolphOnly => FilterPreference::DolphOnly,
            },
            transform: match self.transform {
                TransformArg::Ideal => TransformMode::Ideal,
                TransformArg::ParitySplit => TransformMode::ParitySplit,
            },
            dolph: self.dolph.params(),
            qcount_mode: match self.qcount {
                QCountArg::Exact => QCountMode::Exact,
                QCountArg::Stochastic => QCountMode::Stochastic,
            },
            gap_floor: self.gap_floor,
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Threshold location L.
    #[arg(long)]
    l: f64,
    /// Absolute half-width around L.
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pf: f64,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Relative precision of the gap estimate.
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pf: f64,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MomentArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pass when both moments are within this many standard errors.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 0.01)]
    tv_eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum SweepKind {
    Estimate,
    Degrees,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepKind::Estimate)]
    kind: SweepKind,
    #[arg(long, value_enum, default_value_t = Family::Search)]
    family: Family,
    /// Absorbing last state for the search family.
    #[arg(long)]
    marked: bool,
    /// Chain sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pf: f64,
    /// Band widths for the degree sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Lower bound on t; the degree sweep uses max(t, t*).
    #[arg(long, default_value_t = 0.6)]
    t: f64,
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    #[arg(long, default_value_t = 0.2)]
    b: f64,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Rejected(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Rejected(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `argv` (program name first), dispatches and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = std::env::var("SPECGAP_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let config = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Classify(a) => classify_cmd(a, config),
        Command::EncodeCheck(a) => encode_check(a, config),
        Command::Filter(a) => filter_cmd(a, config),
        Command::Threshold(a) => threshold_cmd(a, config),
        Command::Estimate(a) => estimate_cmd(a, config),
        Command::Moments(a) => moments_cmd(a, config),
        Command::Oracle(a) => oracle_cmd(a, config),
        Command::Sweep(a) => sweep_cmd(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, report: &Value) -> std::result::Result<(), Failure> {
    let mut text =
        serde_json::to_string_pretty(report).map_err(|e| Failure::Rejected(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

fn read(path: &PathBuf) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn check_open_unit(name: &str, x: f64) -> std::result::Result<(), Failure> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} = {x} must lie in (0, 1)")))
    }
}

fn need_n(chain: &ChainArgs, family: &str) -> std::result::Result<usize, Failure> {
    chain
        .n
        .ok_or_else(|| usage(format!("--family {family} needs --n")))
}

fn family_of(chain: &ChainArgs, family: Family) -> std::result::Result<ChainFamily, Failure> {
    let name = serde_json::to_value(family)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    Ok(match family {
        Family::LazyCycle => ChainFamily::LazyCycle {
            n: need_n(chain, &name)?,
        },
        Family::Complete => ChainFamily::Complete {
            n: need_n(chain, &name)?,
        },
        Family::Search => ChainFamily::Search {
            n: need_n(chain, &name)?,
            marked: chain.marked,
        },
        Family::CyclePermutation => ChainFamily::CyclePermutation {
            n: need_n(chain, &name)?,
        },
        Family::HypercubeLazy => ChainFamily::HypercubeLazy {
            dim: chain
                .dim
                .ok_or_else(|| usage("--family hypercube_lazy needs --dim"))?,
        },
        Family::SinkhornRandom => ChainFamily::SinkhornRandom {
            n: need_n(chain, &name)?,
            seed: chain.chain_seed,
        },
        Family::TwoState => ChainFamily::TwoState {
            a: chain.a,
            b: chain.b,
        },
        Family::RandomStochastic => ChainFamily::RandomStochastic {
            n: need_n(chain, &name)?,
            seed: chain.chain_seed,
        },
        Family::RandomSymmetric => ChainFamily::RandomSymmetric {
            n: need_n(chain, &name)?,
            seed: chain.chain_seed,
        },
    })
}

fn group_of(chain: &ChainArgs) -> std::result::Result<Option<GroupSpec>, Failure> {
    if let Some(path) = &chain.group {
        return Ok(Some(GroupSpec::parse(&read(path)?)?));
    }
    let Some(preset) = &chain.group_preset else {
        return Ok(None);
    };
    let (name, arg) = preset
        .split_once(':')
        .ok_or_else(|| usage(format!("bad group preset {preset:?}")))?;
    let k: usize = arg
        .parse()
        .map_err(|_| usage(format!("bad group preset {preset:?}")))?;
    let spec = match name {
        "cyclic" => GroupSpec::cyclic(k)?,
        "z2" => GroupSpec::z2_power(k)?,
        "sym" => GroupSpec::symmetric(k)?,
        _ => return Err(usage(format!("unknown group preset {name:?}"))),
    };
    Ok(Some(spec))
}

/// The chain a set of chain flags describes.
fn chain_of(chain: &ChainArgs) -> std::result::Result<TransitionMatrix, Failure> {
    if let Some(path) = &chain.matrix {
        return Ok(parse_transition_matrix(&read(path)?)?);
    }
    if let Some(group) = group_of(chain)? {
        return Ok(generate(&ChainFamily::GroupChain {
            group,
            mu: chain.mu.clone(),
        })?);
    }
    if let Some(path) = &chain.order {
        return Ok(LinearOrderSpec::parse(&read(path)?)?.to_transition_matrix()?);
    }
    let family = chain.family.ok_or_else(|| {
        usage("one of --family, --matrix, --group, --group-preset, --order is required")
    })?;
    Ok(generate(&family_of(chain, family)?)?)
}

/// Encoding selected by the chain flags together with the matrix it should
/// carry in its top-left block.
fn encoding_of(chain: &ChainArgs) -> std::result::Result<(BlockEncoding, DMatrix<f64>), Failure> {
    let opts = EncodingOptions {
        pad_to_power_of_two: chain.pad,
    };
    if let Some(group) = group_of(chain)? {
        let be = group_encoding_with(&group, &chain.mu, opts)?;
        let p = generate(&ChainFamily::GroupChain {
            group,
            mu: chain.mu.clone(),
        })?;
        return Ok((be, p.into_matrix()));
    }
    if let Some(path) = &chain.order {
        let spec = LinearOrderSpec::parse(&read(path)?)?;
        let be = linear_order_encoding_with(&spec, opts)?;
        return Ok((be, spec.to_transition_matrix()?.into_matrix()));
    }
    let p = chain_of(chain)?;
    let be = szegedy_encoding_with(&p, opts)?;
    Ok((be, crate::markov::symmetrised_discriminant(&p)))
}

fn gen(a: &GenArgs) -> Outcome {
    let p = chain_of(&a.chain)?;
    emit(&a.out, &format_matrix(p.matrix()))?;
    Ok(true)
}

fn classify_cmd(a: &ClassifyArgs, config: Value) -> Outcome {
    if a.raw {
        let path = a
            .chain
            .matrix
            .as_ref()
            .ok_or_else(|| usage("--raw needs --matrix"))?;
        let raw = parse_raw_matrix(&read(path)?)?;
        if let Err(e) = validate_stochastic(&raw) {
            let report = json!({ "config": config, "n": raw.nrows(), "stochastic": false, "violation": e.to_string() });
            emit_json(&a.out, &report)?;
            return Ok(false);
        }
    }
    let p = chain_of(&a.chain)?;
    let report = json!({
        "config": config,
        "n": p.n(),
        "stochastic": true,
        "class": classify(&p, STRUCTURAL_TOL),
        "spectral": spectral_summary(&p),
    });
    emit_json(&a.out, &report)?;
    Ok(true)
}

fn encode_check(a: &EncodeArgs, config: Value) -> Outcome {
    if !(a.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    let (be, target) = encoding_of(&a.chain)?;
    let check = verify_encoding(&be, &target, a.tol)?;
    let unitarity = be.unitarity_residual();
    let passed = check.passed() && unitarity <= a.tol;
    let report = json!({
        "config": config,
        "kind": be.kind(),
        "n": be.target_n(),
        "dim": be.dim(),
        "block_residual": check.residual,
        "unitarity_residual": unitarity,
        "tolerance": a.tol,
        "passed": passed,
    });
    emit_json(&a.out, &report)?;
    Ok(passed)
}

fn filter_cmd(a: &FilterArgs, config: Value) -> Outcome {
    if !(a.delta > 0.0 && a.delta <= 1.0) {
        return Err(usage(format!("--delta = {} must lie in (0, 1]", a.delta)));
    }
    check_open_unit("alpha", a.alpha)?;
    if a.kind != KindArg::Monomial {
        check_open_unit("t", a.t)?;
    }
    if a.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let params = a.dolph.params();
    let p = match a.kind {
        KindArg::Sign => sign_filter(a.delta, a.t, a.alpha)?,
        KindArg::Monomial => monomial_filter(a.delta, a.alpha)?,
        KindArg::Dolph => dolph_filter_with(a.delta, a.t, a.alpha, &params)?,
    };
    let report = verify_filter(&p, a.grid);
    if let Some(path) = &a.plot {
        let mut csv = String::from("x,f\n");
        for x in uniform_grid(-1.0, 1.0, PLOT_POINTS) {
            csv += &format!("{x:e},{:e}\n", p.eval(x));
        }
        emit(&Some(path.clone()), &csv)?;
    }
    if let Some(path) = &a.export {
        emit(&Some(path.clone()), &p.to_text())?;
    }
    let t_star = match a.kind {
        KindArg::Dolph => t_star(a.alpha, params.k, params.k_tilde).ok(),
        _ => None,
    };
    let out = json!({
        "config": config,
        "kind": p.kind(),
        "degree": p.degree(),
        "band": p.band(),
        "stop_allowance": p.stop_allowance(),
        "t_star": t_star,
        "check": report,
        "passed": report.passed(),
    });
    emit_json(&a.out, &out)?;
    Ok(report.passed())
}

fn check_estimator(e: &EstimatorArgs, pf: f64) -> std::result::Result<ThresholdConfig, Failure> {
    check_open_unit("pf", pf)?;
    let cfg = e.config();
    cfg.validate().map_err(|err| usage(err.to_string()))?;
    Ok(cfg)
}

fn threshold_cmd(a: &ThresholdArgs, config: Value) -> Outcome {
    let cfg = check_estimator(&a.estimator, a.pf)?;
    if !(a.l > 0.0 && a.l < 1.0 && a.eps > 0.0 && a.eps < a.l) {
        return Err(usage(format!(
            "need 0 < eps < L < 1, got L = {}, eps = {}",
            a.l, a.eps
        )));
    }
    let (be, _) = encoding_of(&a.chain)?;
    let problem = GapProblem::new(&be)?;
    let mut ledger = QueryLedger::new();
    let mut rng = substream(cfg.seed, 0);
    let outcome = problem.threshold(a.l, a.eps, a.pf, &cfg, &mut rng, 0, &mut ledger)?;
    let sigma2 = problem.singular_values().get(1).copied().unwrap_or(0.0);
    let report = json!({
        "config": config,
        "resolved": cfg,
        "n": problem.n(),
        "singular_gap": 1.0 - sigma2,
        "outcome": outcome,
        "ledger": ledger,
        "total_queries": ledger.total(),
    });
    emit_json(&a.out, &report)?;
    Ok(true)
}

fn estimate_cmd(a: &EstimateArgs, config: Value) -> Outcome {
    let cfg = check_estimator(&a.estimator, a.pf)?;
    if !(a.eps > 0.0 && a.eps <= 1.0) {
        return Err(usage(format!("--eps = {} must lie in (0, 1]", a.eps)));
    }
    let (be, _) = encoding_of(&a.chain)?;
    let p = crate::estimator::chain_of(&be)?;
    let gamma_true = exact_gaps(&p).1;
    let mut est = GapProblem::new(&be)?.estimate(a.eps, a.pf, &cfg)?;
    est.succeeded = Some(relative_prime_check(est.gamma_hat, gamma_true, a.eps));
    let kinds: Vec<Option<FilterKind>> = est.rounds.iter().map(|r| r.filter_kind).collect();
    let report = json!({
        "config": config,
        "resolved": cfg,
        "chain": chain_descriptor(&a.chain),
        "n": p.n(),
        "mode": cfg.mode,
        "eps_gamma": est.eps_gamma,
        "p_f": est.p_f,
        "seed": cfg.seed,
        "gamma_hat": est.gamma_hat,
        "gamma_true": gamma_true,
        "succeeded": est.succeeded,
        "filter_kinds": kinds,
        "rounds": est.rounds,
        "mechanics": est.mechanics(),
        "ledger": est.ledger,
        "total_queries": est.total_queries(),
    });
    emit_json(&a.out, &report)?;
    Ok(true)
}

fn chain_descriptor(chain: &ChainArgs) -> Value {
    if let Some(path) = &chain.matrix {
        return json!({ "matrix": path });
    }
    if chain.group.is_some() || chain.group_preset.is_some() {
        return json!({ "group": chain.group, "group_preset": chain.group_preset, "mu": chain.mu });
    }
    if let Some(path) = &chain.order {
        return json!({ "order": path });
    }
    chain
        .family
        .and_then(|f| family_of(chain, f).ok())
        .map_or(Value::Null, |f| {
            serde_json::to_value(f).unwrap_or(Value::Null)
        })
}

fn moments_cmd(a: &MomentArgs, config: Value) -> Outcome {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    if a.trials < 1000 {
        return Err(usage("--trials must be at least 1000"));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); a.n];
    psi[0] = Complex64::new(1.0, 0.0);
    let est = moment_check(&EnsembleSpec::haar(a.n, a.seed), &psi, a.trials)?;
    let passed = est.within(a.sigmas);
    emit_json(
        &a.out,
        &json!({ "config": config, "estimate": est, "passed": passed }),
    )?;
    Ok(passed)
}

fn oracle_cmd(a: &OracleArgs, config: Value) -> Outcome {
    check_open_unit("tv-eps", a.tv_eps)?;
    let p = chain_of(&a.chain)?;
    emit_json(
        &a.out,
        &json!({ "config": config, "report": oracle_report(&p, a.tv_eps) }),
    )?;
    Ok(true)
}

fn sweep_cmd(a: &SweepArgs) -> Outcome {
    match a.kind {
        SweepKind::Estimate => {
            if a.ns.is_empty() {
                return Err(usage("--ns must list at least one N"));
            }
            if a.reps == 0 {
                return Err(usage("--reps must be positive"));
            }
            if !(a.eps > 0.0 && a.eps <= 1.0) {
                return Err(usage(format!("--eps = {} must lie in (0, 1]", a.eps)));
            }
            let cfg = check_estimator(&a.estimator, a.pf)?;
            let template = ChainArgs {
                family: Some(a.family),
                n: None,
                marked: a.marked,
                dim: None,
                a: a.a,
                b: a.b,
                chain_seed: a.estimator.seed,
                matrix: None,
                group: None,
                group_preset: None,
                mu: vec![],
                order: None,
                pad: false,
            };
            let families =
                a.ns.iter()
                    .map(|&n| {
                        family_of(
                            &ChainArgs {
                                n: Some(n),
                                dim: Some(n),
                                ..template.clone()
                            },
                            a.family,
                        )
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
            let sweep = EstimateSweep {
                ns: a.ns.clone(),
                reps: a.reps,
                eps_gamma: a.eps,
                p_f: a.pf,
                seed: a.estimator.seed,
                config: cfg,
            };
            let rows = estimate_sweep(
                |n| families[a.ns.iter().position(|&m| m == n).unwrap_or(0)].clone(),
                &sweep,
            )?;
            emit(&a.out, &estimate_csv(&rows))?;
            if a.ns.len() > 1 {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .map(|r| (r.n as f64, r.queries as f64))
                    .collect();
                eprintln!("slope ln(queries) vs ln N: {:.4}", log_log_slope(&pts));
            }
            Ok(true)
        }
        SweepKind::Degrees => {
            if a.deltas.is_empty() {
                return Err(usage("--deltas must list at least one value"));
            }
            if a.deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
                return Err(usage("every delta must lie in (0, 1]"));
            }
            check_open_unit("alpha", a.alpha)?;
            check_open_unit("t", a.t)?;
            let rows = degree_sweep(&a.deltas, a.alpha, a.t, &a.estimator.dolph.params())?;
            emit(&a.out, &degree_csv(&rows))?;
            Ok(true)
        }
    }
}
