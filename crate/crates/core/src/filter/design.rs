use serde::Serialize;
use statrs::function::erf::{erf, erfc_inv};
use statrs::function::factorial::ln_binomial;

use super::cheb::{interpolation_coeffs, ln_chebyshev_t_above_one, tail_sums};
use super::{uniform_grid, FilterBand, FilterKind, FilterPolynomial, PASS_FLOOR};
use crate::error::{Error, Result};

/// `C_1` in the sign-filter degree cap `C_1 ln(1/alpha) / (delta t)`.
pub const SIGN_DEGREE_CONST: f64 = 8.0;
/// Default for both slack constants `k` and `k~`.
pub const DEFAULT_SLACK: f64 = 0.1;
/// Largest `delta` the Dolph filter accepts by default.
pub const DEFAULT_DELTA_STAR: f64 = 0.05;

/// Height of the smoothed step behind the sign filter; leaves room for the
/// truncation error below 1.
const SIGN_HEIGHT: f64 = 0.9;
const SIGN_CHECK_GRID: usize = 1001;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::DomainError(msg()))
    }
}

/// Approximates a step at `1 - delta` of width `delta t` by a Chebyshev
/// series of `A (1 + erf(kappa u)) / 2` with `u = (x - (1 - delta)) / 2`.
/// The series is truncated at the smallest degree whose coefficient tail is
/// below the error budget, so the band bounds hold on all of `[-1, 1]`.
pub fn sign_filter(delta: f64, t: f64, alpha: f64) -> Result<FilterPolynomial> {
    check(delta > 0.0 && delta <= 1.0, || {
        format!("delta = {delta} outside (0, 1]")
    })?;
    check(t > 0.0 && t < 1.0, || format!("t = {t} outside (0, 1)"))?;
    check(alpha > 0.0 && alpha < 0.25, || {
        format!("alpha = {alpha} outside (0, 1/4)")
    })?;
    let band = FilterBand { delta, t, alpha };
    let shift = 1.0 - delta;
    let scale = 2.0;
    // erfc(kappa * delta t / 2) * A / 2 <= alpha / 2 at the stop edge
    let kappa = 2.0 * erfc_inv(alpha / SIGN_HEIGHT) / (delta * t);
    let target = |u: f64| 0.5 * SIGN_HEIGHT * (1.0 + erf(kappa * u));
    let budget = (0.5 * alpha).min(0.05);
    let cap = (SIGN_DEGREE_CONST * (1.0 / alpha).ln() / (delta * t)).ceil() as usize;

    let max_nodes = (4 * cap).next_power_of_two().max(1024);
    let mut m = 256;
    let coeffs = loop {
        let c = interpolation_coeffs(target, m);
        let resolved = c[m / 2..].iter().fold(0.0f64, |a, v| a.max(v.abs())) <= 1e-13;
        if resolved {
            break c;
        }
        if m >= max_nodes {
            return Err(Error::InfeasibleBand(format!(
                "step not resolved below the degree cap {cap}"
            )));
        }
        m *= 2;
    };
    let tails = tail_sums(&coeffs);
    let mut degree = tails
        .iter()
        .position(|&tail| tail <= budget)
        .unwrap_or(coeffs.len() - 1);
    loop {
        if degree > cap {
            return Err(Error::InfeasibleBand(format!(
                "sign filter needs degree {degree} > cap {cap}"
            )));
        }
        let p = FilterPolynomial::from_series(
            FilterKind::Sign,
            band,
            coeffs[..=degree].to_vec(),
            shift,
            scale,
            alpha,
        );
        if band_holds(&p, SIGN_CHECK_GRID) {
            return Ok(p);
        }
        degree = ((degree as f64 * 1.25).ceil() as usize)
            .min(coeffs.len() - 1)
            .max(degree + 1);
    }
}

fn band_holds(p: &FilterPolynomial, grid: usize) -> bool {
    let band = p.band();
    let stop = band.x0() < 0.0
        || uniform_grid(0.0, band.x0(), grid)
            .into_iter()
            .all(|x| p.eval(x).abs() <= p.stop_allowance());
    let pass = uniform_grid(band.x1().min(1.0), 1.0, grid)
        .into_iter()
        .all(|x| p.eval(x) >= PASS_FLOOR);
    let sup = uniform_grid(-1.0, 1.0, grid)
        .into_iter()
        .all(|x| p.eval(x).abs() <= 1.0);
    stop && pass && sup
}

/// Chebyshev truncation of `x^d~` with `d~ = ceil(ln(1/alpha) / (2 delta))`,
/// cut at degree `ceil(sqrt(2 d~ ln(4/alpha)))`.
pub fn monomial_filter(delta: f64, alpha: f64) -> Result<FilterPolynomial> {
    check(delta > 0.0 && delta < 0.5, || {
        format!("delta = {delta} outside (0, 1/2)")
    })?;
    check(alpha > 0.0 && alpha <= 1.0, || {
        format!("alpha = {alpha} outside (0, 1]")
    })?;
    let power = ((1.0 / alpha).ln() / (2.0 * delta)).ceil() as u64;
    let degree = ((2.0 * power as f64 * (4.0 / alpha).ln()).sqrt().ceil() as u64).min(power);
    // x^n = 2^{1-n} sum' C(n, (n-j)/2) T_j, the j = 0 term halved
    let mut coeffs = vec![0.0; degree as usize + 1];
    for j in (0..=degree).filter(|j| (power - j).is_multiple_of(2)) {
        let ln_c = ln_binomial(power, (power - j) / 2) - power as f64 * std::f64::consts::LN_2;
        coeffs[j as usize] = if j == 0 { ln_c.exp() } else { 2.0 * ln_c.exp() };
    }
    let truncation = if degree < power {
        2.0 * (-((degree * degree) as f64) / (2.0 * power as f64)).exp()
    } else {
        0.0
    };
    let band = FilterBand {
        delta,
        t: 1.0,
        alpha,
    };
    Ok(FilterPolynomial::from_series(
        FilterKind::Monomial,
        band,
        coeffs,
        0.0,
        1.0,
        alpha + truncation,
    ))
}

/// Slack constants for the Dolph filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DolphParams {
    pub k: f64,
    pub k_tilde: f64,
    pub delta_star: f64,
}

impl Default for DolphParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_SLACK,
            k_tilde: DEFAULT_SLACK,
            delta_star: DEFAULT_DELTA_STAR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TStarParams {
    pub alpha: f64,
    pub k: f64,
    pub k_tilde: f64,
    pub c: f64,
    pub t_star: f64,
}

/// Smallest relative half-width the Dolph filter accepts:
/// `C = 1/sqrt 2 - ln(2(1-k~)) / ((1+k) sqrt 2 ln(2/alpha))`, `t* = C^2/(1-C^2)`.
pub fn t_star(alpha: f64, k: f64, k_tilde: f64) -> Result<TStarParams> {
    check(alpha > 0.0 && alpha < 0.25, || {
        format!("alpha = {alpha} outside (0, 1/4)")
    })?;
    check(k > 0.0, || format!("k = {k} must be positive"))?;
    check(k_tilde > 0.0 && k_tilde < 0.5, || {
        format!("k~ = {k_tilde} outside (0, 1/2)")
    })?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let c = 1.0 / sqrt2 - (2.0 * (1.0 - k_tilde)).ln() / ((1.0 + k) * sqrt2 * (2.0 / alpha).ln());
    check(c * c < 1.0, || format!("C^2 = {} >= 1", c * c))?;
    Ok(TStarParams {
        alpha,
        k,
        k_tilde,
        c,
        t_star: c * c / (1.0 - c * c),
    })
}

/// `T_d(z(x)) / (2 T_d(z(1)))` with `z(x) = (2x + 1 - x0) / (1 + x0)`,
/// evaluated in log space outside `[-1, 1]`.
pub fn dolph_closed_form(d: usize, x0: f64, x: f64) -> f64 {
    let z = |x: f64| (2.0 * x + 1.0 - x0) / (1.0 + x0);
    let ln_top = ln_chebyshev_t_above_one(d, z(1.0));
    let zx = z(x);
    if zx.abs() <= 1.0 {
        (d as f64 * zx.acos()).cos() * (-ln_top).exp() * 0.5
    } else {
        let sign = if zx < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
        sign * 0.5 * (ln_chebyshev_t_above_one(d, zx.abs()) - ln_top).exp()
    }
}

pub fn dolph_filter(delta: f64, t: f64, alpha: f64) -> Result<FilterPolynomial> {
    dolph_filter_with(delta, t, alpha, &DolphParams::default())
}

/// Dolph-Chebyshev window filter. The degree is the smallest integer
/// strictly above `(1+k) ln(2/alpha) / sqrt(2(1+t) delta)`; it must not
/// exceed `ln(2(1-k~)) / (sqrt(delta) (sqrt(2(1+t)) - sqrt(4t)))`.
pub fn dolph_filter_with(
    delta: f64,
    t: f64,
    alpha: f64,
    params: &DolphParams,
) -> Result<FilterPolynomial> {
    let ts = t_star(alpha, params.k, params.k_tilde)?;
    check(delta > 0.0, || format!("delta = {delta} must be positive"))?;
    check(t < 1.0, || format!("t = {t} must be below 1"))?;
    if delta > params.delta_star {
        return Err(Error::InfeasibleBand(format!(
            "delta = {delta} exceeds delta* = {}",
            params.delta_star
        )));
    }
    if t < ts.t_star {
        return Err(Error::InfeasibleBand(format!(
            "t = {t} below t* = {}",
            ts.t_star
        )));
    }
    let lower = (1.0 + params.k) / (2.0 * (1.0 + t) * delta).sqrt() * (2.0 / alpha).ln();
    let upper = (2.0 * (1.0 - params.k_tilde)).ln()
        / (delta.sqrt() * ((2.0 * (1.0 + t)).sqrt() - (4.0 * t).sqrt()));
    let d = lower.floor() as usize + 1;
    if d as f64 > upper {
        return Err(Error::InfeasibleBand(format!(
            "degree {d} exceeds admissible {upper:.3}"
        )));
    }
    let band = FilterBand { delta, t, alpha };
    let x0 = band.x0();
    let m = (d + 1).next_power_of_two() * 2;
    let mut coeffs = interpolation_coeffs(|x| dolph_closed_form(d, x0, x), m);
    coeffs.truncate(d + 1);
    let p = FilterPolynomial::from_series(FilterKind::Dolph, band, coeffs, 0.0, 1.0, alpha);
    if !band_holds(&p, 2001) {
        return Err(Error::InfeasibleBand(format!(
            "degree {d} fails the grid check"
        )));
    }
    Ok(p)
}
