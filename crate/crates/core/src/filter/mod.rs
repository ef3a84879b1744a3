//! Singular-value filter polynomials in the Chebyshev basis.
//!
//! Three families are provided: a shifted sign approximation (degree
//! `O(log(1/alpha) / (delta t))`), a truncated monomial, and a
//! Dolph-Chebyshev window (degree `O(1/sqrt(delta))`). Every filter is a
//! Chebyshev series in `u = (x - shift) / scale`; the Dolph and monomial
//! filters use the identity map.

mod cheb;
mod design;

pub use cheb::{
    chebyshev_t, clenshaw, growth_estimate, interpolation_coeffs, ln_chebyshev_t_above_one,
};
pub use design::{
    dolph_closed_form, dolph_filter, dolph_filter_with, monomial_filter, sign_filter, t_star,
    DolphParams, TStarParams, DEFAULT_DELTA_STAR, DEFAULT_SLACK, SIGN_DEGREE_CONST,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Lower bound every filter must reach on its pass band.
pub const PASS_FLOOR: f64 = 0.25;
/// Slack on the `|f| <= 1` admissibility check.
pub const SUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Sign,
    Monomial,
    Dolph,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Sign => "sign",
            FilterKind::Monomial => "monomial",
            FilterKind::Dolph => "dolph",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "sign" => Some(FilterKind::Sign),
            "monomial" => Some(FilterKind::Monomial),
            "dolph" => Some(FilterKind::Dolph),
            _ => None,
        }
    }
}

/// Which part of the series is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Full,
    Even,
    Odd,
}

/// Stop band `[0, 1 - delta (1 + t)]`, pass band `[1 - delta (1 - t), 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterBand {
    pub delta: f64,
    pub t: f64,
    pub alpha: f64,
}

impl FilterBand {
    pub fn x0(&self) -> f64 {
        1.0 - self.delta * (1.0 + self.t)
    }

    pub fn x1(&self) -> f64 {
        1.0 - self.delta * (1.0 - self.t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterPolynomial {
    kind: FilterKind,
    band: FilterBand,
    degree: usize,
    series: Vec<f64>,
    shift: f64,
    scale: f64,
    parity: Parity,
    stop_allowance: f64,
}

impl FilterPolynomial {
    pub(crate) fn from_series(
        kind: FilterKind,
        band: FilterBand,
        series: Vec<f64>,
        shift: f64,
        scale: f64,
        stop_allowance: f64,
    ) -> Self {
        let degree = series.len().saturating_sub(1);
        Self {
            kind,
            band,
            degree,
            series,
            shift,
            scale,
            parity: Parity::Full,
            stop_allowance,
        }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn band(&self) -> FilterBand {
        self.band
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Native series coefficients, in the variable `(x - shift) / scale`.
    pub fn series(&self) -> &[f64] {
        &self.series
    }

    pub fn domain_map(&self) -> (f64, f64) {
        (self.shift, self.scale)
    }

    /// Largest `|f|` tolerated on the stop band (`alpha`, plus the
    /// truncation error for the monomial filter).
    pub fn stop_allowance(&self) -> f64 {
        self.stop_allowance
    }

    fn eval_series(&self, x: f64) -> f64 {
        clenshaw(&self.series, (x - self.shift) / self.scale)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.parity {
            Parity::Full => self.eval_series(x),
            Parity::Even => 0.5 * (self.eval_series(x) + self.eval_series(-x)),
            Parity::Odd => 0.5 * (self.eval_series(x) - self.eval_series(-x)),
        }
    }

    /// Coefficients in the plain Chebyshev basis `T_k(x)`. For shifted
    /// series this re-interpolates, which costs `O(degree^2)`.
    pub fn cheb_coeffs(&self) -> Vec<f64> {
        let mut c = if self.shift == 0.0 && self.scale == 1.0 {
            self.series.clone()
        } else {
            let m = (self.degree + 1).next_power_of_two() * 2;
            let mut c = interpolation_coeffs(|x| self.eval_series(x), m);
            c.truncate(self.degree + 1);
            c
        };
        for (k, ck) in c.iter_mut().enumerate() {
            let keep = match self.parity {
                Parity::Full => true,
                Parity::Even => k % 2 == 0,
                Parity::Odd => k % 2 == 1,
            };
            if !keep {
                *ck = 0.0;
            }
        }
        c
    }

    /// Text export: `key value` header lines, then `coeffs` and one native
    /// series coefficient per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kind {}", self.kind.name());
        let _ = writeln!(out, "delta {:?}", self.band.delta);
        let _ = writeln!(out, "t {:?}", self.band.t);
        let _ = writeln!(out, "alpha {:?}", self.band.alpha);
        let _ = writeln!(out, "degree {}", self.degree);
        let _ = writeln!(out, "x0 {:?}", self.band.x0());
        let _ = writeln!(out, "x1 {:?}", self.band.x1());
        let _ = writeln!(out, "shift {:?}", self.shift);
        let _ = writeln!(out, "scale {:?}", self.scale);
        let _ = writeln!(out, "stop_allowance {:?}", self.stop_allowance);
        let parity = match self.parity {
            Parity::Full => "full",
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        let _ = writeln!(out, "parity {parity}");
        out.push_str("coeffs\n");
        for c in &self.series {
            let _ = writeln!(out, "{c:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut header = std::collections::HashMap::new();
        for (line, l) in lines.by_ref() {
            if l == "coeffs" {
                break;
            }
            let (k, v) = l.split_once(' ').ok_or(Error::Parse {
                line,
                message: format!("bad header {l:?}"),
            })?;
            header.insert(k.to_string(), (line, v.trim().to_string()));
        }
        let get = |k: &str| {
            header.get(k).ok_or(Error::Parse {
                line: 0,
                message: format!("missing {k}"),
            })
        };
        let num = |k: &str| -> Result<f64> {
            let (line, v) = get(k)?;
            v.parse().map_err(|_| Error::Parse {
                line: *line,
                message: format!("bad {k}"),
            })
        };
        let (kline, kind) = get("kind")?;
        let kind = FilterKind::from_name(kind).ok_or(Error::Parse {
            line: *kline,
            message: "unknown kind".into(),
        })?;
        let parity = match get("parity").map(|(_, v)| v.as_str()).unwrap_or("full") {
            "full" => Parity::Full,
            "even" => Parity::Even,
            "odd" => Parity::Odd,
            other => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("unknown parity {other}"),
                })
            }
        };
        let series = lines
            .map(|(line, l)| {
                l.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let band = FilterBand {
            delta: num("delta")?,
            t: num("t")?,
            alpha: num("alpha")?,
        };
        let degree = num("degree")? as usize;
        if series.len() != degree + 1 {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {} coefficients", degree + 1),
            });
        }
        let mut p = Self::from_series(
            kind,
            band,
            series,
            num("shift")?,
            num("scale")?,
            num("stop_allowance")?,
        );
        p.parity = parity;
        Ok(p)
    }
}

/// Splits `p` into its even and odd parts, `p = even + odd`.
pub fn parity_split(p: &FilterPolynomial) -> (FilterPolynomial, FilterPolynomial) {
    let part = |parity: Parity| {
        let mut q = p.clone();
        q.parity = parity;
        if p.shift == 0.0 && p.scale == 1.0 {
            q.series = q.cheb_coeffs();
            q.parity = Parity::Full;
        }
        q
    };
    (part(Parity::Even), part(Parity::Odd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterReport {
    pub stop_max: f64,
    pub pass_min: f64,
    pub sup_norm: f64,
    pub f_at_1: f64,
    pub stop_ok: bool,
    pub pass_ok: bool,
    pub sup_ok: bool,
}

impl FilterReport {
    pub fn passed(&self) -> bool {
        self.stop_ok && self.pass_ok && self.sup_ok
    }
}

/// `grid_size` evenly spaced points covering `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, grid_size: usize) -> Vec<f64> {
    if grid_size <= 1 || hi <= lo {
        return vec![lo];
    }
    let step = (hi - lo) / (grid_size - 1) as f64;
    (0..grid_size)
        .map(|i| {
            if i + 1 == grid_size {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}

/// Grid extrema of `p` over its stop band, pass band and `[-1, 1]`.
pub fn verify_filter(p: &FilterPolynomial, grid_size: usize) -> FilterReport {
    let band = p.band();
    let extreme = |lo: f64, hi: f64, f: fn(f64, f64) -> f64, init: f64, abs: bool| {
        uniform_grid(lo, hi, grid_size)
            .par_iter()
            .map(|&x| if abs { p.eval(x).abs() } else { p.eval(x) })
            .reduce(|| init, f)
    };
    let stop_max = if band.x0() >= 0.0 {
        extreme(0.0, band.x0(), f64::max, 0.0, true)
    } else {
        0.0
    };
    let pass_min = extreme(band.x1().min(1.0), 1.0, f64::min, f64::INFINITY, false);
    let sup_norm = extreme(-1.0, 1.0, f64::max, 0.0, true);
    FilterReport {
        stop_max,
        pass_min,
        sup_norm,
        f_at_1: p.eval(1.0),
        stop_ok: stop_max <= p.stop_allowance(),
        pass_ok: pass_min >= PASS_FLOOR,
        sup_ok: sup_norm <= 1.0 + SUP_TOL,
    }
}
