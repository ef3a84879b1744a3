//! Chebyshev-basis numerics shared by the filter constructions.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `T_d(z)` on the whole real line.
pub fn chebyshev_t(d: usize, z: f64) -> f64 {
    if z.abs() <= 1.0 {
        let (mut prev, mut cur) = (1.0, z);
        if d == 0 {
            return 1.0;
        }
        for _ in 1..d {
            let next = 2.0 * z * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let mag = (d as f64 * z.abs().acosh()).cosh();
        if z < 0.0 && d % 2 == 1 {
            -mag
        } else {
            mag
        }
    }
}

/// `ln T_d(z)` for `z >= 1`, finite where `T_d(z)` itself would overflow.
pub fn ln_chebyshev_t_above_one(d: usize, z: f64) -> f64 {
    debug_assert!(z >= 1.0);
    let a = d as f64 * z.acosh();
    // cosh a = e^a (1 + e^{-2a}) / 2
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Leading-order model of `T_d(1 + 1/r)`: `exp(d sqrt(2/r)) / 2`.
pub fn growth_estimate(d: usize, r: f64) -> f64 {
    0.5 * (d as f64 * (2.0 / r).sqrt()).exp()
}

/// Clenshaw evaluation of `sum_k c_k T_k(u)`.
pub fn clenshaw(coeffs: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + u * b1 - b2
}

/// Chebyshev interpolation coefficients of `f` at the `m` first-kind nodes
/// `cos(pi (j + 1/2) / m)`, computed with one length-`2m` FFT.
pub fn interpolation_coeffs(f: impl Fn(f64) -> f64, m: usize) -> Vec<f64> {
    let values: Vec<f64> = (0..m)
        .map(|j| f((std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos()))
        .collect();
    coeffs_from_node_values(&values)
}

pub(crate) fn coeffs_from_node_values(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = Vec::with_capacity(2 * m);
    buf.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
    buf.extend(values.iter().rev().map(|&v| Complex64::new(v, 0.0)));
    FftPlanner::new().plan_fft_forward(2 * m).process(&mut buf);
    let mut out: Vec<f64> = (0..m)
        .map(|k| {
            let phase =
                Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2 * m) as f64);
            (phase * buf[k]).re / m as f64
        })
        .collect();
    if let Some(c0) = out.first_mut() {
        *c0 *= 0.5;
    }
    out
}

/// `sum_{k > d} |c_k|` for every `d`, i.e. the truncation tail bound.
pub(crate) fn tail_sums(coeffs: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; coeffs.len()];
    let mut acc = 0.0;
    for k in (0..coeffs.len()).rev() {
        tails[k] = acc;
        acc += coeffs[k].abs();
    }
    tails
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chebyshev_values() {
        for d in 0..20 {
            assert_eq!(chebyshev_t(d, 1.0), 1.0);
        }
        assert_abs_diff_eq!(chebyshev_t(3, 0.5), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(chebyshev_t(2, 2.0), 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chebyshev_t(3, -2.0), -26.0, epsilon = 1e-11);
        assert_abs_diff_eq!(chebyshev_t(4, -2.0), 97.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            ln_chebyshev_t_above_one(7, 1.3),
            chebyshev_t(7, 1.3).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn growth_model_tracks_chebyshev() {
        let r = 1e4;
        let exact = chebyshev_t(50, 1.0 + 1.0 / r);
        assert!(((exact - growth_estimate(50, r)) / exact).abs() <= 0.2);
        assert!(growth_estimate(51, r) > growth_estimate(50, r));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        // 4x^3 - 3x + 0.5 = T_3 + 0.5 T_0
        let c = interpolation_coeffs(|x| 4.0 * x * x * x - 3.0 * x + 0.5, 16);
        assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c[3], 1.0, epsilon = 1e-14);
        assert!(c
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 0 && *k != 3)
            .all(|(_, v)| v.abs() < 1e-14));
        for x in [-0.9, -0.1, 0.3, 1.0] {
            assert_abs_diff_eq!(
                clenshaw(&c, x),
                4.0 * x * x * x - 3.0 * x + 0.5,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn tails() {
        assert_eq!(tail_sums(&[1.0, -0.5, 0.25]), vec![0.75, 0.25, 0.0]);
    }
}
