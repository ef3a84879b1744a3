//! Random initial states: Haar-random pure states and a variant with the
//! known top singular direction projected out.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

const PROJECTION_FLOOR: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 100;

/// RNG for stream `stream` of `seed`. Streams of one seed never overlap, so
/// rounds, trials and sweep repetitions each get their own stream id.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Haar,
    Complement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub seed: u64,
    pub known_top_vector: Option<Vec<f64>>,
}

impl EnsembleSpec {
    pub fn haar(n: usize, seed: u64) -> Self {
        Self {
            kind: EnsembleKind::Haar,
            n,
            seed,
            known_top_vector: None,
        }
    }

    pub fn complement(top: Vec<f64>, seed: u64) -> Result<Self> {
        let norm = top.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            kind: EnsembleKind::Complement,
            n: top.len(),
            seed,
            known_top_vector: Some(top),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::BadParams(
                "ensemble dimension must be positive".into(),
            ));
        }
        match (&self.kind, &self.known_top_vector) {
            (EnsembleKind::Complement, None) => Err(Error::BadParams(
                "complement ensemble needs a top vector".into(),
            )),
            (EnsembleKind::Complement, Some(v)) if v.len() != self.n => {
                Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: v.len(),
                })
            }
            _ => Ok(()),
        }
    }
}

fn gaussian_state(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    norm
}

/// Draws one unit vector in `C^n` from the ensemble.
pub fn sample_state(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    spec.validate()?;
    match &spec.known_top_vector {
        Some(top) if spec.kind == EnsembleKind::Complement => {
            for _ in 0..MAX_ATTEMPTS {
                let mut v = gaussian_state(spec.n, rng);
                let overlap: Complex64 = top.iter().zip(&v).map(|(a, z)| z * *a).sum();
                for (z, a) in v.iter_mut().zip(top) {
                    *z -= overlap * *a;
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm >= PROJECTION_FLOOR {
                    normalize(&mut v);
                    return Ok(v);
                }
            }
            Err(Error::DegenerateProjection)
        }
        _ => {
            let mut v = gaussian_state(spec.n, rng);
            normalize(&mut v);
            Ok(v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub trials: usize,
    pub m2: f64,
    pub m4: f64,
    pub se2: f64,
    pub se4: f64,
    pub target_m2: f64,
    pub target_m4: f64,
}

impl MomentEstimate {
    /// Both estimates within `k` standard errors of their targets.
    pub fn within(&self, k: f64) -> bool {
        (self.m2 - self.target_m2).abs() <= k * self.se2
            && (self.m4 - self.target_m4).abs() <= k * self.se4
    }
}

/// Monte-Carlo estimates of `E|<psi, phi>|^2` and `E|<psi, phi>|^4`
/// against `1/N` and `2/(N(N+1))`.
pub fn moment_check(
    spec: &EnsembleSpec,
    psi: &[Complex64],
    trials: usize,
) -> Result<MomentEstimate> {
    if trials < 1000 {
        return Err(Error::BadParams(format!(
            "moment check needs at least 1000 trials, got {trials}"
        )));
    }
    if spec.kind != EnsembleKind::Haar {
        return Err(Error::BadParams(
            "moment identities hold for the Haar ensemble only".into(),
        ));
    }
    if psi.len() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            found: psi.len(),
        });
    }
    crate::qsvt::check_normalized(psi)?;
    let mut rng = substream(spec.seed, 0);
    let (mut s2, mut s4, mut s8) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        let phi = sample_state(spec, &mut rng)?;
        let x = psi
            .iter()
            .zip(&phi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr();
        s2 += x;
        s4 += x * x;
        s8 += x * x * x * x;
    }
    let t = trials as f64;
    let (m2, m4) = (s2 / t, s4 / t);
    let var2 = (s4 / t - m2 * m2).max(0.0) * t / (t - 1.0);
    let var4 = (s8 / t - m4 * m4).max(0.0) * t / (t - 1.0);
    let n = spec.n as f64;
    Ok(MomentEstimate {
        trials,
        m2,
        m4,
        se2: (var2 / t).sqrt(),
        se4: (var4 / t).sqrt(),
        target_m2: 1.0 / n,
        target_m4: 2.0 / (n * (n + 1.0)),
    })
}
