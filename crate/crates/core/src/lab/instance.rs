use nalgebra::DVector;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::numfmt::{ser_f64, ser_vec_f64};

/// Distribution of the nonzero ground-truth coefficients: magnitudes uniform
/// in `[min_magnitude, max_magnitude]`, signs as given by `signs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientDist {
    #[serde(serialize_with = "ser_f64")]
    pub min_magnitude: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_magnitude: f64,
    pub signs: SignScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignScheme {
    /// Independent fair coin per entry.
    Random,
    Positive,
}

impl Default for CoefficientDist {
    fn default() -> Self {
        CoefficientDist {
            min_magnitude: 0.5,
            max_magnitude: 1.5,
            signs: SignScheme::Random,
        }
    }
}

impl CoefficientDist {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_magnitude.is_finite() && self.min_magnitude > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "min_magnitude must be > 0, got {}",
                self.min_magnitude
            )));
        }
        if !(self.max_magnitude.is_finite() && self.max_magnitude >= self.min_magnitude) {
            return Err(Error::InvalidParameter(format!(
                "max_magnitude must be finite and >= min_magnitude, got {}",
                self.max_magnitude
            )));
        }
        Ok(())
    }
}

/// Random stream for `(seed, stream)`; distinct streams are independent.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a `k`-sparse `s0` (support uniform among `k`-subsets) and returns
/// `(s0, A s0)`.
pub fn gen_sparse_signal(
    dict: &Dictionary,
    k: usize,
    dist: &CoefficientDist,
    seed: u64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    gen_sparse_signal_with(dict, k, dist, &mut trial_rng(seed, 0))
}

pub fn gen_sparse_signal_with<R: Rng>(
    dict: &Dictionary,
    k: usize,
    dist: &CoefficientDist,
    rng: &mut R,
) -> Result<(DVector<f64>, DVector<f64>)> {
    dist.validate()?;
    let m = dict.m();
    if k > m {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds m = {m}")));
    }
    let mut support = index::sample(rng, m, k).into_vec();
    support.sort_unstable();
    let mut s0 = DVector::zeros(m);
    for i in support {
        let mag = if dist.max_magnitude > dist.min_magnitude {
            rng.random_range(dist.min_magnitude..=dist.max_magnitude)
        } else {
            dist.min_magnitude
        };
        let negative = match dist.signs {
            SignScheme::Random => rng.random_bool(0.5),
            SignScheme::Positive => false,
        };
        s0[i] = if negative { -mag } else { mag };
    }
    let x0 = dict.apply(&s0);
    Ok((s0, x0))
}

/// A vector uniform on the sphere of radius `epsilon` in `dim` dimensions.
pub fn gen_noise(dim: usize, epsilon: f64, seed: u64) -> Result<DVector<f64>> {
    gen_noise_with(dim, epsilon, &mut trial_rng(seed, 0))
}

pub fn gen_noise_with<R: Rng>(dim: usize, epsilon: f64, rng: &mut R) -> Result<DVector<f64>> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and >= 0, got {epsilon}"
        )));
    }
    if epsilon == 0.0 || dim == 0 {
        return Ok(DVector::zeros(dim));
    }
    loop {
        let g: DVector<f64> = DVector::from_fn(dim, |_, _| rng.sample(StandardNormal));
        let norm = g.norm();
        if norm > 0.0 {
            return Ok(g * (epsilon / norm));
        }
    }
}

/// Ground truth `s0`, the clean signal `x0 = A s0`, and `x = x0 + n` with
/// `||n||_2 = epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyInstance {
    #[serde(serialize_with = "ser_dvec")]
    pub ground_truth: DVector<f64>,
    pub support: Vec<usize>,
    #[serde(skip)]
    pub clean_signal: DVector<f64>,
    #[serde(skip)]
    pub noise: DVector<f64>,
    #[serde(serialize_with = "ser_dvec")]
    pub noisy_signal: DVector<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
    pub seed: u64,
    pub stream: u64,
}

fn ser_dvec<S: serde::Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    ser_vec_f64(v.as_slice(), s)
}

impl NoisyInstance {
    /// Signal first, then noise, from the single stream `(seed, stream)`.
    pub fn generate(
        dict: &Dictionary,
        k: usize,
        dist: &CoefficientDist,
        epsilon: f64,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        let mut rng = trial_rng(seed, stream);
        let (s0, x0) = gen_sparse_signal_with(dict, k, dist, &mut rng)?;
        let noise = gen_noise_with(dict.n(), epsilon, &mut rng)?;
        Ok(Self::from_parts(s0, x0, noise, epsilon, seed, stream))
    }

    pub fn from_parts(
        ground_truth: DVector<f64>,
        clean_signal: DVector<f64>,
        noise: DVector<f64>,
        epsilon: f64,
        seed: u64,
        stream: u64,
    ) -> Self {
        let support = (0..ground_truth.len()).filter(|&i| ground_truth[i] != 0.0).collect();
        let noisy_signal = &clean_signal + &noise;
        NoisyInstance {
            ground_truth,
            support,
            clean_signal,
            noise,
            noisy_signal,
            epsilon,
            seed,
            stream,
        }
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }
}
