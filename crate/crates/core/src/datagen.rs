//! Reproducible generators for two-component Gaussian mixture designs.
//!
//! Each draw consumes one ChaCha8 stream selected by [`RngSeed`]: first the
//! non-null labels and parameters, then one contiguous run of standard normals
//! from which the samples are formed. The dependent generator uses the same
//! layout, so a lag of zero reproduces [`generate`] exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::charfn::{Component, MixtureComponents, SampleVector};
use crate::error::{Error, Result};
use crate::null::NullParams;

pub use crate::dist::{normal_quantile, normal_survival, student_t_survival, t_to_z};

/// Seed plus stream index. Replicate `r` of a run uses stream `r`, so its
/// draws do not depend on which other replicates ran or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed { seed, stream: 0 }
    }

    /// Seed for a sub-experiment (design cell) `key`, mixed with SplitMix64.
    pub fn derive(self, key: u64) -> Self {
        RngSeed {
            seed: splitmix64(self.seed ^ splitmix64(key.wrapping_add(0x5851_F42D_4C95_7F2D))),
            stream: self.stream,
        }
    }

    pub fn replicate(self, index: u64) -> Self {
        RngSeed { seed: self.seed, stream: index }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Distribution of non-null means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeanDist {
    Fixed { value: f64 },
    Normal { mean: f64, sd: f64 },
}

/// Distribution of non-null standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SdDist {
    Fixed { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl SdDist {
    fn lower_bound(&self) -> f64 {
        match *self {
            SdDist::Fixed { value } => value,
            SdDist::Uniform { low, .. } => low,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Exactly `round(n eps)` non-null samples.
    Frequentist,
    /// Each sample is non-null independently with probability `eps`.
    Bayesian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub n: usize,
    pub epsilon: f64,
    pub null: NullParams,
    pub nonnull_mu: MeanDist,
    pub nonnull_sigma: SdDist,
    pub model: Model,
}

impl MixtureSpec {
    /// Simulation design with null `N(-1/2, 1/2)`, non-null means from
    /// `N(0, 1)` and non-null standard deviations from `U(a, a + 1/2)`.
    pub fn main_step(n: usize, epsilon: f64, a: f64) -> Self {
        MixtureSpec {
            n,
            epsilon,
            null: NullParams { mu0: -0.5, sigma0_sq: 0.5 },
            nonnull_mu: MeanDist::Normal { mean: 0.0, sd: 1.0 },
            nonnull_sigma: SdDist::Uniform { low: a, high: a + 0.5 },
            model: Model::Frequentist,
        }
    }

    /// 9000 draws from `N(0, 0.95^2)` and 1000 from `N(2, 0.95^2)`.
    pub fn misspecified_null_demo() -> Self {
        MixtureSpec {
            n: 10_000,
            epsilon: 0.1,
            null: NullParams { mu0: 0.0, sigma0_sq: 0.95 * 0.95 },
            nonnull_mu: MeanDist::Fixed { value: 2.0 },
            nonnull_sigma: SdDist::Fixed { value: 0.95 },
            model: Model::Frequentist,
        }
    }

    /// Validates the spec; errors name the offending field under `prefix`.
    pub fn validate_at(&self, prefix: &str) -> Result<()> {
        let p = |f: &str| if prefix.is_empty() { f.to_string() } else { format!("{prefix}.{f}") };
        if self.n < 2 {
            return Err(Error::config(p("n"), "must be at least 2"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 0.5) {
            return Err(Error::config(p("epsilon"), format!("must lie in [0, 0.5), got {}", self.epsilon)));
        }
        if !self.null.mu0.is_finite() {
            return Err(Error::config(p("null.mu0"), "must be finite"));
        }
        if !(self.null.sigma0_sq.is_finite() && self.null.sigma0_sq > 0.0) {
            return Err(Error::config(p("null.sigma0_sq"), "must be positive"));
        }
        match self.nonnull_mu {
            MeanDist::Fixed { value } if !value.is_finite() => {
                return Err(Error::config(p("nonnull_mu.value"), "must be finite"))
            }
            MeanDist::Normal { mean, sd } if !(mean.is_finite() && sd.is_finite() && sd >= 0.0) => {
                return Err(Error::config(p("nonnull_mu"), "needs finite mean and sd >= 0"))
            }
            _ => {}
        }
        if let SdDist::Uniform { low, high } = self.nonnull_sigma {
            if !(low.is_finite() && high.is_finite() && high >= low) {
                return Err(Error::config(p("nonnull_sigma"), "needs finite low <= high"));
            }
        }
        let sigma0 = self.null.sigma0();
        let lo = self.nonnull_sigma.lower_bound();
        if !(lo.is_finite() && lo >= sigma0 * (1.0 - 1e-12)) {
            return Err(Error::config(
                p("nonnull_sigma"),
                format!("support starts at {lo}, below sigma0 = {sigma0} (non-null sd must be >= null sd)"),
            ));
        }
        if let (MeanDist::Fixed { value }, SdDist::Fixed { value: s }) = (self.nonnull_mu, self.nonnull_sigma) {
            if value == self.null.mu0 && (s - sigma0).abs() <= 1e-12 * sigma0 && self.epsilon > 0.0 {
                return Err(Error::config(p("nonnull_mu"), "non-null component coincides with the null"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at("")
    }

    /// Number of non-null samples in the frequentist model (`n eps` rounded half-up).
    pub fn nonnull_count(&self) -> usize {
        (self.n as f64 * self.epsilon + 0.5).floor() as usize
    }
}

/// Ground truth for one generated sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleTruth {
    pub mu: f64,
    pub sigma: f64,
    pub is_null: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTruth {
    pub null: NullParams,
    pub records: Vec<SampleTruth>,
}

impl MixtureTruth {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn nonnull_count(&self) -> usize {
        self.records.iter().filter(|r| !r.is_null).count()
    }

    /// Proportion of non-null samples.
    pub fn epsilon_n(&self) -> f64 {
        self.nonnull_count() as f64 / self.records.len() as f64
    }

    /// Minimum variance elevation over non-null samples; `None` if all null.
    pub fn tau_n(&self) -> Option<f64> {
        let s0 = self.null.sigma0_sq;
        self.records
            .iter()
            .filter(|r| !r.is_null)
            .map(|r| r.sigma * r.sigma - s0)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
    }

    /// Analytic mixture with one unit-weight component per non-null sample.
    pub fn components(&self) -> Result<MixtureComponents> {
        let nonnull =
            self.records.iter().filter(|r| !r.is_null).map(|r| Component { mu: r.mu, sigma: r.sigma }).collect();
        MixtureComponents::new(self.null, nonnull, self.records.len())
    }
}

fn draw_params(spec: &MixtureSpec, rng: &mut ChaCha8Rng) -> Vec<SampleTruth> {
    let sigma0 = spec.null.sigma0();
    let null = SampleTruth { mu: spec.null.mu0, sigma: sigma0, is_null: true };
    let nonnull = |rng: &mut ChaCha8Rng| {
        let mu = match spec.nonnull_mu {
            MeanDist::Fixed { value } => value,
            MeanDist::Normal { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
        };
        let sigma = match spec.nonnull_sigma {
            SdDist::Fixed { value } => value,
            SdDist::Uniform { low, high } => {
                if high > low {
                    rng.random_range(low..high)
                } else {
                    low
                }
            }
        };
        SampleTruth { mu, sigma, is_null: false }
    };
    match spec.model {
        Model::Frequentist => {
            let k = spec.nonnull_count();
            let mut out = Vec::with_capacity(spec.n);
            for _ in 0..k {
                out.push(nonnull(rng));
            }
            out.resize(spec.n, null);
            out
        }
        Model::Bayesian => {
            (0..spec.n).map(|_| if rng.random::<f64>() < spec.epsilon { nonnull(rng) } else { null }).collect()
        }
    }
}

/// Draws one data set. Non-null samples come first in the frequentist model.
pub fn generate(spec: &MixtureSpec, seed: RngSeed) -> Result<(SampleVector, MixtureTruth)> {
    generate_dependent(spec, 0, seed)
}

/// Draws one data set whose noise is a moving average of `lag + 1`
/// consecutive standard normals, `z_j = (w_j + ... + w_{j+lag}) / sqrt(lag + 1)`,
/// so each `z_j` is marginally `N(0, 1)`; `X_j = mu_j + sigma_j z_j`.
pub fn generate_dependent(spec: &MixtureSpec, lag: usize, seed: RngSeed) -> Result<(SampleVector, MixtureTruth)> {
    spec.validate()?;
    let mut rng = seed.rng();
    let records = draw_params(spec, &mut rng);
    let w: Vec<f64> = (0..spec.n + lag).map(|_| rng.sample(StandardNormal)).collect();
    let z = moving_average_noise(&w, lag, spec.n);
    let values = records.iter().zip(&z).map(|(r, &z)| r.mu + r.sigma * z).collect();
    let truth = MixtureTruth { null: spec.null, records };
    Ok((SampleVector::new(values)?, truth))
}

fn moving_average_noise(w: &[f64], lag: usize, n: usize) -> Vec<f64> {
    if lag == 0 {
        return w[..n].to_vec();
    }
    let scale = 1.0 / ((lag + 1) as f64).sqrt();
    (0..n).map(|j| w[j..=j + lag].iter().sum::<f64>() * scale).collect()
}
