//! Null-parameter functionals and the adaptive frequency choice.
//!
//! For a characteristic function `f` that is exactly Gaussian,
//! `sigma0^2(f; t) = -(d/dt |f|) / (t |f|)` and
//! `mu0(f; t) = Im(conj(f) f') / |f|^2` return the Gaussian's parameters at every
//! `t != 0`. Applied to the empirical characteristic function at a frequency
//! where the non-null part has decayed, they estimate the null.

use serde::{Deserialize, Serialize};

use crate::charfn::{ecf, ecf_grid, ecf_with_derivative, mixture_cf, ComplexValue, MixtureComponents, SampleVector};
use crate::error::{Error, Result};

/// Default frequency exponent.
pub const DEFAULT_GAMMA: f64 = 0.1;

/// Grid intervals on `[0, ln n]` for locating the first crossing.
pub const SCAN_INTERVALS: usize = 10_000;

/// Bracket width at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-10;

const SCAN_WINDOW: usize = 256;

/// Null distribution `N(mu0, sigma0^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullParams {
    pub mu0: f64,
    pub sigma0_sq: f64,
}

impl NullParams {
    pub fn new(mu0: f64, sigma0_sq: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::domain("mu0 must be finite"));
        }
        if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
            return Err(Error::domain(format!("sigma0^2 must be positive and finite, got {sigma0_sq}")));
        }
        Ok(NullParams { mu0, sigma0_sq })
    }

    /// From a standard deviation rather than a variance.
    pub fn from_sd(mu0: f64, sigma0: f64) -> Result<Self> {
        NullParams::new(mu0, sigma0 * sigma0)
    }

    /// `N(0, 1)`.
    pub fn standard() -> Self {
        NullParams { mu0: 0.0, sigma0_sq: 1.0 }
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0_sq.sqrt()
    }
}

/// Record of an adaptive frequency selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyChoice {
    pub gamma: f64,
    pub t_hat: f64,
    /// `n^-gamma`
    pub threshold: f64,
    pub cf_modulus_at_t_hat: f64,
}

/// `sigma0^2(f; t) = -(Re f Re f' + Im f Im f') / (t |f|^2)`.
pub fn sigma0_functional(f_val: ComplexValue, f_deriv: ComplexValue, t: f64) -> Result<f64> {
    let m2 = f_val.norm_sqr();
    if t == 0.0 || !t.is_finite() {
        return Err(Error::domain("sigma0 functional undefined at t = 0"));
    }
    if m2 == 0.0 || !m2.is_finite() {
        return Err(Error::domain("sigma0 functional undefined where |f| = 0"));
    }
    Ok(-(f_val.re * f_deriv.re + f_val.im * f_deriv.im) / (t * m2))
}

/// `mu0(f; t) = (Re f Im f' - Re f' Im f) / |f|^2`.
pub fn mu0_functional(f_val: ComplexValue, f_deriv: ComplexValue) -> Result<f64> {
    let m2 = f_val.norm_sqr();
    if m2 == 0.0 || !m2.is_finite() {
        return Err(Error::domain("mu0 functional undefined where |f| = 0"));
    }
    Ok((f_val.re * f_deriv.im - f_deriv.re * f_val.im) / m2)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::domain(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    Ok(())
}

enum Source<'a> {
    Data(&'a SampleVector),
    Mixture(&'a MixtureComponents),
}

impl Source<'_> {
    fn modulus(&self, t: f64) -> f64 {
        match self {
            // t is always finite here
            Source::Data(d) => ecf(d, t).map(|v| v.norm()).unwrap_or(f64::NAN),
            Source::Mixture(m) => mixture_cf(m, t).norm(),
        }
    }

    fn moduli(&self, start: f64, step: f64, count: usize) -> Vec<f64> {
        match self {
            Source::Data(d) => ecf_grid(d, start, step, count)
                .map(|v| v.into_iter().map(|c| c.norm()).collect())
                .unwrap_or_else(|_| vec![f64::NAN; count]),
            Source::Mixture(m) => (0..count).map(|k| mixture_cf(m, start + k as f64 * step).norm()).collect(),
        }
    }
}

/// Locates first crossings of `|cf|` with `n^-gamma` on `[0, ln n]`.
///
/// Grid moduli are computed lazily and cached, so several `gamma` values on the
/// same data share one scan.
pub struct FrequencyScanner<'a> {
    source: Source<'a>,
    n: usize,
    step: f64,
    moduli: Vec<f64>,
}

impl<'a> FrequencyScanner<'a> {
    pub fn for_data(data: &'a SampleVector) -> Result<Self> {
        FrequencyScanner::build(Source::Data(data), data.len())
    }

    /// Scanner over the analytic mixture CF, with thresholds computed for `n`.
    pub fn for_mixture(components: &'a MixtureComponents, n: usize) -> Result<Self> {
        FrequencyScanner::build(Source::Mixture(components), n)
    }

    fn build(source: Source<'a>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("need n >= 2 to choose a frequency"));
        }
        let upper = (n as f64).ln();
        Ok(FrequencyScanner { source, n, step: upper / SCAN_INTERVALS as f64, moduli: vec![1.0] })
    }

    fn grid_t(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    fn extend(&mut self) -> bool {
        let have = self.moduli.len();
        if have > SCAN_INTERVALS {
            return false;
        }
        let count = SCAN_WINDOW.min(SCAN_INTERVALS + 1 - have);
        let more = self.source.moduli(self.grid_t(have), self.step, count);
        self.moduli.extend(more);
        true
    }

    /// First crossing of level `n^-gamma`, refined by bisection.
    pub fn select(&mut self, gamma: f64) -> Result<FrequencyChoice> {
        check_gamma(gamma)?;
        let level = (self.n as f64).powf(-gamma);
        let mut k = 1;
        let hit = loop {
            if k >= self.moduli.len() && !self.extend() {
                break None;
            }
            if self.moduli[k] <= level {
                break Some(k);
            }
            k += 1;
        };
        let k = hit.ok_or(Error::FrequencyNotFound { n: self.n, gamma, threshold: level })?;

        let (mut lo, mut hi) = (self.grid_t(k - 1), self.grid_t(k));
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.source.modulus(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_hat = 0.5 * (lo + hi);
        Ok(FrequencyChoice { gamma, t_hat, threshold: level, cf_modulus_at_t_hat: self.source.modulus(t_hat) })
    }
}

/// Smallest `t` in `[0, ln n]` with `|phi_n(t)| = n^-gamma`.
///
/// The first grid interval (step `ln(n) / 10^4`) on which the modulus drops to
/// the level is refined by bisection to `1e-10`. Noise-induced crossings count.
pub fn select_frequency(data: &SampleVector, gamma: f64) -> Result<FrequencyChoice> {
    check_gamma(gamma)?;
    FrequencyScanner::for_data(data)?.select(gamma)
}

/// Non-stochastic counterpart of [`select_frequency`] on the analytic mixture CF.
pub fn oracle_frequency(components: &MixtureComponents, gamma: f64, n: usize) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(FrequencyScanner::for_mixture(components, n)?.select(gamma)?.t_hat)
}

/// Evaluates both functionals on the ECF at an already chosen frequency.
pub fn estimate_null_at(data: &SampleVector, choice: FrequencyChoice) -> Result<NullParams> {
    let (v, d) = ecf_with_derivative(data, choice.t_hat);
    let sigma0_sq = sigma0_functional(v, d, choice.t_hat)?;
    let mu0 = mu0_functional(v, d)?;
    if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
        return Err(Error::DegenerateEstimate { sigma0_sq });
    }
    NullParams::new(mu0, sigma0_sq)
}

/// Null parameters estimated at the adaptive frequency `t_hat_n(gamma)`.
pub fn estimate_null(data: &SampleVector, gamma: f64) -> Result<(NullParams, FrequencyChoice)> {
    let choice = select_frequency(data, gamma)?;
    Ok((estimate_null_at(data, choice)?, choice))
}
