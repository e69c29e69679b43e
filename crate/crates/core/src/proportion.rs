//! Proportion of non-null effects.
//!
//! `Omega_n(t) = int_{-1}^{1} (1 - |xi|) Re(phi_n(t xi) e^{-i mu0 t xi + sigma0^2 t^2 xi^2 / 2}) d xi`
//! equals one in expectation for null samples, so `1 - Omega_n(t)` measures the
//! non-null mass visible at frequency `t`. The estimate is its supremum over
//! `0 <= t <= sqrt(2 gamma ln n)`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::charfn::{ecf, ecf_grid, mixture_cf, ComplexValue, EcfChebyshev, MixtureComponents, SampleVector};
use crate::error::{Error, Result};
use crate::null::{estimate_null, NullParams};
use crate::quadrature::GaussLegendre;

/// Gauss–Legendre nodes on `[0, 1]`.
pub const QUADRATURE_NODES: usize = 201;

/// Uniform points on `[0, t_max]`, endpoints included.
pub const SUP_GRID_POINTS: usize = 2001;

/// Largest exponent `sigma0^2 t^2 / 2` accepted before the weight overflows.
const MAX_EXPONENT: f64 = 700.0;

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::on_interval(QUADRATURE_NODES, 0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullSource {
    Given,
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub epsilon_hat: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub argmax_t: f64,
    pub null_used: NullParams,
    pub null_source: NullSource,
    /// Set when `epsilon_hat > 1`; the value is reported unclamped.
    pub exceeds_one: bool,
}

/// `sqrt(2 gamma ln n)`
pub fn proportion_t_max(n: usize, gamma: f64) -> f64 {
    (2.0 * gamma * (n as f64).ln()).sqrt()
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("omega needs finite t >= 0, got {t}")));
    }
    Ok(())
}

fn check_exponent(null: NullParams, t: f64) -> Result<()> {
    let e = 0.5 * null.sigma0_sq * t * t;
    if !e.is_finite() || e > MAX_EXPONENT {
        return Err(Error::domain(format!("omega integrand overflows: sigma0^2 t^2 / 2 = {e:.3e} at t = {t}")));
    }
    Ok(())
}

/// `Omega` for an arbitrary characteristic function `cf`, using `rule` on `[0, 1]`
/// and the even symmetry of the integrand.
pub fn omega_from_cf<F>(cf: F, null: NullParams, t: f64, rule: &GaussLegendre) -> Result<f64>
where
    F: Fn(f64) -> ComplexValue,
{
    check_t(t)?;
    check_exponent(null, t)?;
    if t == 0.0 {
        // exact value; the rule only reproduces it to rounding
        return Ok(1.0);
    }
    let mut acc = 0.0;
    for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
        let s = t * xi;
        let v = cf(s) * ComplexValue::from_polar(1.0, -null.mu0 * s);
        acc += w * (1.0 - xi) * v.re * (0.5 * null.sigma0_sq * s * s).exp();
    }
    let omega = 2.0 * acc;
    if !omega.is_finite() {
        return Err(Error::domain(format!("omega is not finite at t = {t}")));
    }
    Ok(omega)
}

/// `Omega_n(t)` on the data with the default 201-node rule.
pub fn omega_n(data: &SampleVector, null: NullParams, t: f64) -> Result<f64> {
    omega_n_with_rule(data, null, t, default_rule())
}

pub fn omega_n_with_rule(data: &SampleVector, null: NullParams, t: f64, rule: &GaussLegendre) -> Result<f64> {
    check_t(t)?;
    omega_from_cf(|s| ecf(data, s).unwrap_or(ComplexValue::new(f64::NAN, f64::NAN)), null, t, rule)
}

/// Non-stochastic `Omega(t)` with the analytic mixture CF in place of the ECF.
pub fn omega_mixture(components: &MixtureComponents, null: NullParams, t: f64) -> Result<f64> {
    omega_from_cf(|s| mixture_cf(components, s), null, t, default_rule())
}

/// ECF values at `t_i * xi_k` for every sup-grid point `t_i` and quadrature
/// node `xi_k`. They do not depend on the null, so known-null and plug-in
/// estimates on the same data share one table.
pub struct ProportionGrid {
    gamma: f64,
    ts: Vec<f64>,
    rule: GaussLegendre,
    /// `table[k][i] = phi_n(t_i * xi_k)`
    table: Vec<Vec<ComplexValue>>,
}

impl ProportionGrid {
    /// Default grid: 2001 points on `[0, sqrt(2 gamma ln n)]`, 201 nodes.
    pub fn new(data: &SampleVector, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if data.len() < 2 {
            return Err(Error::domain("need n >= 2 to estimate the proportion"));
        }
        let t_max = proportion_t_max(data.len(), gamma);
        let mut g = ProportionGrid::with_range(data, t_max, SUP_GRID_POINTS, QUADRATURE_NODES)?;
        g.gamma = gamma;
        Ok(g)
    }

    /// Custom grid of `points` uniform frequencies on `[0, t_max]` and a
    /// `nodes`-point rule. `gamma` is recorded as NaN.
    pub fn with_range(data: &SampleVector, t_max: f64, points: usize, nodes: usize) -> Result<Self> {
        check_t(t_max)?;
        if points < 2 || nodes < 1 {
            return Err(Error::domain("grid needs at least two points and one node"));
        }
        let rule = GaussLegendre::on_interval(nodes, 0.0, 1.0);
        let step = t_max / (points - 1) as f64;
        let ts: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
        let table = match EcfChebyshev::new(data, 0.0, t_max.max(f64::MIN_POSITIVE))? {
            Some(cheb) => rule.nodes().iter().map(|&xi| ts.iter().map(|&t| cheb.eval(t * xi)).collect()).collect(),
            None => {
                rule.nodes().iter().map(|&xi| ecf_grid(data, 0.0, step * xi, points)).collect::<Result<Vec<_>>>()?
            }
        };
        Ok(ProportionGrid { gamma: f64::NAN, ts, rule, table })
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().expect("grid is non-empty")
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    /// `Omega_n` at every grid frequency.
    pub fn omega(&self, null: NullParams) -> Result<Vec<f64>> {
        check_exponent(null, self.t_max())?;
        let mut out = vec![0.0; self.ts.len()];
        for (k, (&xi, &w)) in self.rule.nodes().iter().zip(self.rule.weights()).enumerate() {
            let row = &self.table[k];
            let wk = 2.0 * w * (1.0 - xi);
            for (i, &t) in self.ts.iter().enumerate() {
                let s = t * xi;
                let v = row[i] * ComplexValue::from_polar(1.0, -null.mu0 * s);
                out[i] += wk * v.re * (0.5 * null.sigma0_sq * s * s).exp();
            }
        }
        for (o, &t) in out.iter_mut().zip(&self.ts) {
            if t == 0.0 {
                *o = 1.0;
            }
        }
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("omega is not finite at t = {}", self.ts[i])));
        }
        Ok(out)
    }

    /// Supremum of `1 - Omega_n` over the grid; ties go to the smaller `t`.
    pub fn estimate(&self, null: NullParams, source: NullSource) -> Result<ProportionEstimate> {
        let omega = self.omega(null)?;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (&t, &o) in self.ts.iter().zip(&omega) {
            let v = 1.0 - o;
            if v > best.0 {
                best = (v, t);
            }
        }
        Ok(ProportionEstimate {
            epsilon_hat: best.0,
            gamma: self.gamma,
            t_max: self.t_max(),
            argmax_t: best.1,
            null_used: null,
            null_source: source,
            exceeds_one: best.0 > 1.0,
        })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::domain(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    Ok(())
}

/// Proportion estimate with a known null.
pub fn estimate_proportion(data: &SampleVector, null: NullParams, gamma: f64) -> Result<ProportionEstimate> {
    ProportionGrid::new(data, gamma)?.estimate(null, NullSource::Given)
}

/// Estimates the null at `gamma_null`, then the proportion at `gamma_prop`
/// with the estimated null plugged in.
pub fn estimate_proportion_plugin(data: &SampleVector, gamma_null: f64, gamma_prop: f64) -> Result<ProportionEstimate> {
    check_gamma(gamma_prop)?;
    let (null, _) = estimate_null(data, gamma_null)?;
    ProportionGrid::new(data, gamma_prop)?.estimate(null, NullSource::PlugIn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::{gaussian_cf, Component};

    fn data() -> SampleVector {
        SampleVector::new((0..300).map(|i| ((i * 131 % 300) as f64) / 60.0 - 2.4).collect()).unwrap()
    }

    #[test]
    fn omega_at_zero_is_one() {
        let null = NullParams::new(0.3, 1.7).unwrap();
        assert!((omega_n(&data(), null, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn omega_pure_null_analytic_is_one() {
        let null = NullParams::standard();
        for t in [0.2, 1.0, 2.5, 4.0] {
            let o = omega_from_cf(|s| gaussian_cf(null, s), null, t, default_rule()).unwrap();
            assert!((o - 1.0).abs() < 1e-12, "t={t} o={o}");
        }
        let shifted = NullParams::new(-0.5, 0.5).unwrap();
        let o = omega_from_cf(|s| gaussian_cf(shifted, s), shifted, 2.0, default_rule()).unwrap();
        assert!((o - 1.0).abs() < 1e-12);
    }

    #[test]
    fn omega_rejects_bad_t() {
        let null = NullParams::standard();
        assert!(omega_n(&data(), null, -0.1).is_err());
        assert!(omega_n(&data(), null, f64::NAN).is_err());
        assert!(omega_n(&data(), null, 100.0).is_err());
    }

    #[test]
    fn grid_agrees_with_pointwise_omega() {
        let d = data();
        let null = NullParams::new(0.1, 0.9).unwrap();
        let grid = ProportionGrid::new(&d, 0.1).unwrap();
        let om = grid.omega(null).unwrap();
        for i in [0, 1, 500, 1333, 2000] {
            let direct = omega_n(&d, null, grid.ts()[i]).unwrap();
            assert!((om[i] - direct).abs() < 1e-12, "i={i}");
        }
        let est = grid.estimate(null, NullSource::Given).unwrap();
        assert!(est.epsilon_hat >= 0.0);
        assert!(est.argmax_t >= 0.0 && est.argmax_t <= est.t_max);
        let at = omega_n(&d, null, est.argmax_t).unwrap();
        assert!((est.epsilon_hat - (1.0 - at)).abs() < 1e-12);
    }

    #[test]
    fn analytic_mixture_omega_bounded_by_epsilon() {
        let null = NullParams::new(-0.5, 0.5).unwrap();
        let comps: Vec<Component> =
            (0..20).map(|i| Component { mu: (i as f64 * 0.9).cos(), sigma: 1.0 + i as f64 / 40.0 }).collect();
        let m = MixtureComponents::new(null, comps, 200).unwrap();
        for t in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let o = omega_mixture(&m, null, t).unwrap();
            assert!(o <= 1.0 + 1e-12);
            assert!(1.0 - o <= m.epsilon() + 1e-12);
        }
    }

    #[test]
    fn gamma_domain() {
        assert!(estimate_proportion(&data(), NullParams::standard(), 0.0).is_err());
        assert!(estimate_proportion(&data(), NullParams::standard(), 0.5).is_err());
        assert!(estimate_proportion_plugin(&data(), 0.1, 0.7).is_err());
    }
}
