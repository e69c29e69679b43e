//! Empirical and analytic characteristic functions.
//!
//! All sums over samples use a fixed reduction tree (pairwise for single
//! frequencies, chunked with compensated accumulation for frequency grids), so
//! results are reproducible bit-for-bit for a given input. [`EcfChebyshev`]
//! trades the per-frequency cost `O(n)` for a one-off Chebyshev fit when many
//! frequencies in a short interval are needed.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::null::NullParams;

/// A complex number holding a characteristic-function value or derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl ComplexValue {
    pub const ZERO: ComplexValue = ComplexValue { re: 0.0, im: 0.0 };
    pub const ONE: ComplexValue = ComplexValue { re: 1.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        ComplexValue { re, im }
    }

    /// `r * e^{i theta}`
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        ComplexValue { re: r * c, im: r * s }
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(self) -> Self {
        ComplexValue { re: self.re, im: -self.im }
    }

    pub fn scale(self, k: f64) -> Self {
        ComplexValue { re: self.re * k, im: self.im * k }
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Add for ComplexValue {
    type Output = ComplexValue;
    fn add(self, o: ComplexValue) -> ComplexValue {
        ComplexValue { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for ComplexValue {
    type Output = ComplexValue;
    fn sub(self, o: ComplexValue) -> ComplexValue {
        ComplexValue { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for ComplexValue {
    type Output = ComplexValue;
    fn mul(self, o: ComplexValue) -> ComplexValue {
        ComplexValue { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

/// Finite z-scores; the only input the estimators consume.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    values: Vec<f64>,
}

impl SampleVector {
    /// Fails on empty input or any non-finite value.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample vector is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample value at index {i} is not finite")));
        }
        Ok(SampleVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        SampleVector::new(self.values.iter().map(|v| v + c).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

/// One Gaussian component `N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub mu: f64,
    pub sigma: f64,
}

/// A Gaussian mixture with `n` equally weighted components, `n - nonnull.len()`
/// of which equal the null.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponents {
    null: NullParams,
    nonnull: Vec<Component>,
    n: usize,
}

impl MixtureComponents {
    /// Checks eligibility: every non-null `sigma >= sigma0` and the non-null
    /// fraction is below 1/2.
    pub fn new(null: NullParams, nonnull: Vec<Component>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("mixture has no components"));
        }
        if nonnull.len() * 2 >= n {
            return Err(Error::domain(format!("non-null fraction {}/{} is not below 1/2", nonnull.len(), n)));
        }
        let sigma0 = null.sigma0();
        for (i, c) in nonnull.iter().enumerate() {
            if !(c.sigma.is_finite() && c.mu.is_finite()) || c.sigma < sigma0 * (1.0 - 1e-12) {
                return Err(Error::domain(format!(
                    "non-null component {i} has sigma {} below sigma0 {sigma0}",
                    c.sigma
                )));
            }
        }
        Ok(MixtureComponents { null, nonnull, n })
    }

    /// A mixture made only of the null.
    pub fn null_only(null: NullParams, n: usize) -> Result<Self> {
        MixtureComponents::new(null, Vec::new(), n)
    }

    pub fn null(&self) -> NullParams {
        self.null
    }

    pub fn nonnull(&self) -> &[Component] {
        &self.nonnull
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Proportion of non-null components.
    pub fn epsilon(&self) -> f64 {
        self.nonnull.len() as f64 / self.n as f64
    }
}

const PAIRWISE_BLOCK: usize = 128;

fn pairwise_sum<F>(xs: &[f64], f: &F) -> ComplexValue
where
    F: Fn(f64) -> ComplexValue,
{
    if xs.len() <= PAIRWISE_BLOCK {
        let mut acc = ComplexValue::ZERO;
        for &x in xs {
            acc = acc + f(x);
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid], f) + pairwise_sum(&xs[mid..], f)
    }
}

/// Empirical characteristic function `(1/n) sum_j e^{i t X_j}`.
pub fn ecf(data: &SampleVector, t: f64) -> Result<ComplexValue> {
    if !t.is_finite() {
        return Err(Error::domain("frequency must be finite"));
    }
    let n = data.len() as f64;
    let sum = pairwise_sum(data.values(), &|x| ComplexValue::from_polar(1.0, t * x));
    Ok(sum.scale(1.0 / n))
}

/// Derivative of the empirical characteristic function:
/// `(1/n) sum_j (i X_j)^order e^{i t X_j}` for `order` 1 or 2.
pub fn ecf_derivative(data: &SampleVector, t: f64, order: u32) -> Result<ComplexValue> {
    if !t.is_finite() {
        return Err(Error::domain("frequency must be finite"));
    }
    let n = data.len() as f64;
    let sum = match order {
        1 => pairwise_sum(data.values(), &|x| {
            let (s, c) = (t * x).sin_cos();
            ComplexValue::new(-x * s, x * c)
        }),
        2 => pairwise_sum(data.values(), &|x| {
            let (s, c) = (t * x).sin_cos();
            let x2 = x * x;
            ComplexValue::new(-x2 * c, -x2 * s)
        }),
        _ => return Err(Error::domain(format!("derivative order {order} not in {{1, 2}}"))),
    };
    Ok(sum.scale(1.0 / n))
}

/// Value and first derivative of the ECF in one pass.
pub(crate) fn ecf_with_derivative(data: &SampleVector, t: f64) -> (ComplexValue, ComplexValue) {
    fn go(xs: &[f64], t: f64) -> (ComplexValue, ComplexValue) {
        if xs.len() <= PAIRWISE_BLOCK {
            let (mut v, mut d) = (ComplexValue::ZERO, ComplexValue::ZERO);
            for &x in xs {
                let (s, c) = (t * x).sin_cos();
                v = v + ComplexValue::new(c, s);
                d = d + ComplexValue::new(-x * s, x * c);
            }
            (v, d)
        } else {
            let mid = xs.len() / 2;
            let (v1, d1) = go(&xs[..mid], t);
            let (v2, d2) = go(&xs[mid..], t);
            (v1 + v2, d1 + d2)
        }
    }
    let inv = 1.0 / data.len() as f64;
    let (v, d) = go(data.values(), t);
    (v.scale(inv), d.scale(inv))
}

const GRID_CHUNK: usize = 256;
/// Grid steps between exact re-evaluations of the phase.
const GRID_ANCHOR: usize = 32;

/// ECF on the uniform grid `start + k * step`, `k = 0..count`.
///
/// Each sample's phase is evaluated exactly every `GRID_ANCHOR` grid points
/// and advanced by a fixed rotation in between, which bounds rounding drift to
/// a few ulps per anchor block. Samples are summed in fixed chunks whose
/// partial sums are combined with Neumaier compensation.
pub fn ecf_grid(data: &SampleVector, start: f64, step: f64, count: usize) -> Result<Vec<ComplexValue>> {
    if !(start.is_finite() && step.is_finite()) {
        return Err(Error::domain("grid start and step must be finite"));
    }
    let mut sum_re = vec![0.0; count];
    let mut sum_im = vec![0.0; count];
    let mut comp_re = vec![0.0; count];
    let mut comp_im = vec![0.0; count];
    let mut loc_re = vec![0.0; count];
    let mut loc_im = vec![0.0; count];

    for chunk in data.values().chunks(GRID_CHUNK) {
        loc_re.iter_mut().for_each(|v| *v = 0.0);
        loc_im.iter_mut().for_each(|v| *v = 0.0);
        for &x in chunk {
            let (rs, rc) = (step * x).sin_cos();
            let mut b = 0;
            while b < count {
                let end = (b + GRID_ANCHOR).min(count);
                let (mut zs, mut zc) = ((start + b as f64 * step) * x).sin_cos();
                for k in b..end {
                    loc_re[k] += zc;
                    loc_im[k] += zs;
                    let nc = zc * rc - zs * rs;
                    zs = zc * rs + zs * rc;
                    zc = nc;
                }
                b = end;
            }
        }
        for k in 0..count {
            neumaier_add(&mut sum_re[k], &mut comp_re[k], loc_re[k]);
            neumaier_add(&mut sum_im[k], &mut comp_im[k], loc_im[k]);
        }
    }
    let inv = 1.0 / data.len() as f64;
    Ok((0..count).map(|k| ComplexValue::new((sum_re[k] + comp_re[k]) * inv, (sum_im[k] + comp_im[k]) * inv)).collect())
}

#[inline]
fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Largest Chebyshev degree [`EcfChebyshev`] will use.
pub const CHEBYSHEV_MAX_DEGREE: usize = 4096;

/// Chebyshev interpolant of the ECF on a bounded frequency interval.
///
/// With the data centred at `c` and `R = max |X_j - c|`, each term
/// `e^{i s (X_j - c)}` on `[lo, hi]` is `e^{i a u}` in the scaled variable
/// `u in [-1, 1]` with `|a| <= R (hi - lo) / 2`. Its Chebyshev coefficients are
/// `2 i^k J_k(a)`, bounded by `2 (|a|/2)^k / k!`, and the degree is the first
/// `k` past `|a|` where that bound drops below `1e-18`. Evaluation is then
/// `e^{i s c}` times a Clenshaw sum, independent of `n`.
#[derive(Debug, Clone)]
pub struct EcfChebyshev {
    lo: f64,
    hi: f64,
    centre: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl EcfChebyshev {
    /// `None` when the required degree exceeds [`CHEBYSHEV_MAX_DEGREE`].
    pub fn new(data: &SampleVector, lo: f64, hi: f64) -> Result<Option<Self>> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::domain(format!("interpolation interval [{lo}, {hi}] is empty or not finite")));
        }
        let (min, max) =
            data.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let centre = 0.5 * (min + max);
        let a = 0.5 * (max - min) * 0.5 * (hi - lo);
        let Some(degree) = chebyshev_degree(a) else {
            return Ok(None);
        };
        let shifted = data.shifted(-centre)?;
        let m = degree + 1;
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let angle = |j: usize| std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
        let values: Vec<ComplexValue> =
            (0..m).map(|j| ecf(&shifted, mid + half * angle(j).cos())).collect::<Result<_>>()?;
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for k in 0..m {
            let (mut sr, mut si) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let w = (k as f64 * angle(j)).cos();
                sr += v.re * w;
                si += v.im * w;
            }
            let scale = if k == 0 { 1.0 } else { 2.0 } / m as f64;
            re[k] = sr * scale;
            im[k] = si * scale;
        }
        Ok(Some(EcfChebyshev { lo, hi, centre, re, im }))
    }

    pub fn degree(&self) -> usize {
        self.re.len() - 1
    }

    /// `phi_n(s)` for `s` in `[lo, hi]`.
    pub fn eval(&self, s: f64) -> ComplexValue {
        let u = (2.0 * s - self.lo - self.hi) / (self.hi - self.lo);
        let g = ComplexValue::new(clenshaw(&self.re, u), clenshaw(&self.im, u));
        ComplexValue::from_polar(1.0, s * self.centre) * g
    }
}

fn clenshaw(c: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c[1..].iter().rev() {
        let b0 = 2.0 * u * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + c[0]
}

fn chebyshev_degree(a: f64) -> Option<usize> {
    let h = 0.5 * a.abs();
    // log of the bound (|a|/2)^k / k!, updated incrementally.
    let mut log_bound = 0.0;
    for k in 1..=CHEBYSHEV_MAX_DEGREE {
        log_bound += if h > 0.0 { h.ln() } else { f64::NEG_INFINITY } - (k as f64).ln();
        if k >= 8 && k as f64 > a.abs() && log_bound < (1e-18f64).ln() {
            return Some(k);
        }
    }
    None
}

/// Unit-mass Gaussian characteristic function `e^{i mu0 t - sigma0^2 t^2 / 2}`.
pub fn gaussian_cf(params: NullParams, t: f64) -> ComplexValue {
    ComplexValue::from_polar((-0.5 * params.sigma0_sq * t * t).exp(), params.mu0 * t)
}

/// `d/dt` of [`gaussian_cf`]: `(i mu0 - sigma0^2 t) * cf(t)`.
pub fn gaussian_cf_derivative(params: NullParams, t: f64) -> ComplexValue {
    ComplexValue::new(-params.sigma0_sq * t, params.mu0) * gaussian_cf(params, t)
}

fn component_cf(c: Component, t: f64) -> ComplexValue {
    ComplexValue::from_polar((-0.5 * c.sigma * c.sigma * t * t).exp(), c.mu * t)
}

fn component_cf_derivative(c: Component, t: f64) -> ComplexValue {
    ComplexValue::new(-c.sigma * c.sigma * t, c.mu) * component_cf(c, t)
}

/// Characteristic function of the mixture, `(1/n) sum_j e^{i t mu_j - sigma_j^2 t^2 / 2}`.
pub fn mixture_cf(components: &MixtureComponents, t: f64) -> ComplexValue {
    let n = components.n as f64;
    let null_weight = (components.n - components.nonnull.len()) as f64 / n;
    let mut nonnull = ComplexValue::ZERO;
    for &c in &components.nonnull {
        nonnull = nonnull + component_cf(c, t);
    }
    gaussian_cf(components.null, t).scale(null_weight) + nonnull.scale(1.0 / n)
}

/// Derivative in `t` of [`mixture_cf`].
pub fn mixture_cf_derivative(components: &MixtureComponents, t: f64) -> ComplexValue {
    let n = components.n as f64;
    let null_weight = (components.n - components.nonnull.len()) as f64 / n;
    let mut nonnull = ComplexValue::ZERO;
    for &c in &components.nonnull {
        nonnull = nonnull + component_cf_derivative(c, t);
    }
    gaussian_cf_derivative(components.null, t).scale(null_weight) + nonnull.scale(1.0 / n)
}

/// Non-null distortion factor:
/// `eps_n * Ave_nonnull e^{i (mu_j - mu0) t - (sigma_j^2 - sigma0^2) t^2 / 2}`.
///
/// The mixture CF factors as `(1 - eps_n) cf0(t) + cf0(t) psi(t)`.
pub fn psi(components: &MixtureComponents, t: f64) -> ComplexValue {
    let null = components.null;
    let mut acc = ComplexValue::ZERO;
    for c in &components.nonnull {
        let decay = (-0.5 * (c.sigma * c.sigma - null.sigma0_sq) * t * t).exp();
        acc = acc + ComplexValue::from_polar(decay, (c.mu - null.mu0) * t);
    }
    acc.scale(1.0 / components.n as f64)
}

/// Derivative in `t` of [`psi`].
pub fn psi_derivative(components: &MixtureComponents, t: f64) -> ComplexValue {
    let null = components.null;
    let mut acc = ComplexValue::ZERO;
    for c in &components.nonnull {
        let dv = c.sigma * c.sigma - null.sigma0_sq;
        let dm = c.mu - null.mu0;
        let v = ComplexValue::from_polar((-0.5 * dv * t * t).exp(), dm * t);
        acc = acc + ComplexValue::new(-dv * t, dm) * v;
    }
    acc.scale(1.0 / components.n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sv(v: &[f64]) -> SampleVector {
        SampleVector::new(v.to_vec()).unwrap()
    }

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn chebyshev_matches_direct_ecf() {
        let mut x = 0.37f64;
        let vals: Vec<f64> = (0..3000)
            .map(|i| {
                x = (x * 3.9 * (1.0 - x)).clamp(1e-9, 1.0 - 1e-9);
                (x - 0.5) * 9.0 + if i % 10 == 0 { 2.5 } else { -0.5 }
            })
            .collect();
        let d = sv(&vals);
        for &(lo, hi) in &[(0.0, 1.36), (0.0, 3.8), (-2.0, 5.0)] {
            let c = EcfChebyshev::new(&d, lo, hi).unwrap().unwrap();
            for i in 0..=200 {
                let s = lo + (hi - lo) * i as f64 / 200.0;
                let err = (c.eval(s) - ecf(&d, s).unwrap()).norm();
                assert!(err < 2e-14, "s={s} err={err} degree={}", c.degree());
            }
        }
        let shifted = d.shifted(1000.0).unwrap();
        let c = EcfChebyshev::new(&shifted, 0.0, 1.36).unwrap().unwrap();
        assert!((c.eval(0.9) - ecf(&shifted, 0.9).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn chebyshev_degree_grows_with_bandwidth() {
        assert!(chebyshev_degree(0.0).unwrap() >= 8);
        assert!(chebyshev_degree(30.0).unwrap() > 30);
        assert!(chebyshev_degree(1e5).is_none());
        let wide = sv(&[-1e4, 1e4]);
        assert!(EcfChebyshev::new(&wide, 0.0, 2.0).unwrap().is_none());
        assert!(EcfChebyshev::new(&wide, 1.0, 1.0).is_err());
    }

    #[test]
    fn ecf_symmetric_three_points() {
        let v = ecf(&sv(&[-1.0, 0.0, 1.0]), PI / 2.0).unwrap();
        assert!(close(v, ComplexValue::new(1.0 / 3.0, 0.0), 1e-15));
    }

    #[test]
    fn ecf_of_zero_is_one() {
        for t in [-3.0, 0.0, 0.5, 100.0] {
            assert_eq!(ecf(&sv(&[0.0]), t).unwrap(), ComplexValue::ONE);
        }
    }

    #[test]
    fn empty_and_nonfinite_rejected() {
        assert!(SampleVector::new(vec![]).is_err());
        assert!(SampleVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ecf(&sv(&[1.0]), f64::INFINITY).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = ecf_derivative(&sv(&[1.0]), 0.0, 1).unwrap();
        assert!(close(d, ComplexValue::new(0.0, 1.0), 1e-15));
        let d = ecf_derivative(&sv(&[-1.0, 1.0]), 0.0, 1).unwrap();
        assert!(close(d, ComplexValue::ZERO, 1e-15));
        assert!(ecf_derivative(&sv(&[1.0]), 0.0, 3).is_err());
        assert!(ecf_derivative(&sv(&[1.0]), 0.0, 0).is_err());
    }

    #[test]
    fn second_derivative_matches_difference_of_first() {
        let data = sv(&[-1.3, 0.2, 0.7, 2.5, -0.4]);
        let h = 1e-5;
        let t = 0.9;
        let fd = (ecf_derivative(&data, t + h, 1).unwrap() - ecf_derivative(&data, t - h, 1).unwrap()).scale(0.5 / h);
        let d2 = ecf_derivative(&data, t, 2).unwrap();
        assert!((fd - d2).norm() / d2.norm() < 1e-6);
    }

    #[test]
    fn gaussian_cf_examples() {
        let std = NullParams::new(0.0, 1.0).unwrap();
        assert_eq!(gaussian_cf(std, 0.0), ComplexValue::ONE);
        let p = NullParams::new(-0.5, 0.5).unwrap();
        let v = gaussian_cf(p, 1.0);
        let want = ComplexValue::new((-0.5f64).cos(), (-0.5f64).sin()).scale((-0.25f64).exp());
        assert!(close(v, want, 1e-15));
        let t = (2.0 * 10f64.ln()).sqrt();
        assert!((gaussian_cf(std, t).norm() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mixture_cf_examples() {
        let std = NullParams::new(0.0, 1.0).unwrap();
        let degenerate = MixtureComponents::null_only(std, 10).unwrap();
        assert!(close(mixture_cf(&degenerate, 0.8), gaussian_cf(std, 0.8), 1e-16));

        // 50/50 of N(-1,1) and N(1,1); built directly since eligibility caps eps < 1/2.
        let m = MixtureComponents {
            null: NullParams::new(-1.0, 1.0).unwrap(),
            nonnull: vec![Component { mu: 1.0, sigma: 1.0 }],
            n: 2,
        };
        let v = mixture_cf(&m, PI);
        let want = PI.cos() * (-PI * PI / 2.0).exp();
        assert!((v.re - want).abs() < 1e-16 && v.im.abs() < 1e-16);
    }

    #[test]
    fn eligibility_enforced() {
        let null = NullParams::new(0.0, 1.0).unwrap();
        assert!(MixtureComponents::new(null, vec![Component { mu: 1.0, sigma: 0.9 }], 10).is_err());
        assert!(MixtureComponents::new(null, vec![Component { mu: 1.0, sigma: 1.0 }; 5], 10).is_err());
        assert!(MixtureComponents::new(null, vec![Component { mu: 1.0, sigma: 1.0 }; 4], 10).is_ok());
    }

    #[test]
    fn psi_examples() {
        let null = NullParams::new(0.3, 0.8).unwrap();
        let none = MixtureComponents::null_only(null, 5).unwrap();
        assert_eq!(psi(&none, 1.7), ComplexValue::ZERO);
        let one = MixtureComponents::new(null, vec![Component { mu: 1.3, sigma: null.sigma0() }], 10).unwrap();
        assert!(close(psi(&one, 0.0), ComplexValue::new(0.1, 0.0), 1e-16));
    }

    #[test]
    fn psi_derivative_matches_finite_difference() {
        let null = NullParams::new(-0.5, 0.5).unwrap();
        let comps = vec![
            Component { mu: 0.4, sigma: 1.1 },
            Component { mu: -1.2, sigma: 1.4 },
            Component { mu: 2.0, sigma: 0.9 },
        ];
        let m = MixtureComponents::new(null, comps, 20).unwrap();
        let h = 1e-6;
        for t in [0.3, 1.1, 2.2] {
            let fd = (psi(&m, t + h) - psi(&m, t - h)).scale(0.5 / h);
            assert!((fd - psi_derivative(&m, t)).norm() < 1e-8);
            let fd = (mixture_cf(&m, t + h) - mixture_cf(&m, t - h)).scale(0.5 / h);
            assert!((fd - mixture_cf_derivative(&m, t)).norm() < 1e-8);
        }
    }

    #[test]
    fn grid_matches_direct_evaluation() {
        let data = sv(&(0..1000).map(|i| ((i * 7919) % 1000) as f64 / 97.0 - 5.0).collect::<Vec<_>>());
        let step = 0.0123;
        let g = ecf_grid(&data, 0.3, step, 300).unwrap();
        for (k, v) in g.iter().enumerate() {
            let direct = ecf(&data, 0.3 + k as f64 * step).unwrap();
            assert!((*v - direct).norm() < 1e-13, "k={k}");
        }
    }

    proptest! {
        #[test]
        fn ecf_conjugate_symmetry_and_bound(
            xs in prop::collection::vec(-50.0f64..50.0, 1..200),
            t in -20.0f64..20.0,
        ) {
            let data = SampleVector::new(xs).unwrap();
            let a = ecf(&data, t).unwrap();
            let b = ecf(&data, -t).unwrap();
            prop_assert!((a - b.conj()).norm() < 1e-14);
            prop_assert!(a.norm() <= 1.0 + 1e-12);
            let one = ecf(&data, 0.0).unwrap();
            prop_assert!((one - ComplexValue::ONE).norm() <= 1e-15);
        }

        #[test]
        fn mixture_factorization(
            mu0 in -2.0f64..2.0,
            s0 in 0.3f64..2.0,
            comps in prop::collection::vec((-3.0f64..3.0, 0.0f64..1.5), 0..10),
            t in -4.0f64..4.0,
        ) {
            let null = NullParams::new(mu0, s0 * s0).unwrap();
            let nonnull: Vec<Component> = comps.iter().map(|&(m, ds)| Component { mu: m, sigma: s0 + ds }).collect();
            let n = 2 * nonnull.len() + 1;
            let m = MixtureComponents::new(null, nonnull, n).unwrap();
            let cf0 = gaussian_cf(null, t);
            let factored = cf0.scale(1.0 - m.epsilon()) + cf0 * psi(&m, t);
            prop_assert!((mixture_cf(&m, t) - factored).norm() < 1e-13);
            prop_assert!(mixture_cf(&m, t).norm() <= 1.0 + 1e-12);
        }
    }
}
