//! Normal and Student-t tail functions used to move between p-values and z-scores.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Standard normal survival function `1 - Phi(x)`.
pub fn normal_survival(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`normal_survival`]: the `x` with `1 - Phi(x) = p`.
///
/// Acklam's rational approximation followed by Halley refinement against the
/// erfc-based survival function.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("probability must lie in (0, 1), got {p}")));
    }
    // Acklam works on the lower tail; the survival quantile is its negation.
    let mut x = -acklam_lower(p);
    for _ in 0..2 {
        let e = normal_survival(x) - p;
        let d = normal_density(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        // Halley step for g(x) = S(x) - p with S' = -phi, S'' = x phi.
        let u = e / -d;
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn acklam_lower(p: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] =
        [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Survival function of Student's t with `df` degrees of freedom, via the
/// regularized incomplete beta function.
pub fn student_t_survival(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::domain("degrees of freedom must be at least 1"));
    }
    if x.is_nan() {
        return Err(Error::domain("t statistic is NaN"));
    }
    let v = df as f64;
    if x.is_infinite() {
        return Ok(if x > 0.0 { 0.0 } else { 1.0 });
    }
    let tail = 0.5 * beta_reg(0.5 * v, 0.5, v / (v + x * x));
    Ok(if x >= 0.0 { tail } else { 1.0 - tail })
}

/// z-score of a t statistic: `Phi_bar^{-1}(F_bar_df(y))`.
pub fn t_to_z(y: f64, df: u32) -> Result<f64> {
    let p = student_t_survival(y, df)?;
    normal_quantile(p)
}
