//! Estimation of an unknown Gaussian null distribution and of the proportion of
//! non-null effects from a vector of z-scores.
//!
//! The null parameters are read off the empirical characteristic function at an
//! adaptively chosen frequency, where the contribution of the non-null effects
//! has decayed below the null component. The proportion estimator integrates the
//! null-corrected characteristic function against a triangular window.
//!
//! ```
//! use nullfreq::{estimate_null, SampleVector};
//! use nullfreq::datagen::{generate, MixtureSpec, RngSeed};
//!
//! let spec = MixtureSpec::main_step(10_000, 0.1, 1.0);
//! let (data, _truth) = generate(&spec, RngSeed::new(7)).unwrap();
//! let (null, freq) = estimate_null(&data, 0.1).unwrap();
//! assert!((null.sigma0_sq - 0.5).abs() < 0.1);
//! assert!(freq.t_hat > 0.0);
//! ```

pub mod charfn;
pub mod datagen;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod mtp;
pub mod null;
pub mod proportion;
pub mod quadrature;

pub use charfn::{ecf, ecf_derivative, gaussian_cf, mixture_cf, psi, ComplexValue, MixtureComponents, SampleVector};
pub use error::{Error, Result};
pub use null::{
    estimate_null, mu0_functional, oracle_frequency, select_frequency, sigma0_functional, FrequencyChoice, NullParams,
    DEFAULT_GAMMA,
};
pub use proportion::{estimate_proportion, estimate_proportion_plugin, omega_n, NullSource, ProportionEstimate};
