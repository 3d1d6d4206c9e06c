//! Detection of observations poorly explained by a homoscedastic Gaussian
//! linear model.
//!
//! The test statistic is `T = max_i |ê_i|`, the largest externally
//! studentized residual. Conditionally on the design its law does not depend
//! on the regression coefficients or the noise variance, so it can be
//! tabulated once per design by simulating standard-normal responses. The
//! `1 - α` quantile of that law is a family-wise threshold: every residual
//! above it is reported as abnormal.
//!
//! ```
//! use devian::{build_design, detect, fit_ols, simulate_null_t, SimulationConfig};
//!
//! let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
//! let y = vec![2.1, 3.9, 6.2, 7.8, 10.1, 30.0, 14.2, 15.8];
//! let design = build_design(&[x], 8)?;
//! let model = fit_ols(&design, &y)?;
//! let config = SimulationConfig { nsim: 2_000, seed: 7, ..Default::default() };
//! let null = simulate_null_t(&design, &config)?;
//! let report = detect(&model, &null, 0.05)?;
//! assert_eq!(report.outlier_indices, vec![5]);
//! # Ok::<(), devian::Error>(())
//! ```

pub mod bench;
pub mod cli;
pub mod data_io;
pub mod detection;
pub mod error;
pub mod monte_carlo;
pub mod regression;
pub mod stats;
pub mod synth;

pub use detection::{detect, detect_with_residuals, DetectionReport};
pub use error::{Error, Result};
pub use monte_carlo::{
    null_draws, simulate_null_t, simulate_null_t_with, EmpiricalTDistribution, ResidualMethod,
    SimulationConfig,
};
pub use regression::{
    build_design, fit_ols, statistic_t, studentized_residuals, studentized_residuals_oracle,
    zscore_last, DesignMatrix, FittedModel, ResidualVector,
};
