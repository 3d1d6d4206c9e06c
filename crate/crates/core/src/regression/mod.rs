//! Least-squares fitting and externally studentized residuals.

mod design;
mod fit;
mod oracle;

pub use design::{build_design, DesignMatrix, LEVERAGE_TOLERANCE, RANK_TOLERANCE};
pub(crate) use fit::loo_rss_is_zero;
pub use fit::{
    fit_ols, statistic_t, studentized_residuals, zscore_last, FittedModel, ResidualVector,
    CANCELLATION_TOLERANCE, ZERO_RSS_TOLERANCE,
};
pub use oracle::{leave_one_out_inflation, studentized_residuals_oracle};
