//! Semiparametric ARCH(p)-m(X) volatility modeling: the conditional
//! variance of a return series is a linear ARCH part in lagged squared
//! returns plus a nonparametric function of exogenous covariates,
//!
//!   sigma_t^2 = sum_j alpha_j eps_{t-j}^2 + m(X_{t-1}).
//!
//! The crate provides simulation of the process, two estimators of
//! (alpha, m) — a kernel partially-linear fit and a B-spline
//! quasi-likelihood fit — a rank-windowed ANOVA test for whether a given
//! covariate enters m at all, FDR-controlled variable selection built on
//! that test, and a seeded Monte Carlo harness for studying both.

pub mod anovatest;
pub mod dgp;
pub mod error;
pub mod estimate;
pub mod linalg;
pub mod montecarlo;
pub mod select;
pub mod spline;
pub mod types;

pub use anovatest::{
    anova_statistic, build_windows, choose_kn, quadratic_form_oracle, rice_variance,
    test_covariate, TestResult, WindowSet,
};
pub use dgp::{
    derive_seed, sample_covariates, sample_shocks, simulate_arch_mx, simulate_dataset,
    ArchMxSpec, CovariateLaw, Scenario, Shock, SimModel,
};
pub use error::{Error, Result};
pub use estimate::{
    fit_model, fit_partially_linear, fit_spline, kernel_weight_matrix, select_bandwidth,
    Evaluator, FitMethod, FittedModel, KernelConfig, KernelType,
};
pub use montecarlo::{
    run_rejection_study, run_selection_study, selection_metrics, RejectionRow, SelectionMetrics,
    StudyConfig,
};
pub use select::{
    bonferroni_select, by_adjusted_pvalues, by_fdr_select, select_variables, SelectionMethod,
    SelectionResult,
};
pub use spline::{SplineBasis, SplineConfig};
pub use types::{validate_inputs, CovariatePanel, ReturnSeries};
