use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the estimation, testing, and selection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series length {series} does not match panel length {panel}")]
    LengthMismatch { series: usize, panel: usize },

    #[error("covariate column '{0}' is constant")]
    DegenerateColumn(String),

    #[error("input contains non-finite values")]
    NonFiniteData,

    #[error("duplicate covariate name '{0}'")]
    DuplicateName(String),

    #[error("invalid lag order p={p} for n={n} (require 1 <= p < n/10)")]
    InvalidOrder { p: usize, n: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("input of length {n} too short (minimum {min})")]
    TooShort { n: usize, min: usize },

    #[error("covariance matrix is not positive definite")]
    CholeskyFailure,

    #[error("degrees of freedom {0} invalid (require df > 2 so the variance exists)")]
    InvalidDf(f64),

    #[error("correlation parameter {0} outside [0, 1)")]
    InvalidRho(f64),

    #[error("negative ARCH coefficient {0}")]
    NegativeAlpha(f64),

    #[error("burn-in {0} too short (minimum 100)")]
    InvalidBurnin(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-positive conditional variance at t={t}")]
    NonPositiveVolatility { t: usize },

    #[error("series overflow at t={t}; recursion appears non-stationary")]
    Overflow { t: usize },

    #[error("invalid bandwidth {0} (must be strictly positive and finite)")]
    InvalidBandwidth(f64),

    #[error("kernel row {row} sums to zero; bandwidth too small")]
    ZeroRowSum { row: usize },

    #[error("normal equations are singular")]
    SingularNormalEquations,

    #[error("QMLE optimizer diverged: no start produced a finite objective")]
    OptimizerDiverged,

    #[error("covariate dimension {d} too high for spline estimation (maximum {max})")]
    DimensionTooHigh { d: usize, max: usize },

    #[error("spline basis of size {k} too large for {n} observations")]
    BasisTooLarge { k: usize, n: usize },

    #[error("invalid spline configuration: {0}")]
    InvalidKnots(String),

    #[error("window size {k_n} exceeds sample size {n}")]
    WindowTooLarge { k_n: usize, n: usize },

    #[error("window size {0} too small (minimum 3)")]
    WindowTooSmall(usize),

    #[error("window size {0} must be odd")]
    EvenWindow(usize),

    #[error("quadratic-form oracle refused: n*k_n = {nk} exceeds cap {cap}")]
    MemoryGuard { nk: usize, cap: usize },

    #[error("level {0} outside (0, 1)")]
    InvalidLevel(f64),

    #[error("p-value {0} outside [0, 1]")]
    InvalidPValue(f64),

    #[error("covariate index {index} out of range 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(&'static str),
}
