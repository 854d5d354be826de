use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid canceller: {0}")]
    InvalidCanceller(String),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by a zero transfer function")]
    DivisionByZero,
    #[error("polynomial degree {degree} exceeds the cap of {cap} coefficients")]
    DegreeCap { degree: usize, cap: usize },
    #[error("s = {re} + {im}j lies on the branch cut (negative real axis)")]
    BranchCut { re: f64, im: f64 },
    #[error("pole hit while evaluating at s = {re} + {im}j")]
    PoleHit { re: f64, im: f64 },
    #[error("root finding did not converge after {iterations} iterations")]
    RootsNotConverged { iterations: usize },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("grid too sparse near {omega} rad/s: {reason}; refine the grid")]
    SparseGrid { omega: f64, reason: String },
    #[error("invalid fit configuration: {0}")]
    InvalidFitConfig(String),
    #[error("target response has a pole-hit sample at {omega} rad/s")]
    FlaggedSample { omega: f64 },
    #[error("rank-deficient least-squares problem (sigma_min/sigma_max = {ratio:e}); smallest singular direction: {direction}")]
    RankDeficient { ratio: f64, direction: String },
    #[error("improper transfer function: numerator degree {num} > denominator degree {den}")]
    Improper { num: usize, den: usize },
    #[error("invalid simulation setup: {0}")]
    InvalidSimulation(String),
    #[error("steady-state value is zero; relative metrics are undefined")]
    ZeroSteadyState,
    #[error("non-finite coefficient")]
    NonFinite,
}

pub type Result<T> = core::result::Result<T, Error>;
