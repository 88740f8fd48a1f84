//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the pricing and calibration pipeline.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// The cost-adjusted volatility spread `σ* − v*` is (numerically) zero, so
    /// no rate can be implied from the two assets.
    #[error("degenerate spread: sigma_star = {sigma_star} and v_star = {v_star} coincide, r* is undefined")]
    DegenerateSpread { sigma_star: f64, v_star: f64 },

    /// The requested time step pushes the up-move probability outside (0, 1).
    /// `max_dt` is a step size that does stay in range.
    #[error("risk-neutral probability {q} out of (0, 1) at dt = {dt}; maximal admissible dt = {max_dt}")]
    ProbabilityOutOfRange { q: f64, dt: f64, max_dt: f64 },

    /// A down factor `1 + drift·dt − vol·√dt` is not positive, so the tree
    /// would contain non-positive prices.
    #[error("negative price step: down factor {factor} <= 0 (dt = {dt} too large for the given volatility)")]
    NegativePriceStep { factor: f64, dt: f64 },

    /// The cost-adjusted up/down asset moves are linearly dependent; the
    /// one-step replication system has no unique solution.
    #[error("singular hedge system: determinant {det} relative to scale {scale}")]
    SingularHedge { det: f64, scale: f64 },

    /// An observed option price violates its static no-arbitrage bounds.
    #[error("price {price} outside no-arbitrage bounds [{lower}, {upper}]")]
    PriceOutOfBounds { price: f64, lower: f64, upper: f64 },

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations ({context})")]
    NoConvergence { iterations: usize, context: String },

    /// Fewer usable quotes than the operation requires.
    #[error("insufficient quotes: need {needed}, have {have}")]
    InsufficientQuotes { needed: usize, have: usize },

    /// The sample drift is zero, so the cost coefficient cannot be identified
    /// from `σ* = σ + c·μ`.
    #[error("zero drift: c is unidentifiable from sigma_star = sigma + c * mu")]
    ZeroDrift,

    /// Every quote was skipped; the surface has no cells.
    #[error("empty surface: all {skipped} quotes were skipped")]
    EmptySurface { skipped: usize },

    /// A tabular input could not be parsed.
    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },

    /// A price observation is not strictly positive.
    #[error("non-positive price {price} at row {row}")]
    NonPositivePrice { row: usize, price: f64 },

    /// Two observations share the same date.
    #[error("duplicate date {date}")]
    DuplicateDate { date: chrono::NaiveDate },

    /// Not enough observations for the requested computation.
    #[error("insufficient data: need {needed} observations, have {have}")]
    InsufficientData { needed: usize, have: usize },

    /// The inner join of two price series on date produced nothing.
    #[error("empty date intersection between the two price series")]
    EmptyDateIntersection,

    /// The chain file yielded no valid quotes.
    #[error("empty chain: {rejected} rows rejected, none valid")]
    EmptyChain { rejected: usize },

    /// A domain invariant on an input value was violated.
    #[error("invalid input: {message}")]
    InvalidInput { message: String },
}

impl Error {
    /// Stable machine-readable name of the variant, used on diagnostic
    /// streams.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateSpread { .. } => "DegenerateSpread",
            Error::ProbabilityOutOfRange { .. } => "ProbabilityOutOfRange",
            Error::NegativePriceStep { .. } => "NegativePriceStep",
            Error::SingularHedge { .. } => "SingularHedge",
            Error::PriceOutOfBounds { .. } => "PriceOutOfBounds",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::InsufficientQuotes { .. } => "InsufficientQuotes",
            Error::ZeroDrift => "ZeroDrift",
            Error::EmptySurface { .. } => "EmptySurface",
            Error::ParseError { .. } => "ParseError",
            Error::NonPositivePrice { .. } => "NonPositivePrice",
            Error::DuplicateDate { .. } => "DuplicateDate",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::EmptyDateIntersection => "EmptyDateIntersection",
            Error::EmptyChain { .. } => "EmptyChain",
            Error::InvalidInput { .. } => "InvalidInput",
        }
    }
}
