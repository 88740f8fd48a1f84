//! Pricing and calibration engine for a two-asset market in which two spot
//! traders hold different drift views on price processes driven by a single
//! Brownian motion, and a representative investor hedges one risky asset with
//! the other under trade-proportional arbitrage costs.
//!
//! The crate is organised around the pipeline:
//!
//! * [`model`] — closed-form parameter transformations: cost-adjusted drifts
//!   and volatilities, the implied risk-neutral rate `r*`, the market price of
//!   risk `θ*`, and the risk-neutral up-move probabilities (with the
//!   no-arb-cost and no-transaction-cost reductions).
//! * [`lattice`] — the recombining one-factor bivariate binomial tree, the
//!   per-step transaction-cost factor, the two-asset hedge solve, backward
//!   induction pricing, and the closed-form geometric Brownian motion limit.
//! * [`blackscholes`] — European closed forms, implied volatility, the joint
//!   implied-(rate, volatility) least-squares fit, and the heterogeneous-drift
//!   PDE residual that exhibits the arbitrage of the frictionless model.
//! * [`calibration`] — the arbitrage-cost coefficient `c` (scalar fit and
//!   per-quote surfaces), bid/ask spread cost surfaces, the combined two-chain
//!   fit, and implied-volatility surface grids.
//! * [`marketdata`] — CSV ingestion of price histories and option chains,
//!   sample return moments, and rolling-window `r*` time series.

pub mod blackscholes;
pub mod calibration;
pub mod error;
pub mod lattice;
pub mod marketdata;
pub mod model;
mod optim;

pub use error::{Error, Result};
