//! Closed-form parameter transformations for the two-asset market with
//! arbitrage transaction costs.
//!
//! Two traders quote the same one-factor market with physical-measure
//! parameters `(μ, σ)` and `(m, v)`. Per-trade costs scale with the cost
//! coefficient `c` through the exponents `ρ(S) = c·μ/σ` and `ρ(V) = c·m/v`,
//! which fold into the adjusted parameters
//!
//! ```text
//! μ* = μ·(1 + c·μ/σ)·(1 + c·σ/2)      σ* = σ + c·μ
//! m* = m·(1 + c·m/v)·(1 + c·v/2)      v* = v + c·m
//! ```
//!
//! The rate implied by hedging one asset with the other and the market price
//! of risk are
//!
//! ```text
//! r* = (μ*·v* − m*·σ*) / (v* − σ*)
//! θ* = (μ* − r*)/σ* = (m* − r*)/v*
//! ```
//!
//! and the one-step risk-neutral up probability is
//!
//! ```text
//! Q(Δt) = ½ − [μ* − m*] / (2·(σ − v + c·(μ − m))) · √Δt = ½ − ½·θ*·√Δt
//! ```
//!
//! Setting `c = 0` recovers the two-asset rate `r = (μv − mσ)/(v − σ)` and
//! up probability `½ − (μ−m)/(2(σ−v))·√Δt`; replacing the second asset by a
//! riskless rate `r` gives the classical `½ − ½·(μ−r)/σ·√Δt`.
//!
//! All drifts are per unit time and volatilities per √(unit time); the unit
//! itself is the caller's choice (see [`annualize_moments`]).

use crate::error::{Error, Result};

/// Conventional number of trading days per year for daily equity data.
pub const DEFAULT_PERIODS_PER_YEAR: f64 = 252.0;

/// Relative tolerance below which the adjusted spread `σ* − v*` is treated
/// as exactly zero (the degenerate case with no implied rate).
pub const DEGENERATE_SPREAD_TOL: f64 = 1e-12;

/// Physical-measure parameters of the two traders plus the arbitrage-cost
/// coefficient.
///
/// `mu`/`sigma` describe the first asset, `m`/`v` the second; both processes
/// share one driving factor. `c` is the dimensionless cost coefficient
/// (`c = 0` is the frictionless reduction).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MarketParams {
    /// Drift of the first asset per unit time.
    pub mu: f64,
    /// Volatility of the first asset per √(unit time), > 0.
    pub sigma: f64,
    /// Drift of the second asset per unit time.
    pub m: f64,
    /// Volatility of the second asset per √(unit time), > 0.
    pub v: f64,
    /// Arbitrage-cost coefficient, ≥ 0.
    pub c: f64,
}

impl MarketParams {
    /// Validate and construct market parameters.
    pub fn new(mu: f64, sigma: f64, m: f64, v: f64, c: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && m.is_finite() && v.is_finite() && c.is_finite())
        {
            return Err(Error::InvalidInput {
                message: "market parameters must be finite".into(),
            });
        }
        if sigma <= 0.0 || v <= 0.0 {
            return Err(Error::InvalidInput {
                message: format!("volatilities must be positive, got sigma={sigma}, v={v}"),
            });
        }
        if c < 0.0 {
            return Err(Error::InvalidInput {
                message: format!("cost coefficient must be non-negative, got c={c}"),
            });
        }
        Ok(Self { mu, sigma, m, v, c })
    }

    /// Cost exponent `ρ(S) = c·μ/σ` applied to trades in the first asset.
    pub fn rho_s(&self) -> f64 {
        self.c * self.mu / self.sigma
    }

    /// Cost exponent `ρ(V) = c·m/v` applied to trades in the second asset.
    pub fn rho_v(&self) -> f64 {
        self.c * self.m / self.v
    }
}

/// Cost-adjusted drifts and volatilities together with the implied rate and
/// market price of risk. Produced by [`adjusted_params`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdjustedParams {
    /// Cost-adjusted drift of the first asset.
    pub mu_star: f64,
    /// Cost-adjusted drift of the second asset.
    pub m_star: f64,
    /// Cost-adjusted volatility of the first asset, `σ + c·μ`.
    pub sigma_star: f64,
    /// Cost-adjusted volatility of the second asset, `v + c·m`.
    pub v_star: f64,
    /// Implied risk-neutral rate `(μ*v* − m*σ*)/(v* − σ*)`.
    pub r_star: f64,
    /// Market price of risk `(μ* − r*)/σ*`.
    pub theta_star: f64,
}

/// One-step risk-neutral probabilities at time step `dt`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RiskNeutralProb {
    /// Probability of the up move, in (0, 1).
    pub q_up: f64,
    /// Probability of the down move, `1 − q_up`.
    pub q_down: f64,
    /// Time step the probabilities were computed at.
    pub dt: f64,
}

fn check_dt(dt: f64) -> Result<()> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidInput {
            message: format!("time step must be positive and finite, got {dt}"),
        });
    }
    Ok(())
}

fn check_spread(sigma_star: f64, v_star: f64) -> Result<()> {
    let scale = sigma_star.abs().max(v_star.abs()).max(1.0);
    if (sigma_star - v_star).abs() < DEGENERATE_SPREAD_TOL * scale {
        return Err(Error::DegenerateSpread { sigma_star, v_star });
    }
    Ok(())
}

/// Build `q = ½ − ½·slope·√dt`, rejecting steps that push it out of (0, 1).
///
/// The error payload reports a step size that does stay in range (the
/// supremum `1/slope²` shaved by a relative margin so the reported value
/// itself passes).
fn q_from_slope(slope: f64, dt: f64) -> Result<RiskNeutralProb> {
    check_dt(dt)?;
    let q_up = 0.5 - 0.5 * slope * dt.sqrt();
    if !(q_up > 0.0 && q_up < 1.0) {
        let max_dt = (1.0 - 1e-9) / (slope * slope);
        return Err(Error::ProbabilityOutOfRange { q: q_up, dt, max_dt });
    }
    Ok(RiskNeutralProb {
        q_up,
        q_down: 1.0 - q_up,
        dt,
    })
}

/// Compute the full set of cost-adjusted quantities from market parameters.
///
/// Fails with [`Error::DegenerateSpread`] when `σ* = v*` (equivalently
/// `(σ − v) + c·(μ − m) = 0`), in which case no rate is implied.
pub fn adjusted_params(p: &MarketParams) -> Result<AdjustedParams> {
    let sigma_star = p.sigma + p.c * p.mu;
    let v_star = p.v + p.c * p.m;
    check_spread(sigma_star, v_star)?;
    let mu_star = p.mu * (1.0 + p.c * p.mu / p.sigma) * (1.0 + p.c * p.sigma / 2.0);
    let m_star = p.m * (1.0 + p.c * p.m / p.v) * (1.0 + p.c * p.v / 2.0);
    let r_star = (mu_star * v_star - m_star * sigma_star) / (v_star - sigma_star);
    let theta_star = (mu_star - r_star) / sigma_star;
    Ok(AdjustedParams {
        mu_star,
        m_star,
        sigma_star,
        v_star,
        r_star,
        theta_star,
    })
}

/// Market price of risk `θ* = (μ* − r*)/σ*`.
///
/// Identical to `(m* − r*)/v*`; the two representations agree to floating
/// rounding for non-degenerate inputs.
pub fn market_price_of_risk(a: &AdjustedParams) -> f64 {
    (a.mu_star - a.r_star) / a.sigma_star
}

/// Risk-neutral up probability with arbitrage costs,
/// `½ − (μ* − m*)/(2(σ − v + c(μ − m)))·√dt`.
pub fn q_risk_neutral(p: &MarketParams, dt: f64) -> Result<RiskNeutralProb> {
    let num = p.mu * (1.0 + p.c * p.mu / p.sigma) * (1.0 + p.c * p.sigma / 2.0)
        - p.m * (1.0 + p.c * p.m / p.v) * (1.0 + p.c * p.v / 2.0);
    let den = (p.sigma - p.v) + p.c * (p.mu - p.m);
    check_spread(p.sigma + p.c * p.mu, p.v + p.c * p.m)?;
    q_from_slope(num / den, dt)
}

/// Risk-neutral up probability of the frictionless two-asset model,
/// `½ − (μ − m)/(2(σ − v))·√dt`. Ignores `p.c` entirely.
///
/// Refuses `σ = v`: with equal volatilities and unequal drifts the
/// frictionless model admits arbitrage and no state price exists.
pub fn q_no_arbcost(p: &MarketParams, dt: f64) -> Result<RiskNeutralProb> {
    let num = p.mu - p.m;
    let den = p.sigma - p.v;
    check_spread(p.sigma, p.v)?;
    q_from_slope(num / den, dt)
}

/// Risk-neutral up probability of the one-asset-plus-bond model,
/// `½ − ½·(μ − r)/σ·√dt`.
pub fn q_no_transcost(mu: f64, r: f64, sigma: f64, dt: f64) -> Result<RiskNeutralProb> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput {
            message: format!("volatility must be positive, got {sigma}"),
        });
    }
    q_from_slope((mu - r) / sigma, dt)
}

/// Convert per-period sample moments to the caller's time unit:
/// `μ ↦ μ·p`, `σ ↦ σ·√p` for `p` periods per unit.
///
/// For daily equity moments and annual units, `p` is conventionally
/// [`DEFAULT_PERIODS_PER_YEAR`].
pub fn annualize_moments(mu: f64, sigma: f64, periods_per_unit: f64) -> (f64, f64) {
    (mu * periods_per_unit, sigma * periods_per_unit.sqrt())
}
