//! European closed forms, implied-volatility and joint implied-(rate,
//! volatility) solvers, and the heterogeneous-drift pricing PDE residual.
//!
//! When the long and the short side of a contract assign different drifts
//! `μ₁ ≠ μ₂` to the same diffusion and the short replicates with the stock
//! and a bond at rate `r`, equating the two value dynamics leaves
//!
//! ```text
//! ∂f/∂t + (μ₁ − μ₂ + r)·x·∂f/∂x − r·f + ½·σ²·x²·∂²f/∂x² = 0
//! ```
//!
//! which reduces to Black–Scholes only in the homogeneous case `μ₁ = μ₂`.
//! [`pde_residual`] evaluates the left side on the Black–Scholes solution:
//! it vanishes iff the drift views agree, and equals `(μ₁−μ₂)·x·∂f/∂x`
//! otherwise — the arbitrage the cost-adjusted lattice removes.

use rayon::prelude::*;

use crate::calibration::OptionChain;
use crate::error::{Error, Result};
use crate::optim;

/// Call or put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OptionKind {
    Call,
    Put,
}

/// A European option identified by strike, time to maturity (in the caller's
/// time unit) and kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuropeanOption {
    /// Strike price, > 0.
    pub strike: f64,
    /// Time to maturity, ≥ 0.
    pub tau: f64,
    /// Call or put.
    pub kind: OptionKind,
}

impl EuropeanOption {
    /// Validate and construct.
    pub fn new(strike: f64, tau: f64, kind: OptionKind) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::InvalidInput {
                message: format!("strike must be positive and finite, got {strike}"),
            });
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput {
                message: format!("time to maturity must be non-negative, got {tau}"),
            });
        }
        Ok(Self { strike, tau, kind })
    }

    /// Convenience constructor for a call.
    pub fn call(strike: f64, tau: f64) -> Result<Self> {
        Self::new(strike, tau, OptionKind::Call)
    }

    /// Convenience constructor for a put.
    pub fn put(strike: f64, tau: f64) -> Result<Self> {
        Self::new(strike, tau, OptionKind::Put)
    }
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function `Φ(x) = erfc(−x/√2)/2`.
///
/// The complementary error function keeps the tails accurate; absolute error
/// is below 1e-15 everywhere.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

fn d1_d2(spot: f64, strike: f64, r: f64, sigma: f64, tau: f64) -> (f64, f64) {
    let vol_sqrt_t = sigma * tau.sqrt();
    let d1 = ((spot / strike).ln() + (r + 0.5 * sigma * sigma) * tau) / vol_sqrt_t;
    (d1, d1 - vol_sqrt_t)
}

fn check_spot(spot: f64) -> Result<()> {
    if !(spot > 0.0 && spot.is_finite()) {
        return Err(Error::InvalidInput {
            message: format!("spot must be positive and finite, got {spot}"),
        });
    }
    Ok(())
}

/// Black–Scholes value of a European option.
///
/// At `tau = 0` this is the intrinsic value; at `sigma = 0` the discounted
/// forward intrinsic value.
pub fn bs_price(spot: f64, opt: &EuropeanOption, r: f64, sigma: f64) -> Result<f64> {
    check_spot(spot)?;
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidInput {
            message: format!("volatility must be non-negative, got {sigma}"),
        });
    }
    if opt.tau == 0.0 {
        return Ok(match opt.kind {
            OptionKind::Call => (spot - opt.strike).max(0.0),
            OptionKind::Put => (opt.strike - spot).max(0.0),
        });
    }
    let discounted_strike = opt.strike * (-r * opt.tau).exp();
    if sigma == 0.0 {
        return Ok(match opt.kind {
            OptionKind::Call => (spot - discounted_strike).max(0.0),
            OptionKind::Put => (discounted_strike - spot).max(0.0),
        });
    }
    let (d1, d2) = d1_d2(spot, opt.strike, r, sigma, opt.tau);
    Ok(match opt.kind {
        OptionKind::Call => spot * norm_cdf(d1) - discounted_strike * norm_cdf(d2),
        OptionKind::Put => discounted_strike * norm_cdf(-d2) - spot * norm_cdf(-d1),
    })
}

/// Analytic spatial Greeks `(∂f/∂x, ∂²f/∂x²)` of the Black–Scholes value.
pub fn bs_delta_gamma(spot: f64, opt: &EuropeanOption, r: f64, sigma: f64) -> Result<(f64, f64)> {
    check_spot(spot)?;
    if !(opt.tau > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidInput {
            message: "delta/gamma need tau > 0 and sigma > 0".into(),
        });
    }
    let (d1, _) = d1_d2(spot, opt.strike, r, sigma, opt.tau);
    let delta = match opt.kind {
        OptionKind::Call => norm_cdf(d1),
        OptionKind::Put => norm_cdf(d1) - 1.0,
    };
    let gamma = norm_pdf(d1) / (spot * sigma * opt.tau.sqrt());
    Ok((delta, gamma))
}

/// Analytic calendar derivative `∂f/∂t` (t running forward, so `−∂f/∂τ`).
fn bs_theta(spot: f64, opt: &EuropeanOption, r: f64, sigma: f64) -> f64 {
    let (d1, d2) = d1_d2(spot, opt.strike, r, sigma, opt.tau);
    let decay = -spot * norm_pdf(d1) * sigma / (2.0 * opt.tau.sqrt());
    let discounted_strike = opt.strike * (-r * opt.tau).exp();
    match opt.kind {
        OptionKind::Call => decay - r * discounted_strike * norm_cdf(d2),
        OptionKind::Put => decay + r * discounted_strike * norm_cdf(-d2),
    }
}

/// Left side of the heterogeneous-drift pricing PDE evaluated on the
/// Black–Scholes solution at `(spot, tau)`.
///
/// Zero (to rounding) iff `mu1 = mu2`; otherwise `(μ₁−μ₂)·spot·∂f/∂x`.
pub fn pde_residual(
    spot: f64,
    opt: &EuropeanOption,
    mu1: f64,
    mu2: f64,
    r: f64,
    sigma: f64,
) -> Result<f64> {
    check_spot(spot)?;
    if !(opt.tau > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidInput {
            message: "pde_residual needs tau > 0 and sigma > 0".into(),
        });
    }
    let f = bs_price(spot, opt, r, sigma)?;
    let (f_x, f_xx) = bs_delta_gamma(spot, opt, r, sigma)?;
    let f_t = bs_theta(spot, opt, r, sigma);
    Ok(f_t + (mu1 - mu2 + r) * spot * f_x - r * f + 0.5 * sigma * sigma * spot * spot * f_xx)
}

/// No-arbitrage price bounds `[lower, upper]` for the given option.
fn no_arb_bounds(spot: f64, opt: &EuropeanOption, r: f64) -> (f64, f64) {
    let discounted_strike = opt.strike * (-r * opt.tau).exp();
    match opt.kind {
        OptionKind::Call => ((spot - discounted_strike).max(0.0), spot),
        OptionKind::Put => ((discounted_strike - spot).max(0.0), discounted_strike),
    }
}

/// Volatility search bracket.
const VOL_LO: f64 = 1e-6;
const VOL_HI: f64 = 5.0;
const IMPLIED_VOL_MAX_ITER: usize = 200;

/// Implied volatility: the `sigma ∈ [1e-6, 5]` at which [`bs_price`]
/// reproduces `observed_price`.
///
/// Bisection on the (monotone) price function, refined by a Newton step on
/// the vega whenever it stays inside the bracket; the result reproduces the
/// observed price to 1e-10 absolute.
pub fn implied_vol(spot: f64, opt: &EuropeanOption, r: f64, observed_price: f64) -> Result<f64> {
    check_spot(spot)?;
    if opt.tau <= 0.0 {
        return Err(Error::InvalidInput {
            message: "implied volatility needs tau > 0".into(),
        });
    }
    let (lower, upper) = no_arb_bounds(spot, opt, r);
    if observed_price < lower || observed_price > upper {
        return Err(Error::PriceOutOfBounds {
            price: observed_price,
            lower,
            upper,
        });
    }

    let price_err = |sigma: f64| -> Result<f64> { Ok(bs_price(spot, opt, r, sigma)? - observed_price) };
    let sqrt_tau = opt.tau.sqrt();

    let mut lo = VOL_LO;
    let mut hi = VOL_HI;
    let f_lo = price_err(lo)?;
    let f_hi = price_err(hi)?;
    // Price is nondecreasing in sigma. A root below the bracket means the
    // observed price carries no recoverable volatility; above means it
    // exceeds every attainable value.
    if f_lo > 0.0 {
        if f_lo.abs() <= 1e-10 {
            return Ok(lo);
        }
        return Err(Error::NoConvergence {
            iterations: 0,
            context: format!("observed price {observed_price} below price at sigma = {VOL_LO}"),
        });
    }
    if f_hi < 0.0 {
        if f_hi.abs() <= 1e-10 {
            return Ok(hi);
        }
        return Err(Error::NoConvergence {
            iterations: 0,
            context: format!("observed price {observed_price} above price at sigma = {VOL_HI}"),
        });
    }

    let mut x = 0.5 * (lo + hi);
    for iteration in 0..IMPLIED_VOL_MAX_ITER {
        let fx = price_err(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-14 * x.max(1.0) {
            let _ = iteration;
            break;
        }
        let (d1, _) = d1_d2(spot, opt.strike, r, x, opt.tau);
        let vega = spot * sqrt_tau * norm_pdf(d1);
        let newton = x - fx / vega;
        x = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let final_err = price_err(x)?;
    if final_err.abs() > 1e-10 {
        return Err(Error::NoConvergence {
            iterations: IMPLIED_VOL_MAX_ITER,
            context: format!("price residual {final_err} above tolerance"),
        });
    }
    Ok(x)
}

/// Diagnostics of a joint (rate, volatility) fit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FitReport {
    /// Root mean squared price error over the fitted quotes.
    pub rmse: f64,
    /// Coordinate-descent sweeps performed.
    pub sweeps: usize,
    /// Objective evaluations consumed.
    pub evaluations: usize,
    /// Per-quote `model − market` residuals at the optimum, in chain order.
    pub residuals: Vec<f64>,
}

/// Result of [`implied_rate_vol`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct RateVolFit {
    /// Implied risk-free rate.
    pub r_star: f64,
    /// Implied volatility.
    pub sigma_star: f64,
    /// Fit diagnostics.
    pub report: FitReport,
}

const RATE_LO: f64 = -0.5;
const RATE_HI: f64 = 1.0;
const MAX_EVALS: usize = 10_000;
const OBJECTIVE_DECREASE_TOL: f64 = 1e-10;

/// Jointly fit `(r*, σ*)` to a chain's mid prices by least squares.
///
/// Coordinate search over the rate and volatility axes, each line minimised
/// by golden-section/parabolic interpolation on a shrinking bracket, until
/// a full sweep improves the objective by less than 1e-10 (at most 10,000
/// objective evaluations).
///
/// `days_per_unit` converts the calendar gap between quote date and expiry
/// into the caller's time unit.
pub fn implied_rate_vol(chain: &OptionChain, spot: f64, days_per_unit: f64) -> Result<RateVolFit> {
    check_spot(spot)?;
    let mut targets: Vec<(EuropeanOption, f64)> = Vec::new();
    for quote in &chain.quotes {
        let tau = chain.tau_of(quote, days_per_unit);
        if tau <= 0.0 {
            continue;
        }
        let mid = quote.mid();
        // rate-free sanity bounds; the rate-dependent lower bound is left to
        // the optimiser
        let upper = match quote.kind {
            OptionKind::Call => spot,
            OptionKind::Put => quote.strike,
        };
        if !(mid > 0.0 && mid <= upper) {
            continue;
        }
        targets.push((EuropeanOption::new(quote.strike, tau, quote.kind)?, mid));
    }
    let distinct = {
        let mut keys: Vec<(u64, u64)> = targets
            .iter()
            .map(|(o, _)| (o.strike.to_bits(), o.tau.to_bits()))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    };
    if targets.len() < 2 || distinct < 2 {
        return Err(Error::InsufficientQuotes {
            needed: 2,
            have: distinct.min(targets.len()),
        });
    }

    let evaluations = std::cell::Cell::new(0usize);
    let objective = |r: f64, sigma: f64| -> f64 {
        evaluations.set(evaluations.get() + 1);
        let prices: Vec<f64> = targets
            .par_iter()
            .map(|(opt, _)| bs_price(spot, opt, r, sigma).unwrap_or(f64::INFINITY))
            .collect();
        let mut sum = 0.0;
        for (price, (_, mid)) in prices.iter().zip(&targets) {
            let err = price - mid;
            sum += err * err;
        }
        sum
    };

    // initial volatility from the quote nearest the money, at a flat rate
    let mut r = 0.01;
    let mut sigma = targets
        .iter()
        .min_by(|a, b| {
            (a.0.strike - spot)
                .abs()
                .total_cmp(&(b.0.strike - spot).abs())
        })
        .and_then(|(opt, mid)| implied_vol(spot, opt, r, *mid).ok())
        .unwrap_or(0.2);

    let mut best = objective(r, sigma);
    let mut width_r = 0.25;
    let mut width_sigma = 0.5;
    let mut sweeps = 0usize;
    let mut converged = false;
    for sweep in 0..64 {
        sweeps = sweep + 1;
        let previous = best;
        let res = optim::brent_min(
            |s| objective(r, s),
            (sigma - width_sigma).max(VOL_LO),
            (sigma + width_sigma).min(VOL_HI),
            1e-12,
            80,
        );
        sigma = res.x;
        let res = optim::brent_min(
            |x| objective(x, sigma),
            (r - width_r).max(RATE_LO),
            (r + width_r).min(RATE_HI),
            1e-12,
            80,
        );
        r = res.x;
        best = objective(r, sigma);
        width_r = (width_r * 0.5).max(1e-4);
        width_sigma = (width_sigma * 0.5).max(1e-4);
        if sweep > 2 && previous - best < OBJECTIVE_DECREASE_TOL {
            converged = true;
            break;
        }
        if evaluations.get() > MAX_EVALS {
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: evaluations.get(),
            context: "joint (rate, volatility) fit did not meet the decrease tolerance".into(),
        });
    }

    let residuals: Vec<f64> = targets
        .iter()
        .map(|(opt, mid)| bs_price(spot, opt, r, sigma).unwrap_or(f64::NAN) - mid)
        .collect();
    let rmse = (residuals.iter().map(|e| e * e).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(RateVolFit {
        r_star: r,
        sigma_star: sigma,
        report: FitReport {
            rmse,
            sweeps,
            evaluations: evaluations.get(),
            residuals,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn atm_zero_vol_call_is_worthless() {
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        assert_eq!(bs_price(100.0, &opt, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn intrinsic_at_expiry() {
        let call = EuropeanOption::call(90.0, 0.0).unwrap();
        assert_eq!(bs_price(100.0, &call, 0.05, 0.3).unwrap(), 10.0);
        let put = EuropeanOption::put(110.0, 0.0).unwrap();
        assert_eq!(bs_price(100.0, &put, 0.05, 0.3).unwrap(), 10.0);
    }

    /// Quadrature oracle: discounted lognormal payoff expectation by
    /// Simpson's rule over z ∈ [−12, 12].
    fn bs_by_quadrature(spot: f64, opt: &EuropeanOption, r: f64, sigma: f64) -> f64 {
        let n = 48_000usize;
        let (a, b) = (-12.0f64, 12.0f64);
        let h = (b - a) / n as f64;
        let payoff = |z: f64| {
            let s_t =
                spot * ((r - 0.5 * sigma * sigma) * opt.tau + sigma * opt.tau.sqrt() * z).exp();
            let g = match opt.kind {
                OptionKind::Call => (s_t - opt.strike).max(0.0),
                OptionKind::Put => (opt.strike - s_t).max(0.0),
            };
            g * norm_pdf(z)
        };
        let mut sum = payoff(a) + payoff(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * payoff(a + i as f64 * h);
        }
        (-r * opt.tau).exp() * sum * h / 3.0
    }

    #[test]
    fn matches_quadrature_oracle() {
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        let quad = bs_by_quadrature(100.0, &opt, 0.0, 0.2);
        let closed = bs_price(100.0, &opt, 0.0, 0.2).unwrap();
        assert_relative_eq!(closed, quad, max_relative = 1e-7);
        assert_abs_diff_eq!(closed, 7.9656, epsilon = 5e-5);

        let put = EuropeanOption::put(110.0, 0.7).unwrap();
        let quad = bs_by_quadrature(95.0, &put, 0.03, 0.35);
        let closed = bs_price(95.0, &put, 0.03, 0.35).unwrap();
        assert_relative_eq!(closed, quad, max_relative = 1e-7);
    }

    #[test]
    fn put_call_parity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let spot = rng.gen_range(50.0..150.0);
            let strike = rng.gen_range(50.0..150.0);
            let r = rng.gen_range(-0.02..0.08);
            let tau = rng.gen_range(0.05..3.0);
            let sigma = rng.gen_range(0.05..0.8);
            let call = bs_price(spot, &EuropeanOption::call(strike, tau).unwrap(), r, sigma).unwrap();
            let put = bs_price(spot, &EuropeanOption::put(strike, tau).unwrap(), r, sigma).unwrap();
            let forward = spot - strike * (-r * tau as f64).exp();
            assert_abs_diff_eq!(call - put, forward, epsilon = 1e-12 * spot.max(strike));
        }
    }

    #[test]
    fn vol_monotonicity() {
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        let mut last = 0.0;
        for sigma in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let p = bs_price(100.0, &opt, 0.02, sigma).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn implied_vol_round_trip_at_paper_level() {
        let opt = EuropeanOption::call(299.0, 0.5).unwrap();
        let price = bs_price(299.03, &opt, 0.0134, 0.1385).unwrap();
        let iv = implied_vol(299.03, &opt, 0.0134, price).unwrap();
        assert_abs_diff_eq!(iv, 0.1385, epsilon = 1e-8);
    }

    #[test]
    fn implied_vol_deep_itm_near_intrinsic() {
        // prices barely above the lower bound still invert cleanly, and the
        // recovered vol shrinks with the excess over intrinsic
        let opt = EuropeanOption::call(50.0, 0.25).unwrap();
        let r = 0.01;
        let lower = 100.0 - 50.0 * (-r * 0.25f64).exp();
        let mut last_iv = f64::INFINITY;
        for excess in [1e-2, 1e-4, 1e-6] {
            let observed = lower + excess;
            let iv = implied_vol(100.0, &opt, r, observed).unwrap();
            assert!(iv < last_iv, "vol must shrink toward intrinsic, got {iv}");
            last_iv = iv;
            let reproduced = bs_price(100.0, &opt, r, iv).unwrap();
            assert_abs_diff_eq!(reproduced, observed, epsilon = 1e-10);
        }
    }

    #[test]
    fn implied_vol_rejects_out_of_bounds() {
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        assert!(matches!(
            implied_vol(100.0, &opt, 0.0, 101.0),
            Err(Error::PriceOutOfBounds { .. })
        ));
        assert!(matches!(
            implied_vol(100.0, &opt, 0.0, -0.5),
            Err(Error::PriceOutOfBounds { .. })
        ));
    }

    #[test]
    fn pde_residual_vanishes_for_homogeneous_drifts() {
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        for spot in [60.0, 100.0, 140.0] {
            let res = pde_residual(spot, &opt, 0.07, 0.07, 0.02, 0.2).unwrap();
            assert!(res.abs() <= 1e-10, "residual {res} at spot {spot}");
        }
    }

    #[test]
    fn pde_residual_is_drift_gap_times_delta() {
        // analytic substitution: residual = (μ₁−μ₂)·S·N(d₁) for a call
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        let (spot, r, sigma) = (100.0, 0.02, 0.2);
        let res = pde_residual(spot, &opt, 0.05, 0.03, r, sigma).unwrap();
        let (delta, _) = bs_delta_gamma(spot, &opt, r, sigma).unwrap();
        assert_relative_eq!(res, 0.02 * spot * delta, max_relative = 1e-9);
        assert!(res.abs() >= 1e-4 * spot);
    }

    #[test]
    fn pde_residual_linear_in_drift_gap() {
        let opt = EuropeanOption::call(100.0, 1.0).unwrap();
        let r1 = pde_residual(100.0, &opt, 0.04, 0.03, 0.02, 0.2).unwrap();
        let r2 = pde_residual(100.0, &opt, 0.05, 0.03, 0.02, 0.2).unwrap();
        assert!((r2 - 2.0 * r1).abs() <= 1e-12 * r2.abs().max(1.0));
    }

    #[test]
    fn greeks_match_central_differences() {
        let opt = EuropeanOption::call(100.0, 0.8).unwrap();
        let (spot, r, sigma) = (105.0, 0.03, 0.25);
        let h = 1e-4 * spot;
        let f = |x: f64| bs_price(x, &opt, r, sigma).unwrap();
        let delta_fd = (f(spot + h) - f(spot - h)) / (2.0 * h);
        let gamma_fd = (f(spot + h) - 2.0 * f(spot) + f(spot - h)) / (h * h);
        let (delta, gamma) = bs_delta_gamma(spot, &opt, r, sigma).unwrap();
        assert_relative_eq!(delta, delta_fd, max_relative = 1e-6);
        assert_relative_eq!(gamma, gamma_fd, max_relative = 1e-6);
    }
}
