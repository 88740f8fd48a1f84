//! Arbitrage-cost coefficient calibration and surface construction.
//!
//! The cost coefficient `c` links the implied and the sample volatility
//! through `σ* = σ + c·μ`, so a single implied level pins the scalar
//! ([`calibrate_c_scalar`]). Quote-level diagnostics repeat the inversion
//! per contract: solve the implied volatility from a chosen price (mid, bid
//! or ask), map it to `c = (iv − σ)/μ`, and bucket the results on a
//! (moneyness × time-to-maturity) grid. Bid/ask spreads map to cost spreads
//! the same way, and a pooled least-squares fit over two instruments yields
//! the combined coefficient of the market as a whole.
//!
//! Per-quote values may be negative (an implied volatility below the sample
//! level); the surfaces are diagnostics and are never clamped.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::blackscholes::{self, EuropeanOption, OptionKind};
use crate::error::{Error, Result};
use crate::marketdata::SampleMoments;
use crate::optim;

/// A single option quote.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptionQuote {
    /// Expiry date.
    pub expiry: NaiveDate,
    /// Strike price.
    pub strike: f64,
    /// Bid price.
    pub bid: f64,
    /// Ask price.
    pub ask: f64,
    /// Last traded price, when present in the source.
    pub last: Option<f64>,
    /// Call or put.
    pub kind: OptionKind,
}

impl OptionQuote {
    /// Mid price `(bid + ask)/2`.
    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }
}

/// An option chain quoted on one date for one instrument.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptionChain {
    /// Date the quotes were observed.
    pub quote_date: NaiveDate,
    /// Underlying spot price on the quote date.
    pub spot: f64,
    /// Instrument tag (e.g. ticker).
    pub instrument: String,
    /// The quotes.
    pub quotes: Vec<OptionQuote>,
}

impl OptionChain {
    /// Time to maturity of a quote in the caller's unit, from the calendar
    /// day count divided by `days_per_unit`.
    pub fn tau_of(&self, quote: &OptionQuote, days_per_unit: f64) -> f64 {
        (quote.expiry - self.quote_date).num_days() as f64 / days_per_unit
    }
}

/// Which side of the quote feeds a surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PriceSource {
    Mid,
    Bid,
    Ask,
}

impl PriceSource {
    fn price_of(&self, quote: &OptionQuote) -> f64 {
        match self {
            PriceSource::Mid => quote.mid(),
            PriceSource::Bid => quote.bid,
            PriceSource::Ask => quote.ask,
        }
    }
}

/// What the cells of a [`SurfaceGrid`] hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SurfaceKind {
    /// Black–Scholes implied volatility.
    ImpliedVol,
    /// Arbitrage-cost coefficient `c`.
    ArbCost,
    /// Ask-minus-bid difference of `c`.
    SpreadArbCost,
}

/// Bucket edges for surface construction.
///
/// Moneyness is strike/spot; maturities are bucketed on calendar days and
/// reported in the caller's time unit (`days_per_unit` days per unit).
/// Buckets are half-open `[edge_i, edge_{i+1})`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurfaceConfig {
    /// Strictly increasing moneyness bucket edges.
    pub moneyness_edges: Vec<f64>,
    /// Strictly increasing maturity bucket edges in calendar days.
    pub maturity_day_edges: Vec<f64>,
    /// Calendar days per caller time unit.
    pub days_per_unit: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            moneyness_edges: (0..=20).map(|i| 0.5 + 0.05 * i as f64).collect(),
            maturity_day_edges: vec![7.0, 14.0, 30.0, 60.0, 90.0, 180.0, 365.0, 730.0],
            days_per_unit: 252.0,
        }
    }
}

impl SurfaceConfig {
    fn validate(&self) -> Result<()> {
        let increasing = |edges: &[f64]| edges.windows(2).all(|w| w[1] > w[0]);
        if self.moneyness_edges.len() < 2
            || self.maturity_day_edges.len() < 2
            || !increasing(&self.moneyness_edges)
            || !increasing(&self.maturity_day_edges)
        {
            return Err(Error::InvalidInput {
                message: "bucket edges must be strictly increasing with at least two entries"
                    .into(),
            });
        }
        if !(self.days_per_unit > 0.0) {
            return Err(Error::InvalidInput {
                message: format!("days_per_unit must be positive, got {}", self.days_per_unit),
            });
        }
        Ok(())
    }

    fn moneyness_centers(&self) -> Vec<f64> {
        self.moneyness_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    fn maturity_centers(&self) -> Vec<f64> {
        self.maturity_day_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) / self.days_per_unit)
            .collect()
    }
}

fn bucket_of(edges: &[f64], x: f64) -> Option<usize> {
    if !x.is_finite() || x < edges[0] || x >= edges[edges.len() - 1] {
        return None;
    }
    // edges are short; linear scan keeps ties deterministic
    edges.windows(2).position(|w| x >= w[0] && x < w[1])
}

/// A (moneyness × maturity) grid of surface values with sparse cells.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurfaceGrid {
    /// What the cells hold.
    pub kind: SurfaceKind,
    /// Moneyness bucket centers, strictly increasing.
    pub moneyness: Vec<f64>,
    /// Maturity bucket centers in the caller's unit, strictly increasing.
    pub maturity: Vec<f64>,
    /// `values[i][j]` for moneyness `i`, maturity `j`; `None` marks an empty
    /// cell.
    pub values: Vec<Vec<Option<f64>>>,
}

impl SurfaceGrid {
    /// Populated cells in long format `(moneyness, maturity, value)`,
    /// moneyness-major.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().flat_map(move |(i, row)| {
            row.iter().enumerate().filter_map(move |(j, cell)| {
                cell.map(|value| (self.moneyness[i], self.maturity[j], value))
            })
        })
    }

    /// Number of populated cells.
    pub fn populated(&self) -> usize {
        self.cells().count()
    }
}

/// A quote excluded from a surface, with the input index and the reason.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SkippedQuote {
    /// Index of the quote in the input chain.
    pub index: usize,
    /// Human-readable reason.
    pub reason: String,
}

/// A surface plus its skip log. Every input quote either contributed to a
/// cell or appears in `skipped`.
#[derive(Debug, Clone)]
pub struct SurfaceOutcome {
    /// The bucketed surface.
    pub grid: SurfaceGrid,
    /// Quotes that did not contribute.
    pub skipped: Vec<SkippedQuote>,
    /// Number of quotes that contributed.
    pub used: usize,
}

/// Scalar cost coefficient from the implied/sample volatility relation:
/// `c = (σ* − σ)/μ`.
pub fn calibrate_c_scalar(sigma_star: f64, sigma: f64, mu: f64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::ZeroDrift);
    }
    Ok((sigma_star - sigma) / mu)
}

/// Shared per-quote pipeline: validate, bucket, solve, aggregate.
/// `solve` returns the cell value for one quote.
fn build_surface<F>(
    chain: &OptionChain,
    config: &SurfaceConfig,
    kind: SurfaceKind,
    solve: F,
) -> Result<SurfaceOutcome>
where
    F: Fn(&OptionQuote, f64) -> Result<f64> + Sync,
{
    config.validate()?;
    if !(chain.spot > 0.0) {
        return Err(Error::InvalidInput {
            message: format!("chain spot must be positive, got {}", chain.spot),
        });
    }

    enum Prepared {
        Skip(String),
        Cell { i: usize, j: usize, tau: f64 },
    }

    let prepared: Vec<Prepared> = chain
        .quotes
        .iter()
        .map(|quote| {
            if !(quote.strike > 0.0) {
                return Prepared::Skip(format!("non-positive strike {}", quote.strike));
            }
            if quote.bid < 0.0 || quote.bid > quote.ask {
                return Prepared::Skip(format!(
                    "invalid bid/ask pair ({}, {})",
                    quote.bid, quote.ask
                ));
            }
            let days = (quote.expiry - chain.quote_date).num_days() as f64;
            let tau = days / config.days_per_unit;
            if tau <= 0.0 {
                return Prepared::Skip(format!("expiry {} not after quote date", quote.expiry));
            }
            let moneyness = quote.strike / chain.spot;
            let (i, j) = match (
                bucket_of(&config.moneyness_edges, moneyness),
                bucket_of(&config.maturity_day_edges, days),
            ) {
                (Some(i), Some(j)) => (i, j),
                _ => {
                    return Prepared::Skip(format!(
                        "outside bucket grid (moneyness {moneyness}, {days} days)"
                    ))
                }
            };
            Prepared::Cell { i, j, tau }
        })
        .collect();

    // per-quote solves are independent; collect preserves input order
    let solved: Vec<Option<Result<f64>>> = chain
        .quotes
        .par_iter()
        .zip(prepared.par_iter())
        .map(|(quote, prep)| match prep {
            Prepared::Skip(_) => None,
            Prepared::Cell { tau, .. } => Some(solve(quote, *tau)),
        })
        .collect();

    let n_money = config.moneyness_edges.len() - 1;
    let n_mat = config.maturity_day_edges.len() - 1;
    let mut cells: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n_mat]; n_money];
    let mut skipped = Vec::new();
    let mut used = 0usize;
    for (index, (prep, outcome)) in prepared.iter().zip(solved).enumerate() {
        match (prep, outcome) {
            (Prepared::Skip(reason), _) => skipped.push(SkippedQuote {
                index,
                reason: reason.clone(),
            }),
            (Prepared::Cell { i, j, .. }, Some(Ok(value))) => {
                cells[*i][*j].push(value);
                used += 1;
            }
            (Prepared::Cell { .. }, Some(Err(e))) => skipped.push(SkippedQuote {
                index,
                reason: format!("{}: {e}", e.name()),
            }),
            (Prepared::Cell { .. }, None) => unreachable!("cell quotes are always solved"),
        }
    }
    if used == 0 {
        return Err(Error::EmptySurface {
            skipped: skipped.len(),
        });
    }

    // sort each cell before averaging so the surface is independent of the
    // input quote order
    let values = cells
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|mut bucket| {
                    if bucket.is_empty() {
                        None
                    } else {
                        bucket.sort_by(f64::total_cmp);
                        Some(bucket.iter().sum::<f64>() / bucket.len() as f64)
                    }
                })
                .collect()
        })
        .collect();

    Ok(SurfaceOutcome {
        grid: SurfaceGrid {
            kind,
            moneyness: config.moneyness_centers(),
            maturity: config.maturity_centers(),
            values,
        },
        skipped,
        used,
    })
}

/// Implied-volatility surface from mid prices.
pub fn iv_surface(
    chain: &OptionChain,
    r_star: f64,
    config: &SurfaceConfig,
) -> Result<SurfaceOutcome> {
    build_surface(chain, config, SurfaceKind::ImpliedVol, |quote, tau| {
        let opt = EuropeanOption::new(quote.strike, tau, quote.kind)?;
        blackscholes::implied_vol(chain.spot, &opt, r_star, quote.mid())
    })
}

/// Arbitrage-cost surface: per quote, implied volatility from the chosen
/// price side mapped to `c = (iv − σ)/μ`.
pub fn acs_surface(
    chain: &OptionChain,
    price_source: PriceSource,
    sample: &SampleMoments,
    r_star: f64,
    config: &SurfaceConfig,
) -> Result<SurfaceOutcome> {
    if sample.mu == 0.0 {
        return Err(Error::ZeroDrift);
    }
    build_surface(chain, config, SurfaceKind::ArbCost, |quote, tau| {
        let opt = EuropeanOption::new(quote.strike, tau, quote.kind)?;
        let iv = blackscholes::implied_vol(chain.spot, &opt, r_star, price_source.price_of(quote))?;
        Ok((iv - sample.sigma) / sample.mu)
    })
}

/// Spread arbitrage-cost surface: per quote,
/// `c(ask) − c(bid) = (iv(ask) − iv(bid))/μ`.
///
/// Nonnegative whenever `μ > 0` and `ask ≥ bid`, since implied volatility is
/// increasing in price.
pub fn spread_acs_surface(
    chain: &OptionChain,
    sample: &SampleMoments,
    r_star: f64,
    config: &SurfaceConfig,
) -> Result<SurfaceOutcome> {
    if sample.mu == 0.0 {
        return Err(Error::ZeroDrift);
    }
    build_surface(chain, config, SurfaceKind::SpreadArbCost, |quote, tau| {
        let opt = EuropeanOption::new(quote.strike, tau, quote.kind)?;
        let iv_ask = blackscholes::implied_vol(chain.spot, &opt, r_star, quote.ask)?;
        let iv_bid = blackscholes::implied_vol(chain.spot, &opt, r_star, quote.bid)?;
        Ok((iv_ask - iv_bid) / sample.mu)
    })
}

/// Search bracket for the pooled cost-coefficient fit.
const C_SEARCH_LO: f64 = -1000.0;
const C_SEARCH_HI: f64 = 2000.0;

/// Result of [`combined_acs`].
#[derive(Debug, Clone)]
pub struct CombinedAcs {
    /// Pooled residual-minimising coefficient over both chains.
    pub c: f64,
    /// Pooled objective value at the optimum.
    pub objective: f64,
    /// Per-cell pooled coefficients over both chains.
    pub grid: SurfaceGrid,
    /// Skip logs per chain (indices into the respective chains).
    pub skipped: [Vec<SkippedQuote>; 2],
}

struct PooledQuote {
    opt: EuropeanOption,
    bid: f64,
    ask: f64,
    spot: f64,
    mu: f64,
    sigma: f64,
    rate: f64,
    cell: Option<(usize, usize)>,
}

/// Pooled squared bid/ask price error at coefficient `c`; model prices use
/// `σ = sample σ + c·sample μ` of each quote's own instrument.
fn pooled_objective(quotes: &[&PooledQuote], c: f64) -> f64 {
    let mut sum = 0.0;
    for q in quotes {
        let sigma_c = q.sigma + c * q.mu;
        if sigma_c <= 0.0 {
            // steer the search back toward positive volatilities
            return 1e100 * (1.0 + (1e-6 - sigma_c));
        }
        let model = blackscholes::bs_price(q.spot, &q.opt, q.rate, sigma_c).unwrap_or(f64::INFINITY);
        sum += (model - q.bid).powi(2) + (model - q.ask).powi(2);
    }
    sum
}

/// Find the coefficient minimising the pooled squared differences between
/// model prices at `σ = σ_sample + c·μ_sample` and the observed bid and ask
/// prices of both chains, plus the per-cell analogue on the bucket grid.
pub fn combined_acs(
    chain_a: &OptionChain,
    chain_b: &OptionChain,
    sample_a: &SampleMoments,
    sample_b: &SampleMoments,
    r_star: f64,
    config: &SurfaceConfig,
) -> Result<CombinedAcs> {
    config.validate()?;
    let mut pooled: Vec<PooledQuote> = Vec::new();
    let mut skipped: [Vec<SkippedQuote>; 2] = [Vec::new(), Vec::new()];

    for (which, (chain, sample)) in [(chain_a, sample_a), (chain_b, sample_b)]
        .into_iter()
        .enumerate()
    {
        if !(chain.spot > 0.0) {
            return Err(Error::InvalidInput {
                message: format!("chain spot must be positive, got {}", chain.spot),
            });
        }
        for (index, quote) in chain.quotes.iter().enumerate() {
            if !(quote.strike > 0.0) {
                skipped[which].push(SkippedQuote {
                    index,
                    reason: format!("non-positive strike {}", quote.strike),
                });
                continue;
            }
            if quote.bid < 0.0 || quote.bid > quote.ask {
                skipped[which].push(SkippedQuote {
                    index,
                    reason: format!("invalid bid/ask pair ({}, {})", quote.bid, quote.ask),
                });
                continue;
            }
            let days = (quote.expiry - chain.quote_date).num_days() as f64;
            let tau = days / config.days_per_unit;
            if tau <= 0.0 {
                skipped[which].push(SkippedQuote {
                    index,
                    reason: format!("expiry {} not after quote date", quote.expiry),
                });
                continue;
            }
            let moneyness = quote.strike / chain.spot;
            let cell = match (
                bucket_of(&config.moneyness_edges, moneyness),
                bucket_of(&config.maturity_day_edges, days),
            ) {
                (Some(i), Some(j)) => Some((i, j)),
                _ => None,
            };
            pooled.push(PooledQuote {
                opt: EuropeanOption::new(quote.strike, tau, quote.kind)?,
                bid: quote.bid,
                ask: quote.ask,
                spot: chain.spot,
                mu: sample.mu,
                sigma: sample.sigma,
                rate: r_star,
                cell,
            });
        }
    }
    if pooled.is_empty() {
        return Err(Error::EmptySurface {
            skipped: skipped[0].len() + skipped[1].len(),
        });
    }

    let all: Vec<&PooledQuote> = pooled.iter().collect();
    let fit = optim::brent_min(
        |c| pooled_objective(&all, c),
        C_SEARCH_LO,
        C_SEARCH_HI,
        1e-10,
        300,
    );
    if !fit.fx.is_finite() {
        return Err(Error::NoConvergence {
            iterations: fit.evals,
            context: "pooled cost-coefficient objective is not finite at the optimum".into(),
        });
    }

    let n_money = config.moneyness_edges.len() - 1;
    let n_mat = config.maturity_day_edges.len() - 1;
    let mut values: Vec<Vec<Option<f64>>> = vec![vec![None; n_mat]; n_money];
    for i in 0..n_money {
        for j in 0..n_mat {
            let cell_quotes: Vec<&PooledQuote> = pooled
                .iter()
                .filter(|q| q.cell == Some((i, j)))
                .collect();
            if cell_quotes.is_empty() {
                continue;
            }
            let cell_fit = optim::brent_min(
                |c| pooled_objective(&cell_quotes, c),
                C_SEARCH_LO,
                C_SEARCH_HI,
                1e-10,
                300,
            );
            if cell_fit.fx.is_finite() {
                values[i][j] = Some(cell_fit.x);
            }
        }
    }

    Ok(CombinedAcs {
        c: fit.x,
        objective: fit.fx,
        grid: SurfaceGrid {
            kind: SurfaceKind::ArbCost,
            moneyness: config.moneyness_centers(),
            maturity: config.maturity_centers(),
            values,
        },
        skipped,
    })
}
