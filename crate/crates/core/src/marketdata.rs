//! Price-history and option-chain ingestion, sample return moments, and the
//! rolling-window implied-rate series.
//!
//! Returns are simple returns `P_t/P_{t−1} − 1`, matching the arithmetic
//! increments `1 + μ·Δt ± σ·√Δt` of the lattice parameterisation; a
//! log-return mode is available for sensitivity checks.
//!
//! Expected CSV layouts (UTF-8, decimal point, no thousands separators):
//!
//! ```text
//! prices:  date,adj_close          ISO-8601 dates
//! chains:  expiry,strike,bid,ask,last,type      type ∈ {C, P}
//! ```

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;

use crate::blackscholes::OptionKind;
use crate::calibration::{OptionChain, OptionQuote};
use crate::error::{Error, Result};
use crate::model::{self, MarketParams};

/// Ordered daily price observations for one instrument.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PriceSeries {
    /// Instrument tag (e.g. ticker).
    pub instrument: String,
    /// (date, adjusted close), dates strictly increasing, prices positive.
    pub observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Number of observations.
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    /// Whether the series is empty.
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// How period returns are computed from consecutive prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ReturnKind {
    /// `P_t/P_{t−1} − 1`, consistent with the lattice increments.
    Simple,
    /// `ln(P_t/P_{t−1})`, for sensitivity checks.
    Log,
}

/// Sample mean and standard deviation of period returns.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampleMoments {
    /// Mean return per period.
    pub mu: f64,
    /// Sample standard deviation (n − 1 denominator) per √period.
    pub sigma: f64,
}

fn parse_date(raw: &str, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|e| Error::ParseError {
        row,
        message: format!("bad date {raw:?}: {e}"),
    })
}

fn parse_number(raw: &str, column: &str, row: usize) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::ParseError {
        row,
        message: format!("column {column}: cannot parse {raw:?} as a number"),
    })
}

/// Load a `date,adj_close` price history. Rows are sorted by date on load;
/// duplicate dates and non-positive prices are fatal.
pub fn load_prices<R: Read>(source: R, instrument: &str) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::ParseError {
            row: 0,
            message: format!("cannot read header: {e}"),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::ParseError {
                row: 0,
                message: format!("missing column {name:?} in header {headers:?}"),
            })
    };
    let date_col = col("date")?;
    let price_col = col("adj_close")?;

    let mut observations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::ParseError {
            row,
            message: format!("malformed row: {e}"),
        })?;
        let date = parse_date(record.get(date_col).unwrap_or(""), row)?;
        let price = parse_number(record.get(price_col).unwrap_or(""), "adj_close", row)?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::NonPositivePrice { row, price });
        }
        observations.push((date, price));
    }
    observations.sort_by_key(|(date, _)| *date);
    for pair in observations.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateDate { date: pair[0].0 });
        }
    }
    Ok(PriceSeries {
        instrument: instrument.to_string(),
        observations,
    })
}

/// A chain row excluded at load time.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RejectedRow {
    /// 1-based data row number.
    pub row: usize,
    /// Why the row was excluded.
    pub reason: String,
}

impl RejectedRow {
    /// Render as a rejection-report line.
    pub fn report_line(&self) -> String {
        format!("ROW {}: {}", self.row, self.reason)
    }
}

/// Load an `expiry,strike,bid,ask,last,type` option chain.
///
/// Syntactically malformed rows are fatal parse errors; rows violating quote
/// invariants (crossed bid/ask, expiry before the quote date, non-positive
/// strike) are excluded and reported, not fatal.
pub fn load_chain<R: Read>(
    source: R,
    quote_date: NaiveDate,
    spot: f64,
    instrument: &str,
) -> Result<(OptionChain, Vec<RejectedRow>)> {
    if !(spot > 0.0) || !spot.is_finite() {
        return Err(Error::InvalidInput {
            message: format!("spot must be positive and finite, got {spot}"),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::ParseError {
            row: 0,
            message: format!("cannot read header: {e}"),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::ParseError {
                row: 0,
                message: format!("missing column {name:?} in header {headers:?}"),
            })
    };
    let (expiry_col, strike_col) = (col("expiry")?, col("strike")?);
    let (bid_col, ask_col) = (col("bid")?, col("ask")?);
    let (last_col, type_col) = (col("last")?, col("type")?);

    let mut quotes = Vec::new();
    let mut rejected = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::ParseError {
            row,
            message: format!("malformed row: {e}"),
        })?;
        let expiry = parse_date(record.get(expiry_col).unwrap_or(""), row)?;
        let strike = parse_number(record.get(strike_col).unwrap_or(""), "strike", row)?;
        let bid = parse_number(record.get(bid_col).unwrap_or(""), "bid", row)?;
        let ask = parse_number(record.get(ask_col).unwrap_or(""), "ask", row)?;
        let last_raw = record.get(last_col).unwrap_or("").trim();
        let last = if last_raw.is_empty() {
            None
        } else {
            Some(parse_number(last_raw, "last", row)?)
        };
        let kind = match record.get(type_col).unwrap_or("").trim() {
            "C" | "c" => OptionKind::Call,
            "P" | "p" => OptionKind::Put,
            other => {
                rejected.push(RejectedRow {
                    row,
                    reason: format!("unknown option type {other:?}"),
                });
                continue;
            }
        };
        if !(strike > 0.0) {
            rejected.push(RejectedRow {
                row,
                reason: format!("non-positive strike {strike}"),
            });
            continue;
        }
        if bid < 0.0 || bid > ask {
            rejected.push(RejectedRow {
                row,
                reason: format!("invalid bid/ask pair ({bid}, {ask})"),
            });
            continue;
        }
        if expiry < quote_date {
            rejected.push(RejectedRow {
                row,
                reason: format!("expiry {expiry} before quote date {quote_date}"),
            });
            continue;
        }
        quotes.push(OptionQuote {
            expiry,
            strike,
            bid,
            ask,
            last,
            kind,
        });
    }
    if quotes.is_empty() {
        return Err(Error::EmptyChain {
            rejected: rejected.len(),
        });
    }
    Ok((
        OptionChain {
            quote_date,
            spot,
            instrument: instrument.to_string(),
            quotes,
        },
        rejected,
    ))
}

fn returns_of(prices: &[(NaiveDate, f64)], kind: ReturnKind) -> Vec<f64> {
    prices
        .windows(2)
        .map(|w| match kind {
            ReturnKind::Simple => w[1].1 / w[0].1 - 1.0,
            ReturnKind::Log => (w[1].1 / w[0].1).ln(),
        })
        .collect()
}

// Welford's online recurrence; the sibling test oracle is two-pass.
fn moments_of(returns: &[f64]) -> SampleMoments {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in returns.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let sigma = if returns.len() > 1 {
        (m2 / (returns.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    SampleMoments { mu: mean, sigma }
}

/// Sample mean and standard deviation of the series' period returns.
pub fn sample_moments(series: &PriceSeries) -> Result<SampleMoments> {
    sample_moments_with(series, ReturnKind::Simple)
}

/// [`sample_moments`] with an explicit return convention.
pub fn sample_moments_with(series: &PriceSeries, kind: ReturnKind) -> Result<SampleMoments> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: series.len(),
        });
    }
    Ok(moments_of(&returns_of(&series.observations, kind)))
}

/// One rolling-window estimate: moments of both series over the window
/// ending on `date`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RollingEntry {
    /// Window end date.
    pub date: NaiveDate,
    /// First-series mean return over the window.
    pub mu: f64,
    /// First-series return standard deviation over the window.
    pub sigma: f64,
    /// Second-series mean return over the window.
    pub m: f64,
    /// Second-series return standard deviation over the window.
    pub v: f64,
}

/// Rolling two-series moment estimates with the window size that produced
/// them.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RollingParamsSeries {
    /// Window size, counted in returns.
    pub window: usize,
    /// One entry per window end date, dates ascending.
    pub entries: Vec<RollingEntry>,
}

/// Rolling window moments of two date-aligned price series.
///
/// Dates are inner-joined; a date missing on either side drops the date (and
/// the return spanning it uses the neighbouring joined prices). The window
/// counts returns, so `window + 1` joined prices yield one entry.
pub fn rolling_params(
    series_s: &PriceSeries,
    series_v: &PriceSeries,
    window: usize,
) -> Result<RollingParamsSeries> {
    if window == 0 {
        return Err(Error::InvalidInput {
            message: "window must be at least 1".into(),
        });
    }
    let by_date: BTreeMap<NaiveDate, f64> = series_v.observations.iter().copied().collect();
    let joined: Vec<(NaiveDate, f64, f64)> = series_s
        .observations
        .iter()
        .filter_map(|(date, s)| by_date.get(date).map(|v| (*date, *s, *v)))
        .collect();
    if joined.is_empty() {
        return Err(Error::EmptyDateIntersection);
    }
    if joined.len() < window + 1 {
        return Err(Error::InsufficientData {
            needed: window + 1,
            have: joined.len(),
        });
    }

    let entries = (window..joined.len())
        .map(|end| {
            let slice = &joined[end - window..=end];
            let s_prices: Vec<(NaiveDate, f64)> = slice.iter().map(|(d, s, _)| (*d, *s)).collect();
            let v_prices: Vec<(NaiveDate, f64)> = slice.iter().map(|(d, _, v)| (*d, *v)).collect();
            let ms = moments_of(&returns_of(&s_prices, ReturnKind::Simple));
            let mv = moments_of(&returns_of(&v_prices, ReturnKind::Simple));
            RollingEntry {
                date: joined[end].0,
                mu: ms.mu,
                sigma: ms.sigma,
                m: mv.mu,
                v: mv.sigma,
            }
        })
        .collect();
    Ok(RollingParamsSeries { window, entries })
}

/// Optional smoothing of the implied-rate series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Smoothing {
    /// No smoothing.
    None,
    /// Trailing moving average over the given number of points.
    MovingAverage(usize),
}

/// One point of the implied-rate series. `r_star` is `None` on dates whose
/// window produced a degenerate spread.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RStarPoint {
    /// Window end date.
    pub date: NaiveDate,
    /// Implied rate, or `None` for a degenerate window.
    pub r_star: Option<f64>,
}

/// Rolling implied-rate series.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RStarSeries {
    /// Window size, counted in returns.
    pub window: usize,
    /// Smoothing applied.
    pub smoothing: Smoothing,
    /// One point per window end date, dates ascending.
    pub points: Vec<RStarPoint>,
}

/// Per-date implied rate from rolling moments at a fixed cost coefficient.
///
/// Degenerate windows are marked, never interpolated. The optional trailing
/// moving average runs over the available (non-degenerate) values in each
/// trailing window.
pub fn rstar_series(params: &RollingParamsSeries, c: f64, smoothing: Smoothing) -> Result<RStarSeries> {
    if !c.is_finite() {
        return Err(Error::InvalidInput {
            message: format!("cost coefficient must be finite, got {c}"),
        });
    }
    let raw: Vec<RStarPoint> = params
        .entries
        .iter()
        .map(|e| {
            let r_star = MarketParams::new(e.mu, e.sigma, e.m, e.v, c)
                .and_then(|p| model::adjusted_params(&p))
                .map(|a| a.r_star)
                .ok();
            RStarPoint {
                date: e.date,
                r_star,
            }
        })
        .collect();

    let points = match smoothing {
        Smoothing::None => raw,
        Smoothing::MovingAverage(width) => {
            if width == 0 {
                return Err(Error::InvalidInput {
                    message: "moving-average width must be at least 1".into(),
                });
            }
            (0..raw.len())
                .map(|i| {
                    let lo = i + 1 - width.min(i + 1);
                    let window: Vec<f64> =
                        raw[lo..=i].iter().filter_map(|p| p.r_star).collect();
                    RStarPoint {
                        date: raw[i].date,
                        r_star: if window.is_empty() {
                            None
                        } else {
                            Some(window.iter().sum::<f64>() / window.len() as f64)
                        },
                    }
                })
                .collect()
        }
    };
    Ok(RStarSeries {
        window: params.window,
        smoothing,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use rand::SeedableRng;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(prices: &[(&str, f64)]) -> PriceSeries {
        PriceSeries {
            instrument: "TEST".into(),
            observations: prices.iter().map(|(d, p)| (date(d), *p)).collect(),
        }
    }

    #[test]
    fn loads_and_sorts_prices() {
        let csv = "date,adj_close\n2020-01-03,102.5\n2020-01-01,100\n2020-01-02,101\n";
        let loaded = load_prices(csv.as_bytes(), "SPY").unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded.observations[0].0, date("2020-01-01"));
        assert_eq!(loaded.observations[2].1, 102.5);

        let sorted = "date,adj_close\n2020-01-01,100\n2020-01-02,101\n2020-01-03,102.5\n";
        assert_eq!(loaded, load_prices(sorted.as_bytes(), "SPY").unwrap());
    }

    #[test]
    fn price_loading_error_paths() {
        let bad_price = "date,adj_close\n2020-01-01,100\n2020-01-02,-1\n";
        assert!(matches!(
            load_prices(bad_price.as_bytes(), "X"),
            Err(Error::NonPositivePrice { row: 2, .. })
        ));
        let dup = "date,adj_close\n2020-01-01,100\n2020-01-01,101\n";
        assert!(matches!(
            load_prices(dup.as_bytes(), "X"),
            Err(Error::DuplicateDate { .. })
        ));
        let garbled = "date,adj_close\n2020-01-01,abc\n";
        assert!(matches!(
            load_prices(garbled.as_bytes(), "X"),
            Err(Error::ParseError { row: 1, .. })
        ));
        let missing = "when,adj_close\n2020-01-01,100\n";
        assert!(matches!(
            load_prices(missing.as_bytes(), "X"),
            Err(Error::ParseError { row: 0, .. })
        ));
    }

    #[test]
    fn loads_chain_and_rejects_bad_rows() {
        let csv = "expiry,strike,bid,ask,last,type\n\
                   2020-06-19,100,9.5,10.5,10,C\n\
                   2020-06-19,110,5.5,5.0,,C\n\
                   2019-06-19,100,9.5,10.5,,C\n\
                   2020-06-19,120,2.0,2.2,,P\n\
                   2020-06-19,130,1.0,1.2,,X\n";
        let (chain, rejected) =
            load_chain(csv.as_bytes(), date("2020-01-02"), 100.0, "SPY").unwrap();
        assert_eq!(chain.quotes.len(), 2);
        assert_eq!(rejected.len(), 3);
        assert_eq!(rejected[0].row, 2);
        assert!(rejected[0].reason.contains("bid/ask"));
        assert!(rejected[1].reason.contains("before quote date"));
        assert!(rejected[2].reason.contains("unknown option type"));
        assert_eq!(rejected[2].report_line(), format!("ROW 5: {}", rejected[2].reason));
        assert_eq!(chain.quotes[1].kind, OptionKind::Put);
    }

    #[test]
    fn empty_chain_is_an_error() {
        let csv = "expiry,strike,bid,ask,last,type\n2019-06-19,100,9.5,10.5,,C\n";
        assert!(matches!(
            load_chain(csv.as_bytes(), date("2020-01-02"), 100.0, "SPY"),
            Err(Error::EmptyChain { rejected: 1 })
        ));
    }

    #[test]
    fn constant_series_has_zero_moments() {
        let s = series(&[("2020-01-01", 50.0), ("2020-01-02", 50.0), ("2020-01-03", 50.0)]);
        let m = sample_moments(&s).unwrap();
        assert_eq!(m.mu, 0.0);
        assert_eq!(m.sigma, 0.0);
    }

    #[test]
    fn constant_return_series() {
        let s = series(&[("2020-01-01", 100.0), ("2020-01-02", 101.0), ("2020-01-03", 102.01)]);
        let m = sample_moments(&s).unwrap();
        assert_abs_diff_eq!(m.mu, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sigma, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn matches_two_pass_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut prices = vec![(date("2020-01-01"), 100.0)];
        for i in 1..252 {
            let last = prices[i - 1].1;
            let r: f64 = rng.gen_range(-0.03..0.03);
            prices.push((
                date("2020-01-01") + chrono::Duration::days(i as i64),
                last * (1.0 + r),
            ));
        }
        let s = PriceSeries {
            instrument: "RND".into(),
            observations: prices,
        };
        let m = sample_moments(&s).unwrap();

        // two-pass oracle
        let rets = returns_of(&s.observations, ReturnKind::Simple);
        let mean = rets.iter().sum::<f64>() / rets.len() as f64;
        let var = rets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rets.len() - 1) as f64;
        assert_relative_eq!(m.mu, mean, max_relative = 1e-12);
        assert_relative_eq!(m.sigma, var.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn insufficient_data_is_rejected() {
        let s = series(&[("2020-01-01", 100.0)]);
        assert!(matches!(
            sample_moments(&s),
            Err(Error::InsufficientData { needed: 2, have: 1 })
        ));
    }

    #[test]
    fn log_returns_differ_from_simple() {
        let s = series(&[("2020-01-01", 100.0), ("2020-01-02", 110.0)]);
        let simple = sample_moments_with(&s, ReturnKind::Simple).unwrap();
        let log = sample_moments_with(&s, ReturnKind::Log).unwrap();
        assert_abs_diff_eq!(simple.mu, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(log.mu, 1.1f64.ln(), epsilon = 1e-15);
    }

    fn random_pair(n: usize, seed: u64) -> (PriceSeries, PriceSeries) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d0 = date("2018-01-01");
        let (mut s, mut v) = (vec![(d0, 100.0)], vec![(d0, 80.0)]);
        for i in 1..n {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let day = d0 + chrono::Duration::days(i as i64);
            s.push((day, s[i - 1].1 * (1.0 + 0.0004 + 0.01 * z)));
            v.push((day, v[i - 1].1 * (1.0 + 0.0003 + 0.007 * z)));
        }
        (
            PriceSeries { instrument: "S".into(), observations: s },
            PriceSeries { instrument: "V".into(), observations: v },
        )
    }

    #[test]
    fn rolling_window_boundaries() {
        let (s, v) = random_pair(11, 5);
        let rolled = rolling_params(&s, &v, 10).unwrap();
        assert_eq!(rolled.entries.len(), 1);
        assert_eq!(rolled.entries[0].date, s.observations[10].0);
        assert!(matches!(
            rolling_params(&s, &v, 11),
            Err(Error::InsufficientData { needed: 12, have: 11 })
        ));
    }

    #[test]
    fn identical_series_give_identical_moments() {
        let (s, _) = random_pair(40, 9);
        let rolled = rolling_params(&s, &s, 20).unwrap();
        for e in &rolled.entries {
            assert_eq!(e.mu, e.m);
            assert_eq!(e.sigma, e.v);
        }
    }

    #[test]
    fn rolling_matches_from_scratch_oracle_exactly() {
        let (s, v) = random_pair(120, 17);
        let window = 30;
        let rolled = rolling_params(&s, &v, window).unwrap();
        for (offset, entry) in rolled.entries.iter().enumerate() {
            let slice = PriceSeries {
                instrument: "S".into(),
                observations: s.observations[offset..=offset + window].to_vec(),
            };
            let oracle = sample_moments(&slice).unwrap();
            assert_eq!(entry.mu, oracle.mu, "window at offset {offset}");
            assert_eq!(entry.sigma, oracle.sigma);
        }
    }

    #[test]
    fn inner_join_drops_unmatched_dates() {
        let (s, v) = random_pair(30, 21);
        let mut v_gappy = v.clone();
        v_gappy.observations.remove(10);
        v_gappy.observations.remove(20);
        let rolled = rolling_params(&s, &v_gappy, 5).unwrap();
        let v_dates: std::collections::BTreeSet<_> =
            v_gappy.observations.iter().map(|(d, _)| *d).collect();
        for e in &rolled.entries {
            assert!(v_dates.contains(&e.date));
        }
        assert_eq!(rolled.entries.len(), 28 - 5);

        let disjoint = series(&[("1999-01-01", 1.0), ("1999-01-02", 1.0)]);
        assert!(matches!(
            rolling_params(&s, &disjoint, 5),
            Err(Error::EmptyDateIntersection)
        ));
    }

    #[test]
    fn rstar_series_black_reduction() {
        // identical window moments every day: r* must equal (μv − mσ)/(v − σ)
        let entries: Vec<RollingEntry> = (0..5)
            .map(|i| RollingEntry {
                date: date("2020-01-01") + chrono::Duration::days(i),
                mu: 0.05,
                sigma: 0.2,
                m: 0.03,
                v: 0.1,
            })
            .collect();
        let params = RollingParamsSeries { window: 3, entries };
        let series = rstar_series(&params, 0.0, Smoothing::None).unwrap();
        for p in &series.points {
            assert_relative_eq!(p.r_star.unwrap(), 0.01, max_relative = 1e-13);
        }
        // smoothing a constant series is a fixed point
        let smoothed = rstar_series(&params, 0.0, Smoothing::MovingAverage(5)).unwrap();
        for p in &smoothed.points {
            assert_relative_eq!(p.r_star.unwrap(), 0.01, max_relative = 1e-13);
        }
    }

    #[test]
    fn degenerate_windows_are_marked() {
        let (s, _) = random_pair(30, 33);
        let rolled = rolling_params(&s, &s, 10).unwrap();
        let series = rstar_series(&rolled, 0.0, Smoothing::None).unwrap();
        assert_eq!(series.points.len(), rolled.entries.len());
        assert!(series.points.iter().all(|p| p.r_star.is_none()));
    }
}
