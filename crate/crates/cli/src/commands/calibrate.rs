//! `arbcost calibrate`: implied (rate, volatility) from a chain plus the
//! cost coefficient from sample moments, or the direct scalar relation.

use std::fs::File;

use arbcost::{blackscholes, calibration, marketdata};
use clap::Args;

use crate::commands::{days_per_unit, emit};
use crate::config::{check_exists, parse_date, require, CliError, CliResult, FileConfig};
use crate::output::json_num;
use crate::CommonArgs;

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Option chain CSV (expiry,strike,bid,ask,last,type).
    #[arg(long)]
    chain: Option<std::path::PathBuf>,
    /// Date the chain was quoted (YYYY-MM-DD).
    #[arg(long)]
    quote_date: Option<String>,
    /// Underlying spot on the quote date.
    #[arg(long)]
    spot: Option<f64>,
    /// Price history CSV (date,adj_close) for the sample moments.
    #[arg(long)]
    prices: Option<std::path::PathBuf>,

    /// Direct scalar mode: compute c from --sigma-star/--sigma/--mu without
    /// any input files.
    #[arg(long)]
    direct: bool,
    /// Implied volatility (direct mode).
    #[arg(long)]
    sigma_star: Option<f64>,
    /// Sample volatility (direct mode).
    #[arg(long)]
    sigma: Option<f64>,
    /// Sample drift (direct mode).
    #[arg(long)]
    mu: Option<f64>,
}

pub fn run(args: &CalibrateArgs, file: &FileConfig) -> CliResult<()> {
    crate::commands::note_seed(args.common.seed, file.common.seed);
    let out = args.common.out.as_deref().or(file.common.out.as_deref());
    let direct = args.direct || file.calibrate.direct.unwrap_or(false);

    if direct {
        let sigma_star = require(&args.sigma_star, &file.calibrate.sigma_star, "sigma-star")?;
        let sigma = require(&args.sigma, &file.calibrate.sigma, "sigma")?;
        let mu = require(&args.mu, &file.calibrate.mu, "mu")?;
        let c = calibration::calibrate_c_scalar(sigma_star, sigma, mu)?;
        let report = serde_json::json!({
            "mode": "direct",
            "sigma_star": json_num(sigma_star),
            "sigma": json_num(sigma),
            "mu": json_num(mu),
            "c": json_num(c),
        });
        return emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).expect("static json")));
    }

    let chain_path = require(&args.chain, &file.calibrate.chain, "chain")?;
    let prices_path = require(&args.prices, &file.calibrate.prices, "prices")?;
    let quote_date = parse_date(
        &require(&args.quote_date, &file.calibrate.quote_date, "quote-date")?,
        "quote date",
    )?;
    let spot = require(&args.spot, &file.calibrate.spot, "spot")?;
    let unit = days_per_unit(args.common.annualization, file.common.annualization)?;
    check_exists(&chain_path)?;
    check_exists(&prices_path)?;

    let open = |path: &std::path::Path| {
        File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
    };
    let (chain, rejected) = marketdata::load_chain(
        open(&chain_path)?,
        quote_date,
        spot,
        chain_path.file_stem().and_then(|s| s.to_str()).unwrap_or(""),
    )?;
    let prices = marketdata::load_prices(
        open(&prices_path)?,
        prices_path.file_stem().and_then(|s| s.to_str()).unwrap_or(""),
    )?;
    log::info!(
        "loaded {} quotes ({} rejected) and {} prices",
        chain.quotes.len(),
        rejected.len(),
        prices.len()
    );

    let sample = marketdata::sample_moments(&prices)?;
    let fit = blackscholes::implied_rate_vol(&chain, spot, unit)?;
    // the sample moments are per day while sigma_star is per sqrt(unit);
    // c absorbs the scale, as recorded in the report
    let c = calibration::calibrate_c_scalar(fit.sigma_star, sample.sigma, sample.mu)?;

    let report = serde_json::json!({
        "mode": "chain",
        "r_star": json_num(fit.r_star),
        "sigma_star": json_num(fit.sigma_star),
        "sample_mu": json_num(sample.mu),
        "sample_sigma": json_num(sample.sigma),
        "c": json_num(c),
        "rmse": json_num(fit.report.rmse),
        "evaluations": fit.report.evaluations,
        "quotes_loaded": chain.quotes.len(),
        "quotes_rejected": rejected.len(),
        "rejection_report": rejected.iter().map(|r| r.report_line()).collect::<Vec<_>>(),
        "units": {
            "time_unit_days": unit,
            "implied": "per time unit",
            "sample_moments": "per trading day",
            "c_note": "c = (sigma_star - sample_sigma)/sample_mu mixes the two scales; it absorbs the unit gap",
        },
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).expect("static json")))
}
