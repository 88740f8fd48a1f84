//! `arbcost surfaces`: implied-volatility, arbitrage-cost, spread and
//! combined surfaces as plot-ready long-format CSV.

use std::fs::File;
use std::path::{Path, PathBuf};

use arbcost::calibration::{
    self, OptionChain, PriceSource, SkippedQuote, SurfaceConfig, SurfaceGrid,
};
use arbcost::marketdata::{self, SampleMoments};
use clap::Args;

use crate::commands::days_per_unit;
use crate::config::{check_exists, parse_date, pick, require, CliError, CliResult, FileConfig};
use crate::output::{fmt_sig, json_num, write_atomic};
use crate::CommonArgs;

#[derive(Debug, Args)]
pub struct SurfacesArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Comma-separated surfaces to build: iv, acs, spread-acs, combined.
    #[arg(long)]
    which: Option<String>,

    /// Option chain CSV for the first instrument.
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Quote date of the first chain (YYYY-MM-DD).
    #[arg(long)]
    quote_date: Option<String>,
    /// Spot of the first instrument.
    #[arg(long)]
    spot: Option<f64>,

    /// Option chain CSV for the second instrument (combined only).
    #[arg(long)]
    chain_b: Option<PathBuf>,
    /// Quote date of the second chain.
    #[arg(long)]
    quote_date_b: Option<String>,
    /// Spot of the second instrument.
    #[arg(long)]
    spot_b: Option<f64>,

    /// Price history CSV to estimate (mu, sigma) for the first instrument.
    #[arg(long)]
    prices: Option<PathBuf>,
    /// Price history CSV for the second instrument.
    #[arg(long)]
    prices_b: Option<PathBuf>,
    /// Sample drift of the first instrument (alternative to --prices).
    #[arg(long)]
    mu: Option<f64>,
    /// Sample volatility of the first instrument.
    #[arg(long)]
    sigma: Option<f64>,
    /// Sample drift of the second instrument.
    #[arg(long)]
    mu_b: Option<f64>,
    /// Sample volatility of the second instrument.
    #[arg(long)]
    sigma_b: Option<f64>,

    /// Implied risk-free rate used by the per-quote solves.
    #[arg(long)]
    r_star: Option<f64>,
    /// Quote side for the plain cost surface.
    #[arg(long, value_parser = ["mid", "bid", "ask"])]
    price_source: Option<String>,
    /// Override the moneyness bucket edges (comma-separated).
    #[arg(long, value_delimiter = ',')]
    moneyness_edges: Option<Vec<f64>>,
    /// Override the maturity bucket edges in days (comma-separated).
    #[arg(long, value_delimiter = ',')]
    maturity_days: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Iv,
    Acs,
    SpreadAcs,
    Combined,
}

fn parse_which(raw: &str) -> CliResult<Vec<Choice>> {
    let mut choices = Vec::new();
    for token in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        choices.push(match token {
            "iv" => Choice::Iv,
            "acs" => Choice::Acs,
            "spread-acs" => Choice::SpreadAcs,
            "combined" => Choice::Combined,
            other => {
                return Err(CliError::Config(format!(
                    "unknown surface {other:?} (expected iv, acs, spread-acs, combined)"
                )))
            }
        });
    }
    if choices.is_empty() {
        return Err(CliError::Config("no surfaces requested".into()));
    }
    Ok(choices)
}

fn load_chain_file(path: &Path, quote_date: &str, spot: f64) -> CliResult<OptionChain> {
    check_exists(path)?;
    let reader = File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let (chain, rejected) = marketdata::load_chain(
        reader,
        parse_date(quote_date, "quote date")?,
        spot,
        path.file_stem().and_then(|s| s.to_str()).unwrap_or(""),
    )?;
    for r in &rejected {
        log::warn!("{}: {}", path.display(), r.report_line());
    }
    Ok(chain)
}

fn moments_from(
    mu: Option<f64>,
    sigma: Option<f64>,
    prices: Option<&Path>,
    label: &str,
) -> CliResult<SampleMoments> {
    match (mu, sigma, prices) {
        (Some(mu), Some(sigma), _) => Ok(SampleMoments { mu, sigma }),
        (_, _, Some(path)) => {
            check_exists(path)?;
            let reader = File::open(path)
                .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
            let series = marketdata::load_prices(
                reader,
                path.file_stem().and_then(|s| s.to_str()).unwrap_or(""),
            )?;
            Ok(marketdata::sample_moments(&series)?)
        }
        _ => Err(CliError::Config(format!(
            "give either --mu/--sigma or --prices for {label}"
        ))),
    }
}

fn surface_csv(grid: &SurfaceGrid) -> String {
    let mut csv = String::from("moneyness,maturity,value\n");
    for (moneyness, maturity, value) in grid.cells() {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(moneyness),
            fmt_sig(maturity),
            fmt_sig(value)
        ));
    }
    csv
}

fn stem_path(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!("_{suffix}"));
    stem.with_file_name(name)
}

fn skip_json(skipped: &[SkippedQuote]) -> serde_json::Value {
    serde_json::Value::Array(
        skipped
            .iter()
            .map(|s| serde_json::json!({ "index": s.index, "reason": s.reason }))
            .collect(),
    )
}

pub fn run(args: &SurfacesArgs, file: &FileConfig) -> CliResult<()> {
    crate::commands::note_seed(args.common.seed, file.common.seed);
    let which = parse_which(&require(&args.which, &file.surfaces.which, "which")?)?;
    let out_stem = args
        .common
        .out
        .as_deref()
        .or(file.common.out.as_deref())
        .ok_or_else(|| CliError::Config("surfaces need --out as the output stem".into()))?;
    let unit = days_per_unit(args.common.annualization, file.common.annualization)?;
    let r_star = require(&args.r_star, &file.surfaces.r_star, "r-star")?;
    let with_meta = pick(&args.common.format, &file.common.format).as_deref() == Some("json");

    let mut config = SurfaceConfig {
        days_per_unit: unit,
        ..SurfaceConfig::default()
    };
    if let Some(edges) = pick(&args.moneyness_edges, &file.surfaces.moneyness_edges) {
        config.moneyness_edges = edges;
    }
    if let Some(edges) = pick(&args.maturity_days, &file.surfaces.maturity_days) {
        config.maturity_day_edges = edges;
    }

    let chain = load_chain_file(
        &require(&args.chain, &file.surfaces.chain, "chain")?,
        &require(&args.quote_date, &file.surfaces.quote_date, "quote-date")?,
        require(&args.spot, &file.surfaces.spot, "spot")?,
    )?;

    let needs_moments = which
        .iter()
        .any(|c| matches!(c, Choice::Acs | Choice::SpreadAcs | Choice::Combined));
    let sample = if needs_moments {
        Some(moments_from(
            pick(&args.mu, &file.surfaces.mu),
            pick(&args.sigma, &file.surfaces.sigma),
            pick(&args.prices, &file.surfaces.prices).as_deref(),
            "the first instrument",
        )?)
    } else {
        None
    };

    let price_source = match pick(&args.price_source, &file.surfaces.price_source)
        .unwrap_or_else(|| "mid".into())
        .as_str()
    {
        "mid" => PriceSource::Mid,
        "bid" => PriceSource::Bid,
        "ask" => PriceSource::Ask,
        other => return Err(CliError::Config(format!("unknown price source {other:?}"))),
    };

    // compute everything first; write files only after every surface built
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    let mut meta = serde_json::Map::new();
    meta.insert("r_star".into(), json_num(r_star));
    meta.insert(
        "time_unit_days".into(),
        serde_json::Value::from(unit),
    );

    for choice in &which {
        match choice {
            Choice::Iv => {
                let outcome = calibration::iv_surface(&chain, r_star, &config)?;
                log::info!("iv surface: {} used, {} skipped", outcome.used, outcome.skipped.len());
                meta.insert(
                    "iv".into(),
                    serde_json::json!({
                        "used": outcome.used,
                        "cells": outcome.grid.populated(),
                        "skipped": skip_json(&outcome.skipped),
                    }),
                );
                files.push((stem_path(out_stem, "iv.csv"), surface_csv(&outcome.grid)));
            }
            Choice::Acs => {
                let outcome = calibration::acs_surface(
                    &chain,
                    price_source,
                    sample.as_ref().expect("moments resolved above"),
                    r_star,
                    &config,
                )?;
                log::info!("acs surface: {} used, {} skipped", outcome.used, outcome.skipped.len());
                meta.insert(
                    "acs".into(),
                    serde_json::json!({
                        "used": outcome.used,
                        "cells": outcome.grid.populated(),
                        "skipped": skip_json(&outcome.skipped),
                    }),
                );
                files.push((stem_path(out_stem, "acs.csv"), surface_csv(&outcome.grid)));
            }
            Choice::SpreadAcs => {
                let outcome = calibration::spread_acs_surface(
                    &chain,
                    sample.as_ref().expect("moments resolved above"),
                    r_star,
                    &config,
                )?;
                log::info!(
                    "spread-acs surface: {} used, {} skipped",
                    outcome.used,
                    outcome.skipped.len()
                );
                meta.insert(
                    "spread_acs".into(),
                    serde_json::json!({
                        "used": outcome.used,
                        "cells": outcome.grid.populated(),
                        "skipped": skip_json(&outcome.skipped),
                    }),
                );
                files.push((
                    stem_path(out_stem, "spread_acs.csv"),
                    surface_csv(&outcome.grid),
                ));
            }
            Choice::Combined => {
                let chain_b = load_chain_file(
                    &require(&args.chain_b, &file.surfaces.chain_b, "chain-b")?,
                    &require(&args.quote_date_b, &file.surfaces.quote_date_b, "quote-date-b")?,
                    require(&args.spot_b, &file.surfaces.spot_b, "spot-b")?,
                )?;
                let sample_b = moments_from(
                    pick(&args.mu_b, &file.surfaces.mu_b),
                    pick(&args.sigma_b, &file.surfaces.sigma_b),
                    pick(&args.prices_b, &file.surfaces.prices_b).as_deref(),
                    "the second instrument",
                )?;
                let fit = calibration::combined_acs(
                    &chain,
                    &chain_b,
                    sample.as_ref().expect("moments resolved above"),
                    &sample_b,
                    r_star,
                    &config,
                )?;
                log::info!("combined fit: c = {}", fit.c);
                meta.insert(
                    "combined".into(),
                    serde_json::json!({
                        "c": json_num(fit.c),
                        "objective": json_num(fit.objective),
                        "cells": fit.grid.populated(),
                        "skipped_a": skip_json(&fit.skipped[0]),
                        "skipped_b": skip_json(&fit.skipped[1]),
                    }),
                );
                files.push((stem_path(out_stem, "combined.csv"), surface_csv(&fit.grid)));
                println!("combined_c = {}", fmt_sig(fit.c));
            }
        }
    }

    for (path, contents) in &files {
        write_atomic(path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    if with_meta {
        let path = stem_path(out_stem, "meta.json");
        let rendered = format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::Value::Object(meta)).expect("static json")
        );
        write_atomic(&path, &rendered)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
