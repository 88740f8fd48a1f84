//! `arbcost rfr-series`: rolling-window implied-rate series from two price
//! histories at a fixed cost coefficient.

use std::fs::File;
use std::path::PathBuf;

use arbcost::marketdata::{self, Smoothing};
use clap::Args;

use crate::commands::emit;
use crate::config::{check_exists, pick, require, CliError, CliResult, FileConfig};
use crate::output::fmt_sig;
use crate::CommonArgs;

#[derive(Debug, Args)]
pub struct RfrArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Price history CSV of the first asset.
    #[arg(long)]
    prices_s: Option<PathBuf>,
    /// Price history CSV of the second asset.
    #[arg(long)]
    prices_v: Option<PathBuf>,
    /// Arbitrage-cost coefficient applied to every window.
    #[arg(long)]
    c: Option<f64>,
    /// Window size in returns (defaults to 252).
    #[arg(long)]
    window: Option<usize>,
    /// Smoothing: "none" or a trailing moving-average width.
    #[arg(long)]
    smoothing: Option<String>,
}

fn parse_smoothing(raw: Option<String>) -> CliResult<Smoothing> {
    match raw.as_deref() {
        None | Some("none") => Ok(Smoothing::None),
        Some(width) => width
            .parse::<usize>()
            .ok()
            .filter(|w| *w > 0)
            .map(Smoothing::MovingAverage)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "smoothing must be \"none\" or a positive width, got {width:?}"
                ))
            }),
    }
}

pub fn run(args: &RfrArgs, file: &FileConfig) -> CliResult<()> {
    crate::commands::note_seed(args.common.seed, file.common.seed);
    let path_s = require(&args.prices_s, &file.series.prices_s, "prices-s")?;
    let path_v = require(&args.prices_v, &file.series.prices_v, "prices-v")?;
    let c = require(&args.c, &file.series.c, "c")?;
    let window = pick(&args.window, &file.series.window).unwrap_or(252);
    let smoothing = parse_smoothing(pick(&args.smoothing, &file.series.smoothing))?;
    check_exists(&path_s)?;
    check_exists(&path_v)?;

    let open = |path: &std::path::Path| {
        File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
    };
    let series_s = marketdata::load_prices(
        open(&path_s)?,
        path_s.file_stem().and_then(|s| s.to_str()).unwrap_or(""),
    )?;
    let series_v = marketdata::load_prices(
        open(&path_v)?,
        path_v.file_stem().and_then(|s| s.to_str()).unwrap_or(""),
    )?;
    log::info!(
        "rolling {}-return windows over {} / {} prices",
        window,
        series_s.len(),
        series_v.len()
    );

    let rolled = marketdata::rolling_params(&series_s, &series_v, window)?;
    let series = marketdata::rstar_series(&rolled, c, smoothing)?;

    let mut csv = String::from("date,r_star,degenerate_flag\n");
    for point in &series.points {
        match point.r_star {
            Some(r) => csv.push_str(&format!("{},{},0\n", point.date, fmt_sig(r))),
            None => csv.push_str(&format!("{},,1\n", point.date)),
        }
    }
    emit(args.common.out.as_deref().or(file.common.out.as_deref()), &csv)
}
