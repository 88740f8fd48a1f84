//! `arbcost price`: lattice pricing of one European contract.

use std::path::PathBuf;

use arbcost::lattice::{self, Discounting, Payoff};
use arbcost::model::{self, MarketParams};
use clap::Args;

use crate::commands::emit;
use crate::config::{pick, require, resolve_grid, CliError, CliResult, FileConfig};
use crate::output::{fmt_sig, json_num, write_atomic};
use crate::CommonArgs;

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Drift of the first asset per unit time.
    #[arg(long)]
    mu: Option<f64>,
    /// Volatility of the first asset.
    #[arg(long)]
    sigma: Option<f64>,
    /// Drift of the second asset.
    #[arg(long)]
    m: Option<f64>,
    /// Volatility of the second asset.
    #[arg(long)]
    v: Option<f64>,
    /// Arbitrage-cost coefficient.
    #[arg(long)]
    c: Option<f64>,

    /// Initial first-asset price.
    #[arg(long)]
    s0: Option<f64>,
    /// Initial second-asset price.
    #[arg(long)]
    v0: Option<f64>,
    /// Time step (give exactly two of dt/steps/horizon).
    #[arg(long)]
    dt: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Total horizon in time units.
    #[arg(long)]
    horizon: Option<f64>,

    /// Payoff kind: call, put or constant.
    #[arg(long, value_parser = ["call", "put", "constant"])]
    payoff: Option<String>,
    /// Strike for call/put payoffs.
    #[arg(long)]
    strike: Option<f64>,
    /// Value for the constant payoff.
    #[arg(long)]
    value: Option<f64>,

    /// Discount the recursion at this rate per step; omit for the plain
    /// undiscounted recursion.
    #[arg(long)]
    discount: Option<f64>,
    /// Write the per-node value grid as CSV to this path.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

pub fn run(args: &PriceArgs, file: &FileConfig) -> CliResult<()> {
    crate::commands::note_seed(args.common.seed, file.common.seed);
    let params = MarketParams::new(
        require(&args.mu, &file.params.mu, "mu")?,
        require(&args.sigma, &file.params.sigma, "sigma")?,
        require(&args.m, &file.params.m, "m")?,
        require(&args.v, &file.params.v, "v")?,
        require(&args.c, &file.params.c, "c")?,
    )?;
    let s0 = require(&args.s0, &file.price.s0, "s0")?;
    let v0 = require(&args.v0, &file.price.v0, "v0")?;
    let (dt, steps) = resolve_grid(
        pick(&args.dt, &file.price.dt),
        pick(&args.steps, &file.price.steps),
        pick(&args.horizon, &file.price.horizon),
    )?;
    let payoff = match require(&args.payoff, &file.price.payoff, "payoff")?.as_str() {
        "call" => Payoff::Call {
            strike: require(&args.strike, &file.price.strike, "strike")?,
        },
        "put" => Payoff::Put {
            strike: require(&args.strike, &file.price.strike, "strike")?,
        },
        "constant" => Payoff::Constant(require(&args.value, &file.price.value, "value")?),
        other => return Err(CliError::Config(format!("unknown payoff kind {other:?}"))),
    };
    let discounting = match pick(&args.discount, &file.price.discount) {
        Some(rate) => Discounting::Explicit(rate),
        None => Discounting::None,
    };
    let grid_out = pick(&args.grid_out, &file.price.grid_out);
    let format = pick(&args.common.format, &file.common.format).unwrap_or_else(|| "csv".into());

    let adjusted = model::adjusted_params(&params)?;
    let tree = lattice::build_tree(s0, v0, &params, dt, steps)?;
    let priced = lattice::price_contract(&tree, &payoff, discounting)?;
    log::info!(
        "priced {payoff:?} on a {steps}-step tree (dt = {dt}): {}",
        priced.price
    );

    let report = if format == "json" {
        let json = serde_json::json!({
            "price": json_num(priced.price),
            "q_up": json_num(priced.q.q_up),
            "q_down": json_num(priced.q.q_down),
            "dt": json_num(dt),
            "steps": steps,
            "adjusted": {
                "mu_star": json_num(adjusted.mu_star),
                "m_star": json_num(adjusted.m_star),
                "sigma_star": json_num(adjusted.sigma_star),
                "v_star": json_num(adjusted.v_star),
                "r_star": json_num(adjusted.r_star),
                "theta_star": json_num(adjusted.theta_star),
            },
        });
        format!("{}\n", serde_json::to_string_pretty(&json).expect("static json"))
    } else {
        let mut text = String::new();
        for (key, value) in [
            ("price", priced.price),
            ("q_up", priced.q.q_up),
            ("q_down", priced.q.q_down),
            ("dt", dt),
            ("mu_star", adjusted.mu_star),
            ("m_star", adjusted.m_star),
            ("sigma_star", adjusted.sigma_star),
            ("v_star", adjusted.v_star),
            ("r_star", adjusted.r_star),
            ("theta_star", adjusted.theta_star),
        ] {
            text.push_str(&format!("{key} = {}\n", fmt_sig(value)));
        }
        text.push_str(&format!("steps = {steps}\n"));
        text
    };

    if let Some(path) = grid_out {
        let mut csv = String::from("step,node,s,v,value\n");
        for (k, level) in priced.values.iter().enumerate() {
            for (j, value) in level.iter().enumerate() {
                let node = tree.node(k, j);
                csv.push_str(&format!(
                    "{k},{j},{},{},{}\n",
                    fmt_sig(node.s),
                    fmt_sig(node.v),
                    fmt_sig(*value)
                ));
            }
        }
        write_atomic(&path, &csv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    emit(args.common.out.as_deref().or(file.common.out.as_deref()), &report)
}
