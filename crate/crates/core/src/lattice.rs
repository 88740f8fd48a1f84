//! Recombining one-factor bivariate binomial tree with per-trade
//! transaction costs.
//!
//! Both assets move together on a single risk factor:
//!
//! ```text
//! S_{k+1} = S_k · (1 + μ·Δt ± σ·√Δt)
//! V_{k+1} = V_k · (1 + m·Δt ± v·√Δt)        (same branch for both)
//! ```
//!
//! A trade in `S` over one step is charged the factor
//! `(S_next/S_now)^ρ(S)` with `ρ(S) = c·μ/σ` (and the `V` analogue with
//! `ρ(V) = c·m/v`). Requiring the cost-adjusted two-asset portfolio to
//! replicate a contract in both successor states pins down the hedge
//! ([`solve_hedge`]) and, in the small-step limit, the risk-neutral
//! probabilities of [`crate::model::q_risk_neutral`], under which contracts
//! are priced by backward induction ([`price_contract`]).
//!
//! As Δt → 0 the tree converges weakly to a bivariate geometric Brownian
//! motion driven by one Brownian motion; [`gbm_closed_form`] evaluates the
//! risk-neutral limit law for convergence checks.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{self, AdjustedParams, MarketParams, RiskNeutralProb};

/// Joint `(S, V)` prices at one tree node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointNode {
    /// First-asset price.
    pub s: f64,
    /// Second-asset price.
    pub v: f64,
}

/// Recombining bivariate binomial tree. Level `k` holds `k + 1` joint nodes;
/// node `(k, j)` is reached by `j` up moves.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct BivariateTree {
    s0: f64,
    v0: f64,
    params: MarketParams,
    dt: f64,
    n_steps: usize,
    levels: Vec<Vec<JointNode>>,
}

impl BivariateTree {
    /// Initial first-asset price.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Initial second-asset price.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Market parameters the tree was built from.
    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    /// Time step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps (= number of levels − 1).
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Nodes at level `k` (k + 1 entries).
    pub fn level(&self, k: usize) -> &[JointNode] {
        &self.levels[k]
    }

    /// Node at level `k` after `j` up moves.
    pub fn node(&self, k: usize, j: usize) -> JointNode {
        self.levels[k][j]
    }

    /// Multiplicative factors `(up_s, down_s, up_v, down_v)`.
    pub fn factors(&self) -> (f64, f64, f64, f64) {
        let sdt = self.dt.sqrt();
        let p = &self.params;
        (
            1.0 + p.mu * self.dt + p.sigma * sdt,
            1.0 + p.mu * self.dt - p.sigma * sdt,
            1.0 + p.m * self.dt + p.v * sdt,
            1.0 + p.m * self.dt - p.v * sdt,
        )
    }
}

/// Build the tree with `n` steps of size `dt`.
///
/// Fails with [`Error::NegativePriceStep`] when a down factor
/// `1 + drift·dt − vol·√dt` is not positive (the step is too large for the
/// given volatility), so all node prices stay positive.
pub fn build_tree(
    s0: f64,
    v0: f64,
    params: &MarketParams,
    dt: f64,
    n_steps: usize,
) -> Result<BivariateTree> {
    if !(s0 > 0.0 && v0 > 0.0) {
        return Err(Error::InvalidInput {
            message: format!("initial prices must be positive, got s0={s0}, v0={v0}"),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidInput {
            message: format!("time step must be positive and finite, got {dt}"),
        });
    }
    let sdt = dt.sqrt();
    let down_s = 1.0 + params.mu * dt - params.sigma * sdt;
    let down_v = 1.0 + params.m * dt - params.v * sdt;
    for factor in [down_s, down_v] {
        if factor <= 0.0 {
            return Err(Error::NegativePriceStep { factor, dt });
        }
    }
    let up_s = 1.0 + params.mu * dt + params.sigma * sdt;
    let up_v = 1.0 + params.m * dt + params.v * sdt;

    // node (k, j) = start · up^j · down^(k-j); recombination is structural
    let levels = (0..=n_steps)
        .map(|k| {
            (0..=k)
                .map(|j| JointNode {
                    s: s0 * up_s.powi(j as i32) * down_s.powi((k - j) as i32),
                    v: v0 * up_v.powi(j as i32) * down_v.powi((k - j) as i32),
                })
                .collect()
        })
        .collect();

    Ok(BivariateTree {
        s0,
        v0,
        params: *params,
        dt,
        n_steps,
        levels,
    })
}

/// Terminal payoff `g(S, V)` of a European contract.
#[derive(Clone)]
pub enum Payoff {
    /// `max(S − strike, 0)`.
    Call { strike: f64 },
    /// `max(strike − S, 0)`.
    Put { strike: f64 },
    /// Constant payoff regardless of terminal state.
    Constant(f64),
    /// Arbitrary terminal-value function of the joint state.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Payoff {
    /// Evaluate the payoff at a terminal node.
    pub fn evaluate(&self, s: f64, v: f64) -> f64 {
        match self {
            Payoff::Call { strike } => (s - strike).max(0.0),
            Payoff::Put { strike } => (strike - s).max(0.0),
            Payoff::Constant(value) => *value,
            Payoff::Custom(g) => g(s, v),
        }
    }
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Call { strike } => write!(f, "Call {{ strike: {strike} }}"),
            Payoff::Put { strike } => write!(f, "Put {{ strike: {strike} }}"),
            Payoff::Constant(value) => write!(f, "Constant({value})"),
            Payoff::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Units of each asset held by the one-step replication strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgePosition {
    /// Units of the first asset.
    pub a: f64,
    /// Units of the second asset.
    pub b: f64,
}

impl HedgePosition {
    /// Portfolio value `a·s + b·v`.
    pub fn value(&self, s: f64, v: f64) -> f64 {
        self.a * s + self.b * v
    }
}

/// Discounting applied per step in backward induction.
///
/// The replication argument finances the contract entirely with the two
/// risky assets, so the plain recursion carries no discount factor;
/// [`Discounting::Explicit`] applies `e^{−r·Δt}` per step for cross-checks
/// against standard riskless-rate trees.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Discounting {
    /// Plain recursion `g = Q·g_up + (1 − Q)·g_down`.
    None,
    /// Per-step factor `e^{−r·Δt}` at the given rate.
    Explicit(f64),
}

/// Per-trade cost factor `(price_next / price_now)^rho`.
///
/// Equals 1 for `rho = 0` (frictionless) and for an unmoved price; agrees
/// with the linearised form `1 + rho·ln(price_next/price_now)` to second
/// order in the log return.
pub fn transaction_cost_factor(price_now: f64, price_next: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        return 1.0;
    }
    (price_next / price_now).powf(rho)
}

/// Solve the one-step replication at node `(k, j)` given the contract values
/// `g_up`, `g_down` at the two successors.
///
/// The returned position makes the cost-adjusted portfolio match the payoff
/// in both successor states:
///
/// ```text
/// a·S_next·(S_next/S)^ρ(S) + b·V_next·(V_next/V)^ρ(V) = g_next
/// ```
///
/// for `next ∈ {up, down}`. Its time-`k` value `a·S + b·V` reproduces the
/// risk-neutral expectation of the payoff up to O(Δt^{3/2}).
pub fn solve_hedge(
    tree: &BivariateTree,
    k: usize,
    j: usize,
    g_up: f64,
    g_down: f64,
) -> Result<HedgePosition> {
    if k + 1 > tree.n_steps() || j > k {
        return Err(Error::InvalidInput {
            message: format!(
                "node ({k}, {j}) has no successors in a {}-step tree",
                tree.n_steps()
            ),
        });
    }
    let here = tree.node(k, j);
    let up = tree.node(k + 1, j + 1);
    let down = tree.node(k + 1, j);
    let rho_s = tree.params().rho_s();
    let rho_v = tree.params().rho_v();

    let s_up = up.s * transaction_cost_factor(here.s, up.s, rho_s);
    let v_up = up.v * transaction_cost_factor(here.v, up.v, rho_v);
    let s_down = down.s * transaction_cost_factor(here.s, down.s, rho_s);
    let v_down = down.v * transaction_cost_factor(here.v, down.v, rho_v);

    let det = s_up * v_down - v_up * s_down;
    let scale = (s_up * v_down).abs().max((v_up * s_down).abs());
    if det.abs() < 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularHedge { det, scale });
    }
    Ok(HedgePosition {
        a: (g_up * v_down - g_down * v_up) / det,
        b: (s_up * g_down - s_down * g_up) / det,
    })
}

/// A contract priced on the tree: root value plus the full per-node grid.
#[derive(Debug, Clone)]
pub struct PricedContract {
    /// Value at the root node.
    pub price: f64,
    /// Risk-neutral probabilities used by the recursion.
    pub q: RiskNeutralProb,
    /// `values[k][j]` is the contract value at node `(k, j)`.
    pub values: Vec<Vec<f64>>,
}

/// Price a European contract by backward induction under the risk-neutral
/// probabilities of the tree's market parameters.
pub fn price_contract(
    tree: &BivariateTree,
    payoff: &Payoff,
    discounting: Discounting,
) -> Result<PricedContract> {
    let q = model::q_risk_neutral(tree.params(), tree.dt())?;
    let n = tree.n_steps();
    let step_factor = match discounting {
        Discounting::None => 1.0,
        Discounting::Explicit(rate) => (-rate * tree.dt()).exp(),
    };

    let mut values = vec![Vec::new(); n + 1];
    values[n] = tree
        .level(n)
        .iter()
        .map(|node| payoff.evaluate(node.s, node.v))
        .collect();
    if values[n].iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidInput {
            message: "payoff is not finite on all terminal nodes".into(),
        });
    }
    for k in (0..n).rev() {
        values[k] = (0..=k)
            .map(|j| step_factor * (q.q_up * values[k + 1][j + 1] + q.q_down * values[k + 1][j]))
            .collect();
    }
    Ok(PricedContract {
        price: values[0][0],
        q,
        values,
    })
}

/// Evaluate the closed-form risk-neutral limit law at time `t` from a single
/// standard normal draw `z`:
///
/// ```text
/// S_t = s0 · exp((r* − σ*²/2)·t + σ*·√t·z)
/// V_t = v0 · exp((r* − v*²/2)·t + v*·√t·z)
/// ```
///
/// Both coordinates are driven by the same `z`, preserving the one-factor
/// coupling of the tree.
pub fn gbm_closed_form(s0: f64, v0: f64, a: &AdjustedParams, t: f64, z: f64) -> (f64, f64) {
    let sqrt_t = t.sqrt();
    let s = s0 * ((a.r_star - 0.5 * a.sigma_star * a.sigma_star) * t + a.sigma_star * sqrt_t * z)
        .exp();
    let v = v0 * ((a.r_star - 0.5 * a.v_star * a.v_star) * t + a.v_star * sqrt_t * z).exp();
    (s, v)
}

/// Reproducible standard normal draws.
///
/// The sequence is a pure function of the seed, so Monte Carlo consumers can
/// partition it across threads and still aggregate results that do not
/// depend on the partitioning.
pub fn standard_normal_draws(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| rng.sample(rand_distr::StandardNormal))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(mu: f64, sigma: f64, m: f64, v: f64, c: f64) -> MarketParams {
        MarketParams::new(mu, sigma, m, v, c).unwrap()
    }

    #[test]
    fn one_step_nodes_by_direct_substitution() {
        let p = params(0.0, 0.2, 0.0, 0.1, 0.0);
        let tree = build_tree(100.0, 50.0, &p, 0.01, 1).unwrap();
        assert_abs_diff_eq!(tree.node(1, 1).s, 102.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tree.node(1, 0).s, 98.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tree.node(1, 1).v, 50.5, epsilon = 1e-12);
        assert_abs_diff_eq!(tree.node(1, 0).v, 49.5, epsilon = 1e-12);
    }

    #[test]
    fn tree_recombines() {
        let p = params(0.07, 0.3, 0.02, 0.15, 1.3);
        let tree = build_tree(100.0, 80.0, &p, 0.005, 2).unwrap();
        let (up_s, down_s, _, _) = tree.factors();
        assert_eq!(tree.level(2).len(), 3);
        assert_relative_eq!(
            tree.node(2, 1).s,
            100.0 * up_s * down_s,
            max_relative = 1e-15
        );
    }

    #[test]
    fn one_factor_coupling_moves_both_assets_together() {
        let p = params(0.05, 0.2, 0.03, 0.1, 0.7);
        let tree = build_tree(100.0, 90.0, &p, 0.01, 5).unwrap();
        let (up_s, down_s, up_v, down_v) = tree.factors();
        for k in 0..5 {
            for j in 0..=k {
                let here = tree.node(k, j);
                let up = tree.node(k + 1, j + 1);
                let down = tree.node(k + 1, j);
                assert_relative_eq!(up.s / here.s, up_s, max_relative = 1e-12);
                assert_relative_eq!(up.v / here.v, up_v, max_relative = 1e-12);
                assert_relative_eq!(down.s / here.s, down_s, max_relative = 1e-12);
                assert_relative_eq!(down.v / here.v, down_v, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let p = params(0.0, 0.5, 0.0, 0.1, 0.0);
        // down factor 1 − 0.5·√5 < 0
        let err = build_tree(100.0, 100.0, &p, 5.0, 3).unwrap_err();
        assert!(matches!(err, Error::NegativePriceStep { .. }));
    }

    #[test]
    fn cost_factor_identities() {
        assert_eq!(transaction_cost_factor(100.0, 102.0, 0.0), 1.0);
        assert_eq!(transaction_cost_factor(100.0, 100.0, 0.73), 1.0);
        assert_relative_eq!(
            transaction_cost_factor(100.0, 102.0, 0.5),
            1.02_f64.powf(0.5),
            max_relative = 1e-15
        );
    }

    #[test]
    fn cost_factor_matches_linearised_form_to_second_order() {
        // |e^{ρx} − (1 + ρx)| ≤ (ρx)²·e^{|ρx|}/2 with x the log return
        let rho = 0.8;
        for dt in [1e-2, 1e-3, 1e-4] {
            let ratio = 1.0 + 0.2 * f64::sqrt(dt);
            let x = ratio.ln();
            let exact = transaction_cost_factor(1.0, ratio, rho);
            let linear = 1.0 + rho * x;
            let bound = (rho * x).powi(2) * (rho * x).abs().exp() / 2.0;
            assert!((exact - linear).abs() <= bound * 1.0000001);
        }
    }

    #[test]
    fn asset_replicates_itself() {
        let p = params(0.05, 0.2, 0.03, 0.1, 0.0);
        let tree = build_tree(100.0, 90.0, &p, 0.01, 1).unwrap();
        let h = solve_hedge(&tree, 0, 0, tree.node(1, 1).s, tree.node(1, 0).s).unwrap();
        assert_relative_eq!(h.a, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(h.b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hedge_replicates_exactly_in_both_states() {
        let p = params(0.04, 0.25, -0.01, 0.12, 1.7);
        let tree = build_tree(120.0, 75.0, &p, 0.004, 3).unwrap();
        let (g_up, g_down) = (7.3, 2.1);
        for (k, j) in [(0, 0), (1, 1), (2, 0), (2, 2)] {
            let h = solve_hedge(&tree, k, j, g_up, g_down).unwrap();
            let here = tree.node(k, j);
            let rho_s = p.rho_s();
            let rho_v = p.rho_v();
            for (next, g) in [(tree.node(k + 1, j + 1), g_up), (tree.node(k + 1, j), g_down)] {
                let portfolio = h.a * next.s * transaction_cost_factor(here.s, next.s, rho_s)
                    + h.b * next.v * transaction_cost_factor(here.v, next.v, rho_v);
                assert!(
                    (portfolio - g).abs() <= 1e-10 * g.abs().max(1.0),
                    "residual {} at ({k},{j})",
                    portfolio - g
                );
            }
        }
    }

    #[test]
    fn constant_payoff_discounts_at_the_implied_rate() {
        // Hedge value of a constant payoff K is K/(1 + r*·Δt) + O(Δt²).
        let p = params(0.05, 0.2, 0.03, 0.1, 0.0);
        let r_star = model::adjusted_params(&p).unwrap().r_star;
        let k_payoff = 10.0;
        for dt in [1e-2, 1e-3, 1e-4] {
            let tree = build_tree(100.0, 90.0, &p, dt, 1).unwrap();
            let h = solve_hedge(&tree, 0, 0, k_payoff, k_payoff).unwrap();
            let value = h.value(100.0, 90.0);
            let expected = k_payoff / (1.0 + r_star * dt);
            assert!(
                (value - expected).abs() <= 20.0 * k_payoff * dt * dt,
                "dt={dt}: {} vs {}",
                value,
                expected
            );
        }
    }

    #[test]
    fn identical_assets_make_the_hedge_singular() {
        let p = params(0.05, 0.2, 0.05, 0.2, 0.0);
        let tree = build_tree(100.0, 100.0, &p, 0.01, 1).unwrap();
        assert!(matches!(
            solve_hedge(&tree, 0, 0, 1.0, 2.0),
            Err(Error::SingularHedge { .. })
        ));
    }

    #[test]
    fn unit_payoff_prices_to_one() {
        // μ* < m* here, so q_up > ½ and 1 − q_up is exact; the recursion
        // preserves 1.0 bit-for-bit without discounting.
        let p = params(0.03, 0.2, 0.05, 0.1, 0.0);
        let tree = build_tree(100.0, 90.0, &p, 0.01, 10).unwrap();
        let priced = price_contract(&tree, &Payoff::Constant(1.0), Discounting::None).unwrap();
        assert_eq!(priced.price, 1.0);
    }

    #[test]
    fn call_value_nonincreasing_in_strike() {
        let p = params(0.05, 0.2, 0.03, 0.1, 0.4);
        let tree = build_tree(100.0, 90.0, &p, 0.002, 100).unwrap();
        let mut last = f64::INFINITY;
        for strike in [60.0, 80.0, 100.0, 120.0, 140.0] {
            let priced =
                price_contract(&tree, &Payoff::Call { strike }, Discounting::None).unwrap();
            assert!(priced.price <= last + 1e-12);
            last = priced.price;
        }
    }

    #[test]
    fn pricing_propagates_degenerate_spread() {
        let p = params(0.04, 0.1, 0.02, 0.2, 5.0);
        // σ* = 0.1 + 0.2 = 0.3, v* = 0.2 + 0.1 = 0.3: degenerate
        let tree = build_tree(100.0, 100.0, &p, 0.01, 2).unwrap();
        assert!(matches!(
            price_contract(&tree, &Payoff::Constant(1.0), Discounting::None),
            Err(Error::DegenerateSpread { .. })
        ));
    }

    #[test]
    fn gbm_limit_law_endpoints() {
        let p = params(0.05, 0.2, 0.03, 0.1, 0.5);
        let a = model::adjusted_params(&p).unwrap();
        let (s, v) = gbm_closed_form(100.0, 90.0, &a, 0.0, 1.3);
        assert_eq!((s, v), (100.0, 90.0));
        let (s, v) = gbm_closed_form(100.0, 90.0, &a, 1.0, 0.0);
        assert_relative_eq!(
            s,
            100.0 * (a.r_star - 0.5 * a.sigma_star * a.sigma_star).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            v,
            90.0 * (a.r_star - 0.5 * a.v_star * a.v_star).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = standard_normal_draws(42, 1000);
        let b = standard_normal_draws(42, 1000);
        assert_eq!(a, b);
        let c = standard_normal_draws(43, 1000);
        assert_ne!(a, c);
    }
}
