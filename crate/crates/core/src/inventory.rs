//! Single-product stochastic inventory control: stock `x ∈ {0..M}`, order
//! `a ∈ {0..M−x}`, demand `D`, next stock `max(x + a − D, 0)`, and reward
//! `f(x + a − y) − o(a) − m(x)` with `o(a) = (W + c·a)·1[a > 0]`.
//!
//! Revenue is paid on units actually sold, `x + a − y`; demand beyond stock
//! is lost. This equals revenue on `min(D, x + a)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{
    analytic_distribution, default_grid, deterministic_policy_distributions, linspace, sobel,
    Pipeline, ReturnDistribution, VarFunction, DEFAULT_GRID_POINTS, DEFAULT_POLICY_CAP,
};
use crate::export::{self, ArtifactWriter, RunManifest};
use crate::mdp::{induce_mrp, io, validate_mdp, Mdp, Policy, RewardFunction, StateSpace, PROB_TOL};
use crate::simulate::{empirical_distribution_on, ks_distance, SimConfig};
use crate::transform::{case3_state_bound, sat_case0, sat_case3, simplify_mrp};
use crate::transform::io::sat_to_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InventoryParams {
    pub capacity: usize,
    pub fixed_order_cost: f64,
    pub unit_order_cost: f64,
    pub maintenance_cost: f64,
    pub price: f64,
    /// `P(D = d)` for `d = 0..=capacity`.
    pub demand: Vec<f64>,
    pub initial: Vec<f64>,
    pub gamma: f64,
}

impl Default for InventoryParams {
    fn default() -> Self {
        InventoryParams {
            capacity: 2,
            fixed_order_cost: 4.0,
            unit_order_cost: 2.0,
            maintenance_cost: 1.0,
            price: 8.0,
            demand: vec![0.25, 0.5, 0.25],
            initial: vec![1.0, 0.0, 0.0],
            gamma: 0.95,
        }
    }
}

impl InventoryParams {
    pub fn check(&self) -> Result<()> {
        let m = self.capacity;
        if m < 1 {
            return Err(Error::Config("capacity must be at least 1".into()));
        }
        for (name, pmf) in [("demand", &self.demand), ("initial", &self.initial)] {
            if pmf.len() != m + 1 {
                return Err(Error::Config(format!("{name} needs {} entries", m + 1)));
            }
            if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0))
                || (pmf.iter().sum::<f64>() - 1.0).abs() > PROB_TOL
            {
                return Err(Error::Config(format!("{name} is not a probability vector")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma {} is outside (0, 1)", self.gamma)));
        }
        Ok(())
    }

    pub fn order_cost(&self, a: usize) -> f64 {
        if a > 0 {
            self.fixed_order_cost + self.unit_order_cost * a as f64
        } else {
            0.0
        }
    }

    /// `r(x, a, y)`.
    pub fn reward(&self, x: usize, a: usize, y: usize) -> f64 {
        self.price * (x + a - y) as f64 - self.order_cost(a) - self.maintenance_cost * x as f64
    }
}

pub fn build_inventory_mdp(params: &InventoryParams) -> Result<Mdp> {
    params.check()?;
    let m = params.capacity;
    let n = m + 1;
    let actions: Vec<Vec<usize>> = (0..n).map(|x| (0..n - x).collect()).collect();
    let mut kernel = Vec::new();
    let mut reward = Vec::new();
    for (x, set) in actions.iter().enumerate() {
        for &a in set {
            let mut row = vec![0.0; n];
            for (d, &p) in params.demand.iter().enumerate() {
                row[(x + a).saturating_sub(d)] += p;
            }
            kernel.push(row);
            // y > x + a is unreachable; its entry is never read
            reward.push((0..n).map(|y| if y <= x + a { params.reward(x, a, y) } else { 0.0 }).collect());
        }
    }
    Mdp::new(
        StateSpace::indexed(n),
        (0..n).map(|a| a.to_string()).collect(),
        actions,
        kernel,
        RewardFunction::DeterministicTransition(reward),
        params.initial.clone(),
        params.gamma,
    )
}

/// The reference policy for the end-to-end comparison: order up to capacity.
pub fn order_up_to_policy(params: &InventoryParams) -> Policy {
    Policy::Deterministic((0..=params.capacity).map(|x| params.capacity - x).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaperConfig {
    pub params: InventoryParams,
    /// Defaults to order-up-to-capacity.
    pub policy: Option<Vec<usize>>,
    pub sim: SimConfig,
    /// Points of the grid shared by the three CDF files.
    pub cdf_grid_points: usize,
    pub var_grid_points: usize,
}

impl Default for PaperConfig {
    fn default() -> Self {
        PaperConfig {
            params: InventoryParams::default(),
            policy: None,
            sim: SimConfig {
                seed: 20_240_101,
                ..SimConfig::default()
            },
            cdf_grid_points: 1001,
            var_grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRow {
    pub policy: Vec<usize>,
    pub mean_transformed: f64,
    pub mean_simplified: f64,
    pub variance_transformed: f64,
    pub variance_simplified: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperSummary {
    pub policy: Vec<usize>,
    pub gamma: f64,
    pub ks_simplified_empirical: f64,
    pub ks_transformed_empirical: f64,
    pub ks_var_functions: f64,
    pub mean_transformed: f64,
    pub variance_transformed: f64,
    pub mean_simplified: f64,
    pub variance_simplified: f64,
    pub mean_empirical: f64,
    pub variance_empirical: f64,
    pub transformed_states: usize,
    pub case3_states: usize,
    pub case3_bound: usize,
    pub truncation_bound: f64,
    pub policies: Vec<PolicyRow>,
}

/// Everything the reconstruction computes, for callers that want more than
/// the files.
pub struct PaperReport {
    pub summary: PaperSummary,
    pub transformed: ReturnDistribution,
    pub simplified: ReturnDistribution,
    pub empirical: crate::simulate::EmpiricalDistribution,
    pub var_transformed: VarFunction,
    pub var_simplified: VarFunction,
}

fn deterministic_actions(p: &Policy) -> Vec<usize> {
    match p {
        Policy::Deterministic(a) => a.clone(),
        Policy::Randomized(_) => unreachable!("enumeration yields deterministic policies"),
    }
}

/// Runs the full comparison for one policy and all deterministic policies.
pub fn paper_report(cfg: &PaperConfig) -> Result<PaperReport> {
    let mdp = build_inventory_mdp(&cfg.params)?;
    let violations = validate_mdp(&mdp);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidModel(v.to_string()));
    }
    let policy = match &cfg.policy {
        Some(a) => Policy::Deterministic(a.clone()),
        None => order_up_to_policy(&cfg.params),
    };
    let mrp = induce_mrp(&mdp, &policy)?;
    let sat = sat_case0(&mrp)?;
    let sat_mrp = sat.mrp().expect("case 0 yields an MRP");
    let simple_mrp = simplify_mrp(&mrp)?;

    let transformed = analytic_distribution(sat_mrp)?;
    let simplified = analytic_distribution(&simple_mrp)?;

    // sampled on the original reward process, not on either model of it
    let (lo_a, hi_a) = transformed.span(5.0);
    let (lo_b, hi_b) = simplified.span(5.0);
    let grid = linspace(lo_a.min(lo_b), hi_a.max(hi_b), cfg.cdf_grid_points.max(2));
    let empirical = empirical_distribution_on(&mrp, &cfg.sim, grid)?;

    let ks_simplified_empirical = ks_distance(&simplified, &empirical)?;
    let ks_transformed_empirical = ks_distance(&transformed, &empirical)?;

    let (policies, dists_t) = deterministic_policy_distributions(&mdp, Pipeline::Transform, DEFAULT_POLICY_CAP)?;
    let (_, dists_s) = deterministic_policy_distributions(&mdp, Pipeline::Simplify, DEFAULT_POLICY_CAP)?;
    let all: Vec<ReturnDistribution> = dists_t.iter().chain(&dists_s).cloned().collect();
    let var_grid = default_grid(&all, cfg.var_grid_points)?;
    let var_transformed = VarFunction::new(var_grid.clone(), policies.clone(), dists_t)?;
    let var_simplified = VarFunction::new(var_grid, policies.clone(), dists_s)?;
    let ks_var_functions = ks_distance(&var_transformed, &var_simplified)?;

    let rows = policies
        .iter()
        .enumerate()
        .map(|(i, p)| PolicyRow {
            policy: deterministic_actions(p),
            mean_transformed: var_transformed.distributions[i].mean(),
            mean_simplified: var_simplified.distributions[i].mean(),
            variance_transformed: var_transformed.distributions[i].variance(),
            variance_simplified: var_simplified.distributions[i].variance(),
        })
        .collect();

    let case3 = sat_case3(&mdp, true)?;
    let pooled = empirical.pooled();
    let s = sobel(sat_mrp)?;
    let summary = PaperSummary {
        policy: deterministic_actions(&policy),
        gamma: mdp.gamma(),
        ks_simplified_empirical,
        ks_transformed_empirical,
        ks_var_functions,
        mean_transformed: s.mean(sat_mrp.initial()),
        variance_transformed: s.variance(sat_mrp.initial()),
        mean_simplified: simplified.mean(),
        variance_simplified: simplified.variance(),
        mean_empirical: pooled.mean(),
        variance_empirical: pooled.variance(),
        transformed_states: sat_mrp.n_states(),
        case3_states: case3.state_map.len(),
        case3_bound: case3_state_bound(&mdp),
        truncation_bound: empirical.truncation_bound,
        policies: rows,
    };
    Ok(PaperReport {
        summary,
        transformed,
        simplified,
        empirical,
        var_transformed,
        var_simplified,
    })
}

/// Writes model.json, transformed.json, cdf_transformed.csv,
/// cdf_simplified.csv, cdf_empirical.csv, var_functions.csv, summary.json and
/// manifest.json into `outdir`. No timestamps or host data are recorded, so
/// reruns are byte-identical.
pub fn paper_pipeline(outdir: impl AsRef<Path>, cfg: &PaperConfig) -> Result<PaperReport> {
    let report = paper_report(cfg)?;
    let mdp = build_inventory_mdp(&cfg.params)?;
    let mrp = induce_mrp(&mdp, &Policy::Deterministic(report.summary.policy.clone()))?;
    let sat = sat_case0(&mrp)?;

    let manifest = RunManifest::new("paper", Vec::new(), Some(cfg.sim.seed), serde_json::to_value(cfg)?);
    let mut w = ArtifactWriter::create(outdir, manifest)?;
    w.text("model.json", "json", &io::model_to_json(&mdp.clone().into()))?;
    w.text("transformed.json", "json", &sat_to_json(&sat))?;
    let grid = &report.empirical.grid;
    w.text("cdf_transformed.csv", "cdf", &export::cdf_csv(&report.transformed, grid)?)?;
    w.text("cdf_simplified.csv", "cdf", &export::cdf_csv(&report.simplified, grid)?)?;
    w.text("cdf_empirical.csv", "empirical_cdf", &export::empirical_csv(&report.empirical)?)?;
    w.text(
        "var_functions.csv",
        "var_functions",
        &export::var_functions_csv(&report.var_transformed, &report.var_simplified, Some(&mdp))?,
    )?;
    w.json("summary.json", &report.summary)?;
    w.finish()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_rows_follow_demand() {
        let p = InventoryParams::default();
        let mdp = build_inventory_mdp(&p).unwrap();
        assert_eq!(mdp.transition(0, 0), &[1.0, 0.0, 0.0]);
        assert_eq!(mdp.transition(0, 2), &[0.25, 0.5, 0.25]);
        assert_eq!(mdp.transition(1, 0), &[0.75, 0.25, 0.0]);
        assert!(validate_mdp(&mdp).is_empty());
    }

    #[test]
    fn zero_order_has_no_order_cost() {
        let p = InventoryParams::default();
        for x in 0..=2 {
            for y in 0..=x {
                assert_eq!(p.reward(x, 0, y), 8.0 * (x - y) as f64 - x as f64);
            }
        }
        // zero demand: r(x, a, x + a) = −o(a) − m(x)
        assert_eq!(p.reward(0, 2, 2), -8.0);
        assert_eq!(p.reward(1, 1, 2), -6.0 - 1.0);
    }

    #[test]
    fn params_are_checked() {
        let p = InventoryParams {
            demand: vec![0.5, 0.5],
            ..InventoryParams::default()
        };
        assert!(matches!(build_inventory_mdp(&p), Err(Error::Config(_))));
    }

    #[test]
    fn order_up_to_is_two_one_zero() {
        assert_eq!(
            order_up_to_policy(&InventoryParams::default()),
            Policy::Deterministic(vec![2, 1, 0])
        );
    }
}
