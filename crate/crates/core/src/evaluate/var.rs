use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{analytic_distribution, linspace, Cdf, ReturnDistribution};
use crate::error::{Error, Result};
use crate::mdp::{induce_mrp, Mdp, Mrp, Policy, RewardKind};
use crate::transform::{sat_case2, sat_for_mrp, simplify_mrp};

/// Default cap on `|Π_D|` for enumeration.
pub const DEFAULT_POLICY_CAP: u128 = 1_000_000;

/// Default number of grid points for a VaR function.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// How a non-DS reward is made evaluable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    /// Apply the state-augmentation transform for the case at hand.
    Transform,
    /// Replace the reward by its conditional expectation.
    Simplify,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Transform => "transform",
            Pipeline::Simplify => "simplify",
        })
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transform" => Ok(Pipeline::Transform),
            "simplify" => Ok(Pipeline::Simplify),
            other => Err(Error::Config(format!(
                "unknown pipeline {other:?} (expected transform or simplify)"
            ))),
        }
    }
}

/// The DS-reward MRP a pipeline evaluates for `mrp`.
pub fn evaluable_mrp(mrp: &Mrp, pipeline: Pipeline) -> Result<Mrp> {
    if mrp.reward().kind() == RewardKind::DS {
        return Ok(mrp.clone());
    }
    match pipeline {
        Pipeline::Simplify => simplify_mrp(mrp),
        Pipeline::Transform => Ok(sat_for_mrp(mrp)?
            .mrp()
            .expect("MRP transforms yield MRPs")
            .clone()),
    }
}

/// DS-reward MRP for `mdp` under `policy`: deterministic policies go through
/// induction and then case 0/1; randomized ones through case 2 (compensated).
pub fn policy_mrp(mdp: &Mdp, policy: &Policy, pipeline: Pipeline) -> Result<Mrp> {
    match (policy, pipeline) {
        (Policy::Randomized(_), Pipeline::Transform) => Ok(sat_case2(mdp, policy, true)?
            .mrp()
            .expect("case 2 yields an MRP")
            .clone()),
        _ => evaluable_mrp(&induce_mrp(mdp, policy)?, pipeline),
    }
}

pub fn policy_distribution(
    mdp: &Mdp,
    policy: &Policy,
    pipeline: Pipeline,
) -> Result<ReturnDistribution> {
    analytic_distribution(&policy_mrp(mdp, policy, pipeline)?)
}

/// Pointwise infimum of return CDFs over a policy set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Index into `policies` attaining the infimum at each grid point.
    pub argmin: Vec<usize>,
    pub policies: Vec<Policy>,
    pub distributions: Vec<ReturnDistribution>,
}

impl VarFunction {
    /// Builds the infimum of `distributions` on `grid`. Ties go to the
    /// lowest policy index.
    pub fn new(
        grid: Vec<f64>,
        policies: Vec<Policy>,
        distributions: Vec<ReturnDistribution>,
    ) -> Result<Self> {
        if distributions.is_empty() {
            return Err(Error::EmptySupport("VaR function over an empty policy set"));
        }
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid must be non-empty and strictly increasing".into()));
        }
        let (values, argmin) = grid
            .iter()
            .map(|&t| {
                distributions
                    .iter()
                    .enumerate()
                    .map(|(i, d)| (d.cdf(t), i))
                    .fold((f64::INFINITY, 0), |best, cur| {
                        if cur.0 < best.0 {
                            cur
                        } else {
                            best
                        }
                    })
            })
            .unzip();
        Ok(VarFunction {
            grid,
            values,
            argmin,
            policies,
            distributions,
        })
    }

    fn interpolate(&self, t: f64) -> f64 {
        let g = &self.grid;
        let i = g.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i == g.len() {
            return self.values[g.len() - 1];
        }
        let (x0, x1) = (g[i - 1], g[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }
}

impl Cdf for VarFunction {
    /// Exact infimum over the stored distributions.
    fn cdf(&self, t: f64) -> f64 {
        self.distributions
            .iter()
            .map(|d| d.cdf(t))
            .fold(f64::INFINITY, f64::min)
    }

    fn cdf_left(&self, t: f64) -> f64 {
        self.distributions
            .iter()
            .map(|d| d.cdf_left(t))
            .fold(f64::INFINITY, f64::min)
    }

    fn grid_points(&self) -> Vec<f64> {
        self.grid.clone()
    }

    fn jump_points(&self) -> Vec<f64> {
        self.distributions.iter().flat_map(|d| d.jump_points()).collect()
    }
}

/// Default grid: `points` values spanning `[min v − 4√max ψ, max v + 4√max ψ]`
/// across all components of `distributions`.
pub fn default_grid(distributions: &[ReturnDistribution], points: usize) -> Result<Vec<f64>> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut max_var = 0.0_f64;
    for d in distributions {
        match d {
            ReturnDistribution::Analytic { components } => {
                for c in components {
                    lo = lo.min(c.mean);
                    hi = hi.max(c.mean);
                    max_var = max_var.max(c.variance);
                }
            }
            ReturnDistribution::Empirical { .. } => {
                let (a, b) = d.span(0.0);
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::EmptySupport("no distributions to span a grid"));
    }
    let pad = 4.0 * max_var.sqrt();
    let (mut lo, mut hi) = (lo - pad, hi + pad);
    if hi <= lo {
        lo -= 1.0;
        hi += 1.0;
    }
    Ok(linspace(lo, hi, points.max(2)))
}

/// Grid choice for [`var_function`].
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// [`default_grid`] with this many points.
    Auto(usize),
    Explicit(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto(DEFAULT_GRID_POINTS)
    }
}

/// Analytic return distributions for every deterministic policy of `mdp`.
pub fn deterministic_policy_distributions(
    mdp: &Mdp,
    pipeline: Pipeline,
    cap: u128,
) -> Result<(Vec<Policy>, Vec<ReturnDistribution>)> {
    let policies = Policy::enumerate_deterministic(mdp, cap)?;
    let distributions = policies
        .par_iter()
        .map(|p| policy_distribution(mdp, p, pipeline))
        .collect::<Result<Vec<_>>>()?;
    Ok((policies, distributions))
}

/// VaR function over the deterministic policy space of `mdp`.
pub fn var_function(mdp: &Mdp, grid: &GridSpec, pipeline: Pipeline, cap: u128) -> Result<VarFunction> {
    let (policies, distributions) = deterministic_policy_distributions(mdp, pipeline, cap)?;
    let grid = match grid {
        GridSpec::Auto(points) => default_grid(&distributions, *points)?,
        GridSpec::Explicit(g) => g.clone(),
    };
    VarFunction::new(grid, policies, distributions)
}

/// Optimal threshold `ρ_α = sup{τ : F(τ) ≤ 1 − α}` on the grid, taking the
/// rightmost crossing and interpolating linearly between grid points.
pub fn var_threshold(vf: &VarFunction, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            min: 0.0,
            max: 1.0,
        });
    }
    let target = 1.0 - alpha;
    let g = &vf.grid;
    let f = &vf.values;
    let last = g.len() - 1;
    // values are non-decreasing, so this is the rightmost point with F ≤ target
    let count = f.partition_point(|&v| v <= target);
    if count == 0 {
        // F(grid[0]) > 1 − α: achievable α lie in [1 − F(last), 1 − F(first)]
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            min: 1.0 - f[last],
            max: 1.0 - f[0],
        });
    }
    let i = count - 1;
    if i == last {
        return Ok(g[last]);
    }
    let (f0, f1) = (f[i], f[i + 1]);
    if f1 == f0 {
        return Ok(g[i]);
    }
    Ok(g[i] + (target - f0) / (f1 - f0) * (g[i + 1] - g[i]))
}

/// Optimal quantile `η_τ = 1 − F(τ)`, with `F` interpolated on the grid.
pub fn var_quantile(vf: &VarFunction, tau: f64) -> Result<f64> {
    let (lo, hi) = (vf.grid[0], vf.grid[vf.grid.len() - 1]);
    if !(lo..=hi).contains(&tau) {
        return Err(Error::OutOfRange {
            what: "tau",
            value: tau,
            min: lo,
            max: hi,
        });
    }
    Ok(1.0 - vf.interpolate(tau))
}
