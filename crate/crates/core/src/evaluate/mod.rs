//! Exact policy evaluation (return mean and variance), normal-approximation
//! return distributions, and VaR functions over deterministic policies.

mod distribution;
pub mod linalg;
mod sobel;
mod var;

pub use distribution::{analytic_distribution, linspace, Cdf, NormalComponent, ReturnDistribution};
pub use sobel::{occupancy_mean, sobel, SobelResult, RESIDUAL_TOL, VARIANCE_SLACK};
pub use var::{
    default_grid, deterministic_policy_distributions, evaluable_mrp, policy_distribution,
    policy_mrp, var_function, var_quantile, var_threshold, GridSpec, Pipeline, VarFunction,
    DEFAULT_GRID_POINTS, DEFAULT_POLICY_CAP,
};
