//! Seeded Monte Carlo return sampling, empirical return distributions with
//! batch error bands, the Kolmogorov–Smirnov distance, and an exact
//! truncated-return oracle.
//!
//! Random streams: trajectory `i` (counting across batches, `i = batch ·
//! trajectories_per_batch + k`) uses `ChaCha8Rng::seed_from_u64(seed)` with
//! stream `i`. Each step draws the next state and then, for stochastic
//! rewards, the reward value, each from one `f64` in `[0, 1)`. Results do not
//! depend on thread scheduling.

mod empirical;
mod ks;
mod oracle;
mod sampler;

pub use empirical::{empirical_distribution, empirical_distribution_on, EmpiricalDistribution, SimConfig};
pub use ks::ks_distance;
pub use oracle::{brute_force_return_pmf, brute_force_return_pmf_policy, merge_atoms, ATOM_MERGE_TOL};
pub use sampler::{sample_return, trajectory_rng, Sampler};
