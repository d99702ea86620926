use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{trajectory_rng, Sampler};
use crate::error::{Error, Result};
use crate::evaluate::{linspace, Cdf, ReturnDistribution, DEFAULT_GRID_POINTS};
use crate::mdp::Mrp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub horizon: usize,
    pub trajectories_per_batch: usize,
    pub batches: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 1000,
            trajectories_per_batch: 200,
            batches: 50,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("horizon", self.horizon),
            ("trajectories_per_batch", self.trajectories_per_batch),
            ("batches", self.batches),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn total_trajectories(&self) -> usize {
        self.batches * self.trajectories_per_batch
    }

    /// `γ^horizon · r_max / (1 − γ)`: bound on the gap between the full and
    /// the truncated return.
    pub fn truncation_bound(&self, mrp: &Mrp) -> f64 {
        let r_max = mrp.reward().max_abs(mrp.kernel());
        let gamma = mrp.gamma();
        gamma.powf(self.horizon as f64) * r_max / (1.0 - gamma)
    }
}

/// Sampled returns grouped by batch, with the batch-averaged CDF and its
/// across-batch standard deviation on an evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub config: SimConfig,
    /// Sorted returns of each batch.
    pub batches: Vec<Vec<f64>>,
    pub grid: Vec<f64>,
    pub mean_cdf: Vec<f64>,
    /// Population standard deviation of the batch CDFs at each grid point.
    pub std_cdf: Vec<f64>,
    pub truncation_bound: f64,
}

impl EmpiricalDistribution {
    /// All samples pooled. With equal batch sizes its CDF is the average of
    /// the batch CDFs.
    pub fn pooled(&self) -> ReturnDistribution {
        ReturnDistribution::Empirical {
            samples: {
                let mut s: Vec<f64> = self.batches.concat();
                s.sort_by(f64::total_cmp);
                s
            },
            batches: self.config.batches,
            per_batch: self.config.trajectories_per_batch,
        }
    }
}

fn step_cdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&s| s <= t) as f64 / sorted.len() as f64
}

fn sample_batches(mrp: &Mrp, cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    cfg.check()?;
    let sampler = Sampler::new(mrp);
    let per = cfg.trajectories_per_batch;
    let returns: Vec<f64> = (0..cfg.total_trajectories())
        .into_par_iter()
        .map(|i| sampler.sample(cfg.horizon, &mut trajectory_rng(cfg.seed, i as u64)))
        .collect();
    Ok(returns
        .chunks(per)
        .map(|c| {
            let mut b = c.to_vec();
            b.sort_by(f64::total_cmp);
            b
        })
        .collect())
}

/// Empirical distribution with the band evaluated on `DEFAULT_GRID_POINTS`
/// points spanning the sample range.
pub fn empirical_distribution(mrp: &Mrp, cfg: &SimConfig) -> Result<EmpiricalDistribution> {
    let batches = sample_batches(mrp, cfg)?;
    let (lo, hi) = batches.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
        (lo.min(b[0]), hi.max(b[b.len() - 1]))
    });
    let grid = if hi > lo {
        linspace(lo, hi, DEFAULT_GRID_POINTS)
    } else {
        vec![lo - 1.0, lo, lo + 1.0]
    };
    Ok(with_band(mrp, cfg, batches, grid))
}

/// Empirical distribution with the band evaluated on `grid`.
pub fn empirical_distribution_on(
    mrp: &Mrp,
    cfg: &SimConfig,
    grid: Vec<f64>,
) -> Result<EmpiricalDistribution> {
    Ok(with_band(mrp, cfg, sample_batches(mrp, cfg)?, grid))
}

fn with_band(mrp: &Mrp, cfg: &SimConfig, batches: Vec<Vec<f64>>, grid: Vec<f64>) -> EmpiricalDistribution {
    let k = batches.len() as f64;
    let (mean_cdf, std_cdf) = grid
        .iter()
        .map(|&t| {
            let vals: Vec<f64> = batches.iter().map(|b| step_cdf(b, t)).collect();
            let mean = vals.iter().sum::<f64>() / k;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
            (mean.clamp(0.0, 1.0), var.sqrt())
        })
        .unzip();
    EmpiricalDistribution {
        config: *cfg,
        batches,
        grid,
        mean_cdf,
        std_cdf,
        truncation_bound: cfg.truncation_bound(mrp),
    }
}

impl Cdf for EmpiricalDistribution {
    fn cdf(&self, t: f64) -> f64 {
        self.batches.iter().map(|b| step_cdf(b, t)).sum::<f64>() / self.batches.len() as f64
    }

    fn cdf_left(&self, t: f64) -> f64 {
        self.batches
            .iter()
            .map(|b| b.partition_point(|&s| s < t) as f64 / b.len() as f64)
            .sum::<f64>()
            / self.batches.len() as f64
    }

    fn grid_points(&self) -> Vec<f64> {
        self.grid.clone()
    }

    fn jump_points(&self) -> Vec<f64> {
        let mut j = self.batches.concat();
        j.sort_by(f64::total_cmp);
        j.dedup();
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{Pmf, RewardFunction, StateSpace};

    fn coin() -> Mrp {
        Mrp::new(
            StateSpace::indexed(2),
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            RewardFunction::StochasticState(vec![Pmf::new([(0.0, 0.5), (1.0, 0.5)]), Pmf::point(2.0)]),
            vec![1.0, 0.0],
            0.8,
        )
        .unwrap()
    }

    fn cfg(batches: usize) -> SimConfig {
        SimConfig {
            horizon: 20,
            trajectories_per_batch: 30,
            batches,
            seed: 11,
        }
    }

    #[test]
    fn single_batch_has_zero_band() {
        let e = empirical_distribution(&coin(), &cfg(1)).unwrap();
        assert!(e.std_cdf.iter().all(|&s| s == 0.0));
        for (t, m) in e.grid.iter().zip(&e.mean_cdf) {
            assert_eq!(*m, step_cdf(&e.batches[0], *t));
        }
    }

    #[test]
    fn reproducible_bit_for_bit() {
        let a = empirical_distribution(&coin(), &cfg(4)).unwrap();
        let b = empirical_distribution(&coin(), &cfg(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn point_mass_return_is_unit_step() {
        let mrp = Mrp::new(
            StateSpace::indexed(1),
            vec![vec![1.0]],
            RewardFunction::DeterministicState(vec![1.0]),
            vec![1.0],
            0.5,
        )
        .unwrap();
        let e = empirical_distribution(&mrp, &cfg(3)).unwrap();
        let v = e.batches[0][0];
        assert!(e.batches.iter().flatten().all(|&s| s == v));
        assert_eq!(e.cdf(v), 1.0);
        assert_eq!(e.cdf_left(v), 0.0);
    }

    #[test]
    fn pooled_cdf_is_batch_average() {
        let e = empirical_distribution(&coin(), &cfg(5)).unwrap();
        let pooled = e.pooled();
        for &t in &e.grid {
            assert!((pooled.cdf(t) - e.cdf(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sizes_are_rejected() {
        let mut c = cfg(1);
        c.horizon = 0;
        assert!(matches!(empirical_distribution(&coin(), &c), Err(Error::Config(_))));
    }
}
