use serde::{Deserialize, Serialize};
use libm::erfc;

use super::sobel::sobel;
use crate::error::{Error, Result};
use crate::mdp::Mrp;

/// Anything that can be evaluated as a cumulative distribution function.
pub trait Cdf {
    /// `F(t) = P(Φ ≤ t)`.
    fn cdf(&self, t: f64) -> f64;

    /// Left limit `F(t−) = P(Φ < t)`; equals `cdf` for continuous laws.
    fn cdf_left(&self, t: f64) -> f64 {
        self.cdf(t)
    }

    /// Evaluation points at which this CDF is represented or changes shape.
    fn grid_points(&self) -> Vec<f64>;

    /// Points at which the CDF jumps.
    fn jump_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// One normal component of a mixture: start-state weight, mean, variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl NormalComponent {
    pub fn cdf(&self, t: f64) -> f64 {
        if self.variance > 0.0 {
            let z = (t - self.mean) / self.variance.sqrt();
            0.5 * erfc(-z / std::f64::consts::SQRT_2)
        } else if t >= self.mean {
            1.0
        } else {
            0.0
        }
    }

    fn cdf_left(&self, t: f64) -> f64 {
        if self.variance > 0.0 {
            self.cdf(t)
        } else if t > self.mean {
            1.0
        } else {
            0.0
        }
    }
}

/// Return distribution estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReturnDistribution {
    /// Mixture of normals, one per start state in the support of `μ`.
    Analytic { components: Vec<NormalComponent> },
    /// Sorted return samples.
    Empirical {
        samples: Vec<f64>,
        batches: usize,
        per_batch: usize,
    },
}

/// Points per analytic grid.
const ANALYTIC_GRID: usize = 2001;

impl ReturnDistribution {
    pub fn empirical(mut samples: Vec<f64>, batches: usize, per_batch: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySupport("empirical distribution has no samples"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(ReturnDistribution::Empirical {
            samples,
            batches,
            per_batch,
        })
    }

    pub fn components(&self) -> Option<&[NormalComponent]> {
        match self {
            ReturnDistribution::Analytic { components } => Some(components),
            ReturnDistribution::Empirical { .. } => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ReturnDistribution::Analytic { components } => {
                components.iter().map(|c| c.weight * c.mean).sum()
            }
            ReturnDistribution::Empirical { samples, .. } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        match self {
            ReturnDistribution::Analytic { components } => components
                .iter()
                .map(|c| c.weight * (c.variance + (c.mean - mean).powi(2)))
                .sum(),
            ReturnDistribution::Empirical { samples, .. } => {
                samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / samples.len() as f64
            }
        }
    }

    /// Interval that holds essentially all the mass: `mean ± k·sd` over
    /// components, or the sample range.
    pub fn span(&self, k: f64) -> (f64, f64) {
        match self {
            ReturnDistribution::Analytic { components } => {
                components.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                    let sd = c.variance.sqrt();
                    (lo.min(c.mean - k * sd), hi.max(c.mean + k * sd))
                })
            }
            ReturnDistribution::Empirical { samples, .. } => {
                (samples[0], samples[samples.len() - 1])
            }
        }
    }
}

impl Cdf for ReturnDistribution {
    fn cdf(&self, t: f64) -> f64 {
        match self {
            ReturnDistribution::Analytic { components } => components
                .iter()
                .map(|c| c.weight * c.cdf(t))
                .sum::<f64>()
                .min(1.0),
            ReturnDistribution::Empirical { samples, .. } => {
                samples.partition_point(|&s| s <= t) as f64 / samples.len() as f64
            }
        }
    }

    fn cdf_left(&self, t: f64) -> f64 {
        match self {
            ReturnDistribution::Analytic { components } => components
                .iter()
                .map(|c| c.weight * c.cdf_left(t))
                .sum::<f64>()
                .min(1.0),
            ReturnDistribution::Empirical { samples, .. } => {
                samples.partition_point(|&s| s < t) as f64 / samples.len() as f64
            }
        }
    }

    fn grid_points(&self) -> Vec<f64> {
        match self {
            ReturnDistribution::Analytic { components } => {
                let (lo, hi) = self.span(8.0);
                let mut pts = linspace(lo, hi, ANALYTIC_GRID);
                pts.extend(components.iter().map(|c| c.mean));
                pts
            }
            ReturnDistribution::Empirical { samples, .. } => samples.clone(),
        }
    }

    fn jump_points(&self) -> Vec<f64> {
        match self {
            ReturnDistribution::Analytic { components } => components
                .iter()
                .filter(|c| c.variance == 0.0)
                .map(|c| c.mean)
                .collect(),
            ReturnDistribution::Empirical { samples, .. } => {
                let mut jumps = samples.clone();
                jumps.dedup();
                jumps
            }
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Normal-approximation return distribution of a DS-reward MRP: a mixture
/// over start states `x` with `μ(x) > 0` of `N(v_x, ψ_x)`, using the exact
/// per-state mean and variance.
pub fn analytic_distribution(mrp: &Mrp) -> Result<ReturnDistribution> {
    let s = sobel(mrp)?;
    let components = mrp
        .initial()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &weight)| NormalComponent {
            weight,
            mean: s.v[x],
            variance: s.psi[x],
        })
        .collect();
    Ok(ReturnDistribution::Analytic { components })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_components_give_a_step_function() {
        let d = ReturnDistribution::Analytic {
            components: vec![
                NormalComponent {
                    weight: 0.25,
                    mean: 1.0,
                    variance: 0.0,
                },
                NormalComponent {
                    weight: 0.75,
                    mean: 3.0,
                    variance: 0.0,
                },
            ],
        };
        assert_eq!(d.cdf(0.999), 0.0);
        assert_eq!(d.cdf(1.0), 0.25);
        assert_eq!(d.cdf_left(1.0), 0.0);
        assert_eq!(d.cdf(2.0), 0.25);
        assert_eq!(d.cdf(3.0), 1.0);
        assert_eq!(d.jump_points(), vec![1.0, 3.0]);
    }

    #[test]
    fn normal_cdf_reference_values() {
        let c = NormalComponent {
            weight: 1.0,
            mean: 0.0,
            variance: 4.0,
        };
        assert!((c.cdf(0.0) - 0.5).abs() < 1e-15);
        // Φ(1) = 0.8413447460685429
        let got = c.cdf(2.0);
        assert!((got - 0.841_344_746_068_542_9).abs() < 1e-14, "{got:e}");
    }

    #[test]
    fn empirical_is_a_right_continuous_step() {
        let d = ReturnDistribution::empirical(vec![2.0, 1.0, 2.0, 4.0], 1, 4).unwrap();
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(2.0), 0.75);
        assert_eq!(d.cdf_left(2.0), 0.25);
        assert_eq!(d.cdf(4.0), 1.0);
        assert_eq!(d.jump_points(), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn empty_samples_are_rejected() {
        assert!(ReturnDistribution::empirical(vec![], 1, 0).is_err());
    }
}
