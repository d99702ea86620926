use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::mdp::{Mrp, RewardFunction};

/// RNG for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone)]
enum Draw {
    Fixed(f64),
    /// Cumulative probabilities with their values.
    Table(Vec<(f64, f64)>),
}

/// Precomputed sampling tables for an MRP.
#[derive(Debug, Clone)]
pub struct Sampler {
    initial: Vec<(f64, usize)>,
    /// Per state: cumulative probability, successor, reward draw.
    steps: Vec<Vec<(f64, usize, Draw)>>,
    gamma: f64,
}

fn cumulative<T>(items: impl IntoIterator<Item = (f64, T)>) -> Vec<(f64, T)> {
    let mut acc = 0.0;
    items
        .into_iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, t)| {
            acc += p;
            (acc, t)
        })
        .collect()
}

fn pick<T>(table: &[(f64, T)], u: f64) -> &T {
    let i = table.partition_point(|(c, _)| *c <= u);
    // rounding can leave the final cumulative just below 1
    &table[i.min(table.len() - 1)].1
}

impl Sampler {
    pub fn new(mrp: &Mrp) -> Self {
        let reward = mrp.reward();
        let draw = |x: usize, y: usize| -> Draw {
            match reward {
                RewardFunction::DeterministicState(r) => Draw::Fixed(r[x]),
                RewardFunction::DeterministicTransition(r) => Draw::Fixed(r[x][y]),
                _ => {
                    let pmf = reward.pmf(x, y);
                    match pmf.as_point() {
                        Some(v) => Draw::Fixed(v),
                        None => Draw::Table(cumulative(pmf.support().map(|(v, p)| (p, v)))),
                    }
                }
            }
        };
        let steps = mrp
            .kernel()
            .iter()
            .enumerate()
            .map(|(x, row)| {
                cumulative(row.iter().copied().zip(0..))
                    .into_iter()
                    .map(|(c, y)| (c, y, draw(x, y)))
                    .collect()
            })
            .collect();
        Sampler {
            initial: cumulative(mrp.initial().iter().copied().zip(0..)),
            steps,
            gamma: mrp.gamma(),
        }
    }

    /// `Σ_{t=1}^{horizon} γ^{t−1} R_t` along one sampled trajectory.
    pub fn sample<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> f64 {
        let mut x = *pick(&self.initial, rng.random::<f64>());
        let mut total = 0.0;
        let mut discount = 1.0;
        for _ in 0..horizon {
            let row = &self.steps[x];
            let u = rng.random::<f64>();
            let i = row.partition_point(|(c, _, _)| *c <= u).min(row.len() - 1);
            let (_, y, draw) = &row[i];
            let r = match draw {
                Draw::Fixed(v) => *v,
                Draw::Table(t) => *pick(t, rng.random::<f64>()),
            };
            total += discount * r;
            discount *= self.gamma;
            x = *y;
        }
        total
    }
}

/// One sampled truncated return of `mrp`. Builds the sampling tables on each
/// call; use [`Sampler`] when drawing many returns.
pub fn sample_return<R: Rng + ?Sized>(mrp: &Mrp, horizon: usize, rng: &mut R) -> Result<f64> {
    Ok(Sampler::new(mrp).sample(horizon, rng))
}
