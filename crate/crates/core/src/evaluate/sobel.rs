use serde::{Deserialize, Serialize};

use super::linalg::{identity_minus, identity_minus_transpose, Lu};
use crate::error::{Error, Result};
use crate::mdp::Mrp;

/// Residual bound enforced on both linear solves.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Slack below zero tolerated (and clamped) in the variance vector.
pub const VARIANCE_SLACK: f64 = 1e-9;

/// Per-state return mean `v`, variance `psi` and the auxiliary `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobelResult {
    pub v: Vec<f64>,
    pub psi: Vec<f64>,
    pub theta: Vec<f64>,
    /// `‖(I − γP)v − r‖∞`
    pub residual_mean: f64,
    /// `‖(I − γ²P)ψ − θ‖∞`
    pub residual_variance: f64,
}

impl SobelResult {
    /// `Σ_x μ(x)·v_x`.
    pub fn mean(&self, initial: &[f64]) -> f64 {
        initial.iter().zip(&self.v).map(|(m, v)| m * v).sum()
    }

    /// Variance of the return when the start state is drawn from `initial`
    /// (law of total variance over the start state).
    pub fn variance(&self, initial: &[f64]) -> f64 {
        let mean = self.mean(initial);
        let second: f64 = initial
            .iter()
            .zip(self.v.iter().zip(&self.psi))
            .map(|(m, (v, psi))| m * (psi + v * v))
            .sum();
        (second - mean * mean).max(0.0)
    }
}

/// Return mean and variance of a DS-reward MRP:
/// `v = (I − γP)⁻¹ r`, `θ_x = Σ_y P(x,y)(r(x) + γ v_y)² − v_x²`,
/// `ψ = (I − γ²P)⁻¹ θ`.
///
/// Other reward kinds are rejected: the variance recursion assumes the
/// reward is a function of the current state alone.
pub fn sobel(mrp: &Mrp) -> Result<SobelResult> {
    let r = mrp.state_rewards()?;
    let gamma = mrp.gamma();
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidModel(format!(
            "discount factor {gamma} is outside (0, 1)"
        )));
    }
    let p = mrp.kernel();
    let n = mrp.n_states();

    let lu = Lu::new(&identity_minus(p, gamma), n)?;
    let (v, residual_mean) = lu.solve_refined(r, RESIDUAL_TOL);
    if residual_mean > RESIDUAL_TOL {
        return Err(Error::Singular);
    }

    let theta: Vec<f64> = (0..n)
        .map(|x| {
            let second: f64 = p[x]
                .iter()
                .zip(&v)
                .filter(|(pxy, _)| **pxy > 0.0)
                .map(|(pxy, vy)| {
                    let g = r[x] + gamma * vy;
                    pxy * g * g
                })
                .sum();
            second - v[x] * v[x]
        })
        .collect();

    let lu2 = Lu::new(&identity_minus(p, gamma * gamma), n)?;
    let (mut psi, residual_variance) = lu2.solve_refined(&theta, RESIDUAL_TOL);
    if residual_variance > RESIDUAL_TOL {
        return Err(Error::Singular);
    }
    // Cancellation in θ scales with v², so the slack does too.
    let scale = v.iter().fold(1.0_f64, |m, x| m.max(x * x));
    for (state, value) in psi.iter_mut().enumerate() {
        if *value < 0.0 {
            if *value < -VARIANCE_SLACK * scale {
                return Err(Error::NegativeVariance {
                    state,
                    value: *value,
                });
            }
            *value = 0.0;
        }
    }
    Ok(SobelResult {
        v,
        psi,
        theta,
        residual_mean,
        residual_variance,
    })
}

/// Expected return `μᵀ(I − γP)⁻¹ r` computed through the discounted
/// occupancy measure `d = (I − γPᵀ)⁻¹ μ`, independently of [`sobel`].
pub fn occupancy_mean(mrp: &Mrp) -> Result<f64> {
    let r = mrp.state_rewards()?;
    let n = mrp.n_states();
    let lu = Lu::new(&identity_minus_transpose(mrp.kernel(), mrp.gamma()), n)?;
    let (d, _) = lu.solve_refined(mrp.initial(), RESIDUAL_TOL);
    Ok(d.iter().zip(r).map(|(d, r)| d * r).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{RewardFunction, StateSpace};

    fn ds(kernel: Vec<Vec<f64>>, r: Vec<f64>, gamma: f64) -> Mrp {
        let n = r.len();
        let mut initial = vec![0.0; n];
        initial[0] = 1.0;
        Mrp::new(
            StateSpace::indexed(n),
            kernel,
            RewardFunction::DeterministicState(r),
            initial,
            gamma,
        )
        .unwrap()
    }

    #[test]
    fn constant_reward_has_zero_variance() {
        let mrp = ds(
            vec![vec![0.2, 0.8], vec![0.6, 0.4]],
            vec![3.0, 3.0],
            0.9,
        );
        let s = sobel(&mrp).unwrap();
        for x in 0..2 {
            assert!((s.v[x] - 30.0).abs() < 1e-10);
            assert_eq!(s.psi[x], 0.0);
        }
    }

    #[test]
    fn alternating_chain_matches_closed_form() {
        let mrp = ds(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.0, 1.0], 0.5);
        let s = sobel(&mrp).unwrap();
        assert!((s.v[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.v[1] - 4.0 / 3.0).abs() < 1e-12);
        // deterministic path, so no variance
        assert!(s.psi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn coin_flip_variance() {
        // reward 1 at state 1; each step lands in 0 or 1 with prob 1/2
        // Var = Σ_t γ^{2t} · 1/4 for t ≥ 1 from state 0.
        let gamma: f64 = 0.5;
        let mrp = ds(vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec![0.0, 1.0], gamma);
        let s = sobel(&mrp).unwrap();
        let g2 = gamma * gamma;
        assert!((s.psi[0] - 0.25 * g2 / (1.0 - g2)).abs() < 1e-12);
        assert!((s.v[0] - 0.5 * gamma / (1.0 - gamma)).abs() < 1e-12);
    }

    #[test]
    fn rejects_transition_based_reward() {
        let mrp = Mrp::new(
            StateSpace::indexed(1),
            vec![vec![1.0]],
            RewardFunction::DeterministicTransition(vec![vec![1.0]]),
            vec![1.0],
            0.5,
        )
        .unwrap();
        assert!(matches!(sobel(&mrp), Err(Error::WrongRewardKind { .. })));
    }

    #[test]
    fn occupancy_route_agrees() {
        let mrp = ds(
            vec![
                vec![0.1, 0.6, 0.3],
                vec![0.5, 0.0, 0.5],
                vec![0.2, 0.2, 0.6],
            ],
            vec![1.0, -2.0, 4.0],
            0.95,
        );
        let s = sobel(&mrp).unwrap();
        let a = s.mean(mrp.initial());
        let b = occupancy_mean(&mrp).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}
