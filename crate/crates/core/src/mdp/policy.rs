use serde::{Deserialize, Serialize};

use super::{Mdp, PROB_TOL};
use crate::error::{Error, Result};

/// Stationary Markovian policy. Actions are global action ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "actions")]
pub enum Policy {
    /// `π(x)` per state.
    Deterministic(Vec<usize>),
    /// `π(· | x)` per state as `(action, probability)` pairs.
    Randomized(Vec<Vec<(usize, f64)>>),
}

impl Policy {
    pub fn n_states(&self) -> usize {
        match self {
            Policy::Deterministic(a) => a.len(),
            Policy::Randomized(a) => a.len(),
        }
    }

    /// `π(· | x)` with zero-probability actions dropped.
    pub fn distribution(&self, x: usize) -> Vec<(usize, f64)> {
        match self {
            Policy::Deterministic(a) => vec![(a[x], 1.0)],
            Policy::Randomized(a) => a[x].iter().copied().filter(|&(_, p)| p > 0.0).collect(),
        }
    }

    pub fn prob(&self, x: usize, action: usize) -> f64 {
        match self {
            Policy::Deterministic(a) => f64::from(u8::from(a[x] == action)),
            Policy::Randomized(a) => a[x]
                .iter()
                .filter(|(b, _)| *b == action)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    /// Uniform over `A_x` at every state.
    pub fn uniform(mdp: &Mdp) -> Self {
        Policy::Randomized(
            (0..mdp.n_states())
                .map(|x| {
                    let set = mdp.actions(x);
                    let p = 1.0 / set.len() as f64;
                    set.iter().map(|&a| (a, p)).collect()
                })
                .collect(),
        )
    }

    /// Randomized view of the same policy.
    pub fn to_randomized(&self) -> Policy {
        match self {
            Policy::Deterministic(a) => {
                Policy::Randomized(a.iter().map(|&a| vec![(a, 1.0)]).collect())
            }
            r @ Policy::Randomized(_) => r.clone(),
        }
    }

    /// Checks that every action lies in `A_x` and randomized rows sum to one.
    pub fn check(&self, mdp: &Mdp) -> Result<()> {
        if self.n_states() != mdp.n_states() {
            return Err(Error::InvalidPolicy(format!(
                "policy covers {} states, model has {}",
                self.n_states(),
                mdp.n_states()
            )));
        }
        for x in 0..mdp.n_states() {
            let allowed = mdp.actions(x);
            let dist: Vec<(usize, f64)> = match self {
                Policy::Deterministic(a) => vec![(a[x], 1.0)],
                Policy::Randomized(a) => a[x].clone(),
            };
            for &(a, p) in &dist {
                if !allowed.contains(&a) {
                    return Err(Error::InvalidPolicy(format!(
                        "action {a} at state {x} is outside the allowable set {allowed:?}"
                    )));
                }
                if !(p.is_finite() && p >= 0.0) {
                    return Err(Error::InvalidPolicy(format!(
                        "probability {p} of action {a} at state {x}"
                    )));
                }
            }
            let total: f64 = dist.iter().map(|d| d.1).sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy(format!(
                    "action probabilities at state {x} sum to {total}"
                )));
            }
        }
        Ok(())
    }

    /// All deterministic policies of `mdp`, state 0 varying slowest.
    pub fn enumerate_deterministic(mdp: &Mdp, cap: u128) -> Result<Vec<Policy>> {
        let count = mdp.deterministic_policy_count();
        if count > cap {
            return Err(Error::CapExceeded {
                what: "deterministic policy count",
                count,
                cap,
            });
        }
        if count == 0 {
            return Ok(Vec::new());
        }
        let sets = mdp.action_sets();
        let mut out = Vec::with_capacity(count as usize);
        let mut cursor = vec![0usize; sets.len()];
        loop {
            out.push(Policy::Deterministic(
                cursor.iter().zip(sets).map(|(&i, s)| s[i]).collect(),
            ));
            // odometer increment, last state fastest
            let mut k = sets.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                cursor[k] += 1;
                if cursor[k] < sets[k].len() {
                    break;
                }
                cursor[k] = 0;
            }
        }
    }
}
