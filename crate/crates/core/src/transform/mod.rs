//! State-augmentation transformations (SATs) and the expectation-based
//! reward simplification they replace.
//!
//! Every SAT rebuilds the process over "situation" states that carry the
//! reward just realised, so the new reward is deterministic and state-based
//! while the reward sequence keeps its law:
//!
//! | case | input                                  | situation tuple     | null states |
//! |------|----------------------------------------|---------------------|-------------|
//! | 0    | MRP, deterministic transition reward   | `(x, y)`            | no          |
//! | 1    | MRP, stochastic reward                 | `(x, y, j)`         | no          |
//! | 2    | MDP + randomized policy                | `(x, a, y, j)`      | yes         |
//! | 3    | MDP (any reward kind)                  | `(x, a, y, j)`      | yes         |
//!
//! Cases 2 and 3 start from a null state `w_x` with zero reward, which delays
//! the reward sequence by one epoch; with compensation on, situation rewards
//! are divided by `γ` so discounted returns match.

mod cases;
pub mod io;
mod state_map;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Mdp, Model, Mrp, Policy, RewardFunction};

pub use cases::{case3_state_bound, sat_case0, sat_case1, sat_case2, sat_case3, sat_for_mrp};
pub use state_map::{AugmentedState, StateMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum SatCase {
    Case0,
    Case1,
    Case2,
    Case3,
}

impl From<SatCase> for u8 {
    fn from(c: SatCase) -> u8 {
        match c {
            SatCase::Case0 => 0,
            SatCase::Case1 => 1,
            SatCase::Case2 => 2,
            SatCase::Case3 => 3,
        }
    }
}

impl TryFrom<u8> for SatCase {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(SatCase::Case0),
            1 => Ok(SatCase::Case1),
            2 => Ok(SatCase::Case2),
            3 => Ok(SatCase::Case3),
            other => Err(format!("unknown SAT case {other}")),
        }
    }
}

/// Output of a transformation: the new model, the bijection between its
/// state indices and augmented tuples, and whether rewards were divided by γ.
#[derive(Debug, Clone, PartialEq)]
pub struct SatResult {
    pub case: SatCase,
    pub model: Model,
    pub state_map: StateMap,
    pub compensated: bool,
}

impl SatResult {
    pub fn mrp(&self) -> Option<&Mrp> {
        match &self.model {
            Model::Mrp(m) => Some(m),
            Model::Mdp(_) => None,
        }
    }

    pub fn mdp(&self) -> Option<&Mdp> {
        match &self.model {
            Model::Mdp(m) => Some(m),
            Model::Mrp(_) => None,
        }
    }

    /// Number of epochs by which the reward sequence lags the original
    /// (the null-state prefix of cases 2 and 3).
    pub fn delay(&self) -> usize {
        match self.case {
            SatCase::Case0 | SatCase::Case1 => 0,
            SatCase::Case2 | SatCase::Case3 => 1,
        }
    }
}

/// Replaces the reward by its conditional expectation given the row:
/// `r'(x,a) = Σ_y p(y|x,a)·E[r(·|x,a,y)]` (and `E[r(·|x,a)]` for stochastic
/// state-based rewards). Kernel, initial distribution and γ are untouched.
pub fn simplify_reward(model: &Model) -> Result<Model> {
    let simplified = |reward: &RewardFunction, kernel: &[Vec<f64>]| {
        RewardFunction::DeterministicState(
            kernel
                .iter()
                .enumerate()
                .map(|(row, transition)| reward.expected(row, transition))
                .collect(),
        )
    };
    Ok(match model {
        Model::Mdp(m) => Model::Mdp(m.with_reward(simplified(m.reward(), m.kernel()))?),
        Model::Mrp(m) => Model::Mrp(m.with_reward(simplified(m.reward(), m.kernel()))?),
    })
}

pub fn simplify_mrp(mrp: &Mrp) -> Result<Mrp> {
    match simplify_reward(&Model::Mrp(mrp.clone()))? {
        Model::Mrp(m) => Ok(m),
        Model::Mdp(_) => unreachable!(),
    }
}

/// Carries a policy on the original states over to augmented states:
/// `π†(·|w_x) = π(·|x)` and `π†(·|(x,a,y,j)) = π(·|y)`.
pub fn map_policy(policy: &Policy, state_map: &StateMap) -> Result<Policy> {
    let n = policy.n_states();
    let source = |s: &AugmentedState| -> Result<usize> {
        let x = s.decision_state();
        if x < n {
            Ok(x)
        } else {
            Err(Error::StateMapMismatch(format!(
                "augmented state {s} refers to original state {x}, policy covers {n}"
            )))
        }
    };
    match policy {
        Policy::Deterministic(a) => Ok(Policy::Deterministic(
            state_map
                .iter()
                .map(|s| source(s).map(|x| a[x]))
                .collect::<Result<_>>()?,
        )),
        Policy::Randomized(a) => Ok(Policy::Randomized(
            state_map
                .iter()
                .map(|s| source(s).map(|x| a[x].clone()))
                .collect::<Result<_>>()?,
        )),
    }
}
