//! Finite MDP / Markov reward process data model.
//!
//! States and actions are dense integer indices with label tables. Both
//! [`Mdp`] and [`Mrp`] store their kernel and reward per *row*: a row is a
//! `(state, action)` pair for an MDP and a single state for an MRP. This lets
//! the reward machinery (expectations, lifting, simplification) be shared.

mod induce;
pub mod io;
mod pmf;
mod policy;
mod validate;

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use induce::induce_mrp;
pub use pmf::Pmf;
pub use policy::Policy;
pub use validate::{validate, validate_mdp, validate_mrp, Violation};

/// Tolerance for every sum-to-one check.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Self {
        StateSpace { labels }
    }

    /// States labelled `"0"`, `"1"`, ...
    pub fn indexed(count: usize) -> Self {
        StateSpace {
            labels: (0..count).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardKind {
    DS,
    DT,
    SS,
    ST,
}

impl RewardKind {
    pub fn is_transition_based(self) -> bool {
        matches!(self, RewardKind::DT | RewardKind::ST)
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, RewardKind::SS | RewardKind::ST)
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RewardKind::DS => "DS (deterministic state-based)",
            RewardKind::DT => "DT (deterministic transition-based)",
            RewardKind::SS => "SS (stochastic state-based)",
            RewardKind::ST => "ST (stochastic transition-based)",
        };
        f.write_str(s)
    }
}

/// Reward function, one entry per row (see module docs). Transition-based
/// variants hold one value or pmf per next state.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardFunction {
    DeterministicState(Vec<f64>),
    DeterministicTransition(Vec<Vec<f64>>),
    StochasticState(Vec<Pmf>),
    StochasticTransition(Vec<Vec<Pmf>>),
}

impl RewardFunction {
    pub fn kind(&self) -> RewardKind {
        match self {
            RewardFunction::DeterministicState(_) => RewardKind::DS,
            RewardFunction::DeterministicTransition(_) => RewardKind::DT,
            RewardFunction::StochasticState(_) => RewardKind::SS,
            RewardFunction::StochasticTransition(_) => RewardKind::ST,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            RewardFunction::DeterministicState(r) => r.len(),
            RewardFunction::DeterministicTransition(r) => r.len(),
            RewardFunction::StochasticState(r) => r.len(),
            RewardFunction::StochasticTransition(r) => r.len(),
        }
    }

    /// Reward pmf for `row` given next state `next`, with every kind viewed
    /// as stochastic transition-based (point masses, next-state-constant).
    pub fn pmf(&self, row: usize, next: usize) -> Pmf {
        match self {
            RewardFunction::DeterministicState(r) => Pmf::point(r[row]),
            RewardFunction::DeterministicTransition(r) => Pmf::point(r[row][next]),
            RewardFunction::StochasticState(r) => r[row].clone(),
            RewardFunction::StochasticTransition(r) => r[row][next].clone(),
        }
    }

    /// Expected one-step reward of `row` when the next state is drawn from
    /// `transition`.
    pub fn expected(&self, row: usize, transition: &[f64]) -> f64 {
        match self {
            RewardFunction::DeterministicState(r) => r[row],
            RewardFunction::StochasticState(r) => r[row].mean(),
            RewardFunction::DeterministicTransition(r) => transition
                .iter()
                .zip(&r[row])
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, v)| p * v)
                .sum(),
            RewardFunction::StochasticTransition(r) => transition
                .iter()
                .zip(&r[row])
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, pmf)| p * pmf.mean())
                .sum(),
        }
    }

    /// Lifts to the stochastic transition-based form over `n_next` successors.
    pub fn to_stochastic_transition(&self, n_next: usize) -> Vec<Vec<Pmf>> {
        (0..self.rows())
            .map(|row| (0..n_next).map(|y| self.pmf(row, y)).collect())
            .collect()
    }

    /// Largest reward magnitude reachable under `kernel`.
    pub fn max_abs(&self, kernel: &[Vec<f64>]) -> f64 {
        let mut best = 0.0_f64;
        for (row, transition) in kernel.iter().enumerate() {
            for (y, &p) in transition.iter().enumerate() {
                if p > 0.0 {
                    best = best.max(self.pmf(row, y).max_abs_value());
                }
            }
        }
        best
    }

    fn check_shape(&self, rows: usize, n_next: usize) -> Result<()> {
        let ok = match self {
            RewardFunction::DeterministicState(r) => r.len() == rows,
            RewardFunction::StochasticState(r) => r.len() == rows,
            RewardFunction::DeterministicTransition(r) => {
                r.len() == rows && r.iter().all(|row| row.len() == n_next)
            }
            RewardFunction::StochasticTransition(r) => {
                r.len() == rows && r.iter().all(|row| row.len() == n_next)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "reward table shape does not match {rows} rows x {n_next} next states"
            )))
        }
    }
}

/// Finite MDP `<S, A, r, p, μ, γ>` with per-state allowable action sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    states: StateSpace,
    action_labels: Vec<String>,
    actions: Vec<Vec<usize>>,
    kernel: Vec<Vec<f64>>,
    reward: RewardFunction,
    initial: Vec<f64>,
    gamma: f64,
    row_offsets: Vec<usize>,
}

impl Mdp {
    /// `actions[x]` lists the global action ids allowed at `x`; `kernel` and
    /// the reward table hold one row per `(x, a)` in that order, states
    /// ascending. Only shapes are checked here; see [`validate`].
    pub fn new(
        states: StateSpace,
        action_labels: Vec<String>,
        actions: Vec<Vec<usize>>,
        kernel: Vec<Vec<f64>>,
        reward: RewardFunction,
        initial: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let n = states.len();
        if actions.len() != n {
            return Err(Error::InvalidModel(format!(
                "{} action sets for {} states",
                actions.len(),
                n
            )));
        }
        if initial.len() != n {
            return Err(Error::InvalidModel(format!(
                "initial distribution has {} entries for {} states",
                initial.len(),
                n
            )));
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut offset = 0;
        for (x, set) in actions.iter().enumerate() {
            row_offsets.push(offset);
            offset += set.len();
            if let Some(&a) = set.iter().find(|&&a| a >= action_labels.len()) {
                return Err(Error::InvalidModel(format!(
                    "state {x} allows action {a} but only {} actions exist",
                    action_labels.len()
                )));
            }
        }
        row_offsets.push(offset);
        if kernel.len() != offset || kernel.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!(
                "kernel must have {offset} rows of length {n}"
            )));
        }
        reward.check_shape(offset, n)?;
        Ok(Mdp {
            states,
            action_labels,
            actions,
            kernel,
            reward,
            initial,
            gamma,
            row_offsets,
        })
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn action_labels(&self) -> &[String] {
        &self.action_labels
    }

    pub fn n_actions(&self) -> usize {
        self.action_labels.len()
    }

    /// Allowable actions `A_x`.
    pub fn actions(&self, x: usize) -> &[usize] {
        &self.actions[x]
    }

    pub fn action_sets(&self) -> &[Vec<usize>] {
        &self.actions
    }

    pub fn rows_of(&self, x: usize) -> Range<usize> {
        self.row_offsets[x]..self.row_offsets[x + 1]
    }

    pub fn n_rows(&self) -> usize {
        self.kernel.len()
    }

    /// Row index of `(x, a)`, if `a ∈ A_x`.
    pub fn row(&self, x: usize, a: usize) -> Option<usize> {
        self.actions
            .get(x)?
            .iter()
            .position(|&b| b == a)
            .map(|slot| self.row_offsets[x] + slot)
    }

    /// `(state, action)` of a row.
    pub fn row_key(&self, row: usize) -> (usize, usize) {
        let x = self.row_offsets.partition_point(|&o| o <= row) - 1;
        (x, self.actions[x][row - self.row_offsets[x]])
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    /// `p(· | x, a)`; panics if `a ∉ A_x`.
    pub fn transition(&self, x: usize, a: usize) -> &[f64] {
        let row = self
            .row(x, a)
            .unwrap_or_else(|| panic!("action {a} not allowed at state {x}"));
        &self.kernel[row]
    }

    pub fn reward(&self) -> &RewardFunction {
        &self.reward
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Size of the deterministic policy space `Π_x |A_x|`.
    pub fn deterministic_policy_count(&self) -> u128 {
        self.actions
            .iter()
            .map(|set| set.len() as u128)
            .try_fold(1u128, |acc, n| acc.checked_mul(n))
            .unwrap_or(u128::MAX)
    }

    /// Same model with a different reward function.
    pub fn with_reward(&self, reward: RewardFunction) -> Result<Self> {
        reward.check_shape(self.n_rows(), self.n_states())?;
        Ok(Mdp {
            reward,
            ..self.clone()
        })
    }
}

/// Markov reward process: an MDP closed under a stationary policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Mrp {
    states: StateSpace,
    kernel: Vec<Vec<f64>>,
    reward: RewardFunction,
    initial: Vec<f64>,
    gamma: f64,
}

impl Mrp {
    pub fn new(
        states: StateSpace,
        kernel: Vec<Vec<f64>>,
        reward: RewardFunction,
        initial: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let n = states.len();
        if kernel.len() != n || kernel.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!(
                "kernel must be {n} x {n}"
            )));
        }
        if initial.len() != n {
            return Err(Error::InvalidModel(format!(
                "initial distribution has {} entries for {} states",
                initial.len(),
                n
            )));
        }
        reward.check_shape(n, n)?;
        Ok(Mrp {
            states,
            kernel,
            reward,
            initial,
            gamma,
        })
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn reward(&self) -> &RewardFunction {
        &self.reward
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_reward(&self, reward: RewardFunction) -> Result<Self> {
        reward.check_shape(self.n_states(), self.n_states())?;
        Ok(Mrp {
            reward,
            ..self.clone()
        })
    }

    /// DS reward vector, or a kind error naming what the caller must do.
    pub fn state_rewards(&self) -> Result<&[f64]> {
        match &self.reward {
            RewardFunction::DeterministicState(r) => Ok(r),
            other => Err(Error::WrongRewardKind {
                expected: "DS (apply a state-augmentation transform or simplify first)",
                found: other.kind(),
            }),
        }
    }

    /// States reachable from the support of the initial distribution.
    pub fn reachable(&self) -> Vec<bool> {
        let n = self.n_states();
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&x| self.initial[x] > 0.0).collect();
        for &x in &stack {
            seen[x] = true;
        }
        while let Some(x) = stack.pop() {
            for (y, &p) in self.kernel[x].iter().enumerate() {
                if p > 0.0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Restricts to the states flagged in `keep`, which must be closed under
    /// the kernel. Returns the new model and the kept original indices.
    pub fn restrict(&self, keep: &[bool]) -> Result<(Mrp, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.n_states()).filter(|&x| keep[x]).collect();
        let mut new_index = vec![usize::MAX; self.n_states()];
        for (i, &x) in kept.iter().enumerate() {
            new_index[x] = i;
        }
        let project = |row: &Vec<f64>| -> Result<Vec<f64>> {
            let mut out = vec![0.0; kept.len()];
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    let j = new_index[y];
                    if j == usize::MAX {
                        return Err(Error::InvalidModel(
                            "restriction is not closed under the kernel".into(),
                        ));
                    }
                    out[j] = p;
                }
            }
            Ok(out)
        };
        let kernel = kept
            .iter()
            .map(|&x| project(&self.kernel[x]))
            .collect::<Result<Vec<_>>>()?;
        let pick_next = |row: &[f64]| kept.iter().map(|&y| row[y]).collect::<Vec<_>>();
        let reward = match &self.reward {
            RewardFunction::DeterministicState(r) => {
                RewardFunction::DeterministicState(kept.iter().map(|&x| r[x]).collect())
            }
            RewardFunction::StochasticState(r) => {
                RewardFunction::StochasticState(kept.iter().map(|&x| r[x].clone()).collect())
            }
            RewardFunction::DeterministicTransition(r) => RewardFunction::DeterministicTransition(
                kept.iter().map(|&x| pick_next(&r[x])).collect(),
            ),
            RewardFunction::StochasticTransition(r) => RewardFunction::StochasticTransition(
                kept.iter()
                    .map(|&x| kept.iter().map(|&y| r[x][y].clone()).collect())
                    .collect(),
            ),
        };
        let states = StateSpace::new(
            kept.iter()
                .map(|&x| self.states.label(x).to_string())
                .collect(),
        );
        let initial = pick_next(&self.initial);
        Ok((
            Mrp::new(states, kernel, reward, initial, self.gamma)?,
            kept,
        ))
    }
}

/// Either kind of model, as read from the interchange format.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Mdp(Mdp),
    Mrp(Mrp),
}

impl Model {
    pub fn reward(&self) -> &RewardFunction {
        match self {
            Model::Mdp(m) => m.reward(),
            Model::Mrp(m) => m.reward(),
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Model::Mdp(m) => m.gamma(),
            Model::Mrp(m) => m.gamma(),
        }
    }
}

impl From<Mdp> for Model {
    fn from(m: Mdp) -> Self {
        Model::Mdp(m)
    }
}

impl From<Mrp> for Model {
    fn from(m: Mrp) -> Self {
        Model::Mrp(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_mdp() -> Mdp {
        Mdp::new(
            StateSpace::indexed(2),
            vec!["stay".into(), "go".into()],
            vec![vec![0, 1], vec![0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
            RewardFunction::DeterministicState(vec![1.0, 2.0, 3.0]),
            vec![1.0, 0.0],
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn rows_follow_action_sets() {
        let mdp = two_state_mdp();
        assert_eq!(mdp.row(0, 1), Some(1));
        assert_eq!(mdp.row(1, 0), Some(2));
        assert_eq!(mdp.row(1, 1), None);
        assert_eq!(mdp.row_key(2), (1, 0));
        assert_eq!(mdp.row_key(1), (0, 1));
        assert_eq!(mdp.deterministic_policy_count(), 2);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let err = Mdp::new(
            StateSpace::indexed(2),
            vec!["a".into()],
            vec![vec![0], vec![0]],
            vec![vec![1.0, 0.0]],
            RewardFunction::DeterministicState(vec![0.0, 0.0]),
            vec![1.0, 0.0],
            0.9,
        );
        assert!(err.is_err());
    }

    #[test]
    fn expected_reward_ignores_unreachable_successors() {
        let r = RewardFunction::DeterministicTransition(vec![vec![4.0, f64::NAN]]);
        assert_eq!(r.expected(0, &[1.0, 0.0]), 4.0);
    }

    #[test]
    fn restrict_drops_unreachable_states() {
        let mrp = Mrp::new(
            StateSpace::indexed(3),
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            RewardFunction::DeterministicState(vec![1.0, 2.0, 3.0]),
            vec![1.0, 0.0, 0.0],
            0.5,
        )
        .unwrap();
        let (small, kept) = mrp.restrict(&mrp.reachable()).unwrap();
        assert_eq!(kept, vec![0, 1]);
        assert_eq!(small.state_rewards().unwrap(), &[1.0, 2.0]);
        assert_eq!(small.kernel()[0], vec![0.0, 1.0]);
    }
}
