use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hashable identity of an [`AugmentedState`].
pub(crate) type StateKey = (u8, usize, usize, usize, u64);

/// A state of a transformed model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AugmentedState {
    /// The situation "left `from` (taking `action`, if any), landed in `to`,
    /// earned `reward`".
    Situation {
        from: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        action: Option<usize>,
        to: usize,
        reward: f64,
    },
    /// Null state `w_x`, the zero-reward surrogate for starting in `x`.
    Null { state: usize },
}

impl AugmentedState {
    pub fn situation(from: usize, action: Option<usize>, to: usize, reward: f64) -> Self {
        AugmentedState::Situation {
            from,
            action,
            to,
            reward,
        }
    }

    /// Original state whose action set applies here (`y` for a situation,
    /// `x` for `w_x`).
    pub fn decision_state(&self) -> usize {
        match *self {
            AugmentedState::Situation { to, .. } => to,
            AugmentedState::Null { state } => state,
        }
    }

    pub(crate) fn key(&self) -> StateKey {
        match *self {
            AugmentedState::Null { state } => (0, state, 0, 0, 0),
            AugmentedState::Situation {
                from,
                action,
                to,
                reward,
            } => (
                1,
                from,
                action.map_or(0, |a| a + 1),
                to,
                // -0.0 and 0.0 are the same reward value
                (reward + 0.0).to_bits(),
            ),
        }
    }

    /// Total order: null states first, then situations lexicographically
    /// with rewards ordered numerically.
    pub(crate) fn order(&self, other: &Self) -> std::cmp::Ordering {
        let (a, b) = (self.key(), other.key());
        (a.0, a.1, a.2, a.3)
            .cmp(&(b.0, b.1, b.2, b.3))
            .then_with(|| self.reward_value().total_cmp(&other.reward_value()))
    }

    fn reward_value(&self) -> f64 {
        match *self {
            AugmentedState::Situation { reward, .. } => reward,
            AugmentedState::Null { .. } => 0.0,
        }
    }
}

impl fmt::Display for AugmentedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AugmentedState::Null { state } => write!(f, "w{state}"),
            AugmentedState::Situation {
                from,
                action: None,
                to,
                reward,
            } => write!(f, "({from},{to},{reward})"),
            AugmentedState::Situation {
                from,
                action: Some(a),
                to,
                reward,
            } => write!(f, "({from},{a},{to},{reward})"),
        }
    }
}

/// Bijection between augmented tuples and `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMap {
    states: Vec<AugmentedState>,
    index: HashMap<StateKey, usize>,
}

impl StateMap {
    /// Fails if a tuple occurs twice.
    pub fn new(states: Vec<AugmentedState>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.key(), i).is_some() {
                return Err(Error::StateMapMismatch(format!(
                    "augmented state {s} appears twice"
                )));
            }
        }
        Ok(StateMap { states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, state: &AugmentedState) -> Option<usize> {
        self.index.get(&state.key()).copied()
    }

    pub fn state(&self, index: usize) -> &AugmentedState {
        &self.states[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &AugmentedState> {
        self.states.iter()
    }

    pub fn states(&self) -> &[AugmentedState] {
        &self.states
    }

    pub fn null_count(&self) -> usize {
        self.states
            .iter()
            .filter(|s| matches!(s, AugmentedState::Null { .. }))
            .count()
    }

    /// Keeps the listed indices, in order.
    pub fn restrict(&self, kept: &[usize]) -> Result<StateMap> {
        StateMap::new(kept.iter().map(|&i| self.states[i]).collect())
    }

    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(|s| s.to_string()).collect()
    }
}
