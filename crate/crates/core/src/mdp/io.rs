//! JSON interchange format for models.
//!
//! ```json
//! {
//!   "states": ["0", "1", "2"],
//!   "action_labels": ["0", "1", "2"],
//!   "actions": [[0, 1, 2], [0, 1], [0]],
//!   "reward": {
//!     "kind": "DT",
//!     "entries": [{ "state": 0, "action": 2, "next": 1, "value": 0.0 }]
//!   },
//!   "kernel": [{ "state": 0, "action": 2, "probs": [0.25, 0.5, 0.25] }],
//!   "initial": [1.0, 0.0, 0.0],
//!   "gamma": 0.95
//! }
//! ```
//!
//! An MRP omits `actions`/`action_labels` and the `action` key of every entry.
//! Stochastic kinds (`SS`, `ST`) carry `"pmf": [[value, prob], ...]` instead of
//! `"value"`. State-based kinds omit `next`. Kernel rows or reward entries that
//! are absent load as zero rows / missing values and are reported by
//! [`validate`](super::validate), so a loaded model is never silently repaired.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mdp, Model, Mrp, Pmf, RewardFunction, RewardKind, StateSpace};
use crate::error::{Error, Result};

/// Unknown top-level keys are ignored so that annotated documents (such as
/// a transform result with its `state_map`) still load as models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<Vec<usize>>>,
    pub reward: RewardDocument,
    pub kernel: Vec<KernelEntry>,
    pub initial: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardDocument {
    pub kind: RewardKind,
    pub entries: Vec<RewardEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardEntry {
    pub state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Pmf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
    pub probs: Vec<f64>,
}

impl ModelDocument {
    pub fn into_model(self) -> Result<Model> {
        let n = self.states.len();
        let states = StateSpace::new(self.states);
        match self.actions {
            Some(actions) => {
                let n_actions = actions.iter().flatten().map(|&a| a + 1).max().unwrap_or(0);
                let action_labels = self
                    .action_labels
                    .unwrap_or_else(|| (0..n_actions).map(|a| a.to_string()).collect());
                // Row layout mirrors Mdp::new.
                let mut offsets = Vec::with_capacity(n);
                let mut rows = 0;
                for set in &actions {
                    offsets.push(rows);
                    rows += set.len();
                }
                let row_of = |x: usize, a: Option<usize>, what: &str| -> Result<usize> {
                    let a = a.ok_or_else(|| {
                        Error::Parse(format!("{what} for state {x} is missing its action"))
                    })?;
                    let slot = actions
                        .get(x)
                        .ok_or_else(|| Error::Parse(format!("{what} names unknown state {x}")))?
                        .iter()
                        .position(|&b| b == a)
                        .ok_or_else(|| {
                            Error::Parse(format!("{what} names action {a} not allowed at state {x}"))
                        })?;
                    Ok(offsets[x] + slot)
                };
                let mut kernel = vec![vec![0.0; n]; rows];
                for entry in self.kernel {
                    let row = row_of(entry.state, entry.action, "kernel entry")?;
                    kernel[row] = check_len(entry.probs, n, "kernel probs")?;
                }
                let reward = dense_reward(self.reward, rows, n, |e| {
                    row_of(e.state, e.action, "reward entry")
                })?;
                Ok(Model::Mdp(Mdp::new(
                    states,
                    action_labels,
                    actions,
                    kernel,
                    reward,
                    self.initial,
                    self.gamma,
                )?))
            }
            None => {
                let row_of = |e: &RewardEntry| -> Result<usize> {
                    if e.action.is_some() {
                        return Err(Error::Parse(
                            "MRP reward entries must not name an action".into(),
                        ));
                    }
                    check_index(e.state, n, "reward entry state")
                };
                let mut kernel = vec![vec![0.0; n]; n];
                for entry in self.kernel {
                    if entry.action.is_some() {
                        return Err(Error::Parse(
                            "MRP kernel entries must not name an action".into(),
                        ));
                    }
                    let x = check_index(entry.state, n, "kernel entry state")?;
                    kernel[x] = check_len(entry.probs, n, "kernel probs")?;
                }
                let reward = dense_reward(self.reward, n, n, row_of)?;
                Ok(Model::Mrp(Mrp::new(
                    states,
                    kernel,
                    reward,
                    self.initial,
                    self.gamma,
                )?))
            }
        }
    }

    pub fn from_mdp(mdp: &Mdp) -> Self {
        let key = |row: usize| {
            let (x, a) = mdp.row_key(row);
            (x, Some(a))
        };
        ModelDocument {
            states: mdp.states().labels().to_vec(),
            action_labels: Some(mdp.action_labels().to_vec()),
            actions: Some(mdp.action_sets().to_vec()),
            reward: reward_document(mdp.reward(), mdp.kernel(), key),
            kernel: mdp
                .kernel()
                .iter()
                .enumerate()
                .map(|(row, probs)| {
                    let (state, action) = key(row);
                    KernelEntry {
                        state,
                        action,
                        probs: probs.clone(),
                    }
                })
                .collect(),
            initial: mdp.initial().to_vec(),
            gamma: mdp.gamma(),
        }
    }

    pub fn from_mrp(mrp: &Mrp) -> Self {
        ModelDocument {
            states: mrp.states().labels().to_vec(),
            action_labels: None,
            actions: None,
            reward: reward_document(mrp.reward(), mrp.kernel(), |x| (x, None)),
            kernel: mrp
                .kernel()
                .iter()
                .enumerate()
                .map(|(state, probs)| KernelEntry {
                    state,
                    action: None,
                    probs: probs.clone(),
                })
                .collect(),
            initial: mrp.initial().to_vec(),
            gamma: mrp.gamma(),
        }
    }

    pub fn from_model(model: &Model) -> Self {
        match model {
            Model::Mdp(m) => Self::from_mdp(m),
            Model::Mrp(m) => Self::from_mrp(m),
        }
    }
}

fn check_index(i: usize, n: usize, what: &str) -> Result<usize> {
    if i < n {
        Ok(i)
    } else {
        Err(Error::Parse(format!("{what} {i} is out of range (0..{n})")))
    }
}

fn check_len(v: Vec<f64>, n: usize, what: &str) -> Result<Vec<f64>> {
    if v.len() == n {
        Ok(v)
    } else {
        Err(Error::Parse(format!(
            "{what} has {} entries, expected {n}",
            v.len()
        )))
    }
}

fn dense_reward(
    doc: RewardDocument,
    rows: usize,
    n: usize,
    row_of: impl Fn(&RewardEntry) -> Result<usize>,
) -> Result<RewardFunction> {
    let value = |e: &RewardEntry| {
        e.value
            .ok_or_else(|| Error::Parse(format!("{:?} reward entry needs \"value\"", doc.kind)))
    };
    let pmf = |e: &RewardEntry| {
        e.pmf
            .clone()
            .ok_or_else(|| Error::Parse(format!("{:?} reward entry needs \"pmf\"", doc.kind)))
    };
    let next = |e: &RewardEntry| {
        let y = e.next.ok_or_else(|| {
            Error::Parse(format!("{:?} reward entry needs \"next\"", doc.kind))
        })?;
        check_index(y, n, "reward entry next state")
    };
    Ok(match doc.kind {
        RewardKind::DS => {
            let mut r = vec![f64::NAN; rows];
            for e in &doc.entries {
                r[row_of(e)?] = value(e)?;
            }
            RewardFunction::DeterministicState(r)
        }
        RewardKind::SS => {
            let mut r = vec![Pmf::default(); rows];
            for e in &doc.entries {
                r[row_of(e)?] = pmf(e)?;
            }
            RewardFunction::StochasticState(r)
        }
        RewardKind::DT => {
            let mut r = vec![vec![f64::NAN; n]; rows];
            for e in &doc.entries {
                r[row_of(e)?][next(e)?] = value(e)?;
            }
            RewardFunction::DeterministicTransition(r)
        }
        RewardKind::ST => {
            let mut r = vec![vec![Pmf::default(); n]; rows];
            for e in &doc.entries {
                r[row_of(e)?][next(e)?] = pmf(e)?;
            }
            RewardFunction::StochasticTransition(r)
        }
    })
}

fn reward_document(
    reward: &RewardFunction,
    kernel: &[Vec<f64>],
    key: impl Fn(usize) -> (usize, Option<usize>),
) -> RewardDocument {
    let mut entries = Vec::new();
    for (row, transition) in kernel.iter().enumerate() {
        let (state, action) = key(row);
        let entry = |next, value, pmf| RewardEntry {
            state,
            action,
            next,
            value,
            pmf,
        };
        match reward {
            RewardFunction::DeterministicState(r) => entries.push(entry(None, Some(r[row]), None)),
            RewardFunction::StochasticState(r) => {
                entries.push(entry(None, None, Some(r[row].clone())))
            }
            RewardFunction::DeterministicTransition(r) => {
                for (y, &p) in transition.iter().enumerate() {
                    if p > 0.0 {
                        entries.push(entry(Some(y), Some(r[row][y]), None));
                    }
                }
            }
            RewardFunction::StochasticTransition(r) => {
                for (y, &p) in transition.iter().enumerate() {
                    if p > 0.0 {
                        entries.push(entry(Some(y), None, Some(r[row][y].clone())));
                    }
                }
            }
        }
    }
    RewardDocument {
        kind: reward.kind(),
        entries,
    }
}

pub fn parse_model(json: &str) -> Result<Model> {
    let doc: ModelDocument =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
    doc.into_model()
}

pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_model(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&ModelDocument::from_model(model)).expect("model serializes")
}
