//! JSON form of a [`SatResult`]: the model document with `case`,
//! `compensated` and a `state_map` table added alongside it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AugmentedState, SatCase, SatResult, StateMap};
use crate::error::{Error, Result};
use crate::mdp::io::ModelDocument;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMapEntry {
    pub index: usize,
    #[serde(flatten)]
    pub state: AugmentedState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatDocument {
    pub case: SatCase,
    pub compensated: bool,
    #[serde(flatten)]
    pub model: ModelDocument,
    pub state_map: Vec<StateMapEntry>,
}

impl SatDocument {
    pub fn from_result(result: &SatResult) -> Self {
        SatDocument {
            case: result.case,
            compensated: result.compensated,
            model: ModelDocument::from_model(&result.model),
            state_map: result
                .state_map
                .iter()
                .enumerate()
                .map(|(index, &state)| StateMapEntry { index, state })
                .collect(),
        }
    }

    pub fn into_result(self) -> Result<SatResult> {
        let model = self.model.into_model()?;
        let mut entries = self.state_map;
        entries.sort_by_key(|e| e.index);
        if entries.iter().enumerate().any(|(i, e)| e.index != i) {
            return Err(Error::StateMapMismatch(
                "state_map indices must cover 0..n exactly once".into(),
            ));
        }
        let state_map = StateMap::new(entries.into_iter().map(|e| e.state).collect())?;
        let n = match &model {
            crate::mdp::Model::Mdp(m) => m.n_states(),
            crate::mdp::Model::Mrp(m) => m.n_states(),
        };
        if state_map.len() != n {
            return Err(Error::StateMapMismatch(format!(
                "state_map has {} entries for {} states",
                state_map.len(),
                n
            )));
        }
        Ok(SatResult {
            case: self.case,
            model,
            state_map,
            compensated: self.compensated,
        })
    }
}

pub fn sat_to_json(result: &SatResult) -> String {
    serde_json::to_string_pretty(&SatDocument::from_result(result)).expect("result serializes")
}

pub fn read_sat(path: impl AsRef<Path>) -> Result<SatResult> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let doc: SatDocument = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))?;
    doc.into_result()
}
