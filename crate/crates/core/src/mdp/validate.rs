use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{Mdp, Model, Mrp, Pmf, RewardFunction, PROB_TOL};

/// One broken invariant, located by the offending state/action/row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }

    fn distribution(&mut self, location: &str, probs: &[f64]) {
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                self.push(location, format!("entry {i} has invalid probability {p}"));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            self.push(
                location,
                format!("sums to {total}, expected 1 within {PROB_TOL:e}"),
            );
        }
    }

    fn pmf(&mut self, location: &str, pmf: &Pmf) {
        if pmf.is_empty() {
            self.push(location, "reward pmf is missing or empty");
            return;
        }
        for &(v, p) in pmf.atoms() {
            if !v.is_finite() {
                self.push(location, format!("reward value {v} is not a finite real"));
            }
            if !p.is_finite() || p < 0.0 {
                self.push(location, format!("reward value {v} has probability {p}"));
            }
        }
        let total = pmf.total();
        if (total - 1.0).abs() > PROB_TOL {
            self.push(
                location,
                format!("reward pmf sums to {total}, expected 1 within {PROB_TOL:e}"),
            );
        }
    }

    fn value(&mut self, location: &str, v: f64) {
        if !v.is_finite() {
            self.push(location, format!("reward {v} is missing or not finite"));
        }
    }

    fn rewards(
        &mut self,
        reward: &RewardFunction,
        kernel: &[Vec<f64>],
        row_name: &dyn Fn(usize) -> String,
    ) {
        for (row, transition) in kernel.iter().enumerate() {
            let name = row_name(row);
            match reward {
                RewardFunction::DeterministicState(r) => self.value(&name, r[row]),
                RewardFunction::StochasticState(r) => self.pmf(&name, &r[row]),
                RewardFunction::DeterministicTransition(r) => {
                    for (y, &p) in transition.iter().enumerate() {
                        if p > 0.0 {
                            self.value(&format!("{name} -> {y}"), r[row][y]);
                        }
                    }
                }
                RewardFunction::StochasticTransition(r) => {
                    for (y, &p) in transition.iter().enumerate() {
                        if p > 0.0 {
                            self.pmf(&format!("{name} -> {y}"), &r[row][y]);
                        }
                    }
                }
            }
        }
    }

    fn states(&mut self, labels: &[String]) {
        if labels.is_empty() {
            self.push("states", "state space is empty");
        }
        let mut seen = HashSet::new();
        for label in labels {
            if !seen.insert(label) {
                self.push("states", format!("duplicate state label {label:?}"));
            }
        }
    }

    fn gamma(&mut self, gamma: f64) {
        if !(gamma > 0.0 && gamma < 1.0) {
            self.push("gamma", format!("discount factor {gamma} is outside (0, 1)"));
        }
    }
}

/// Checks every model invariant; an empty list means the model is well formed.
pub fn validate(model: &Model) -> Vec<Violation> {
    match model {
        Model::Mdp(m) => validate_mdp(m),
        Model::Mrp(m) => validate_mrp(m),
    }
}

pub fn validate_mdp(mdp: &Mdp) -> Vec<Violation> {
    let mut report = Report(Vec::new());
    report.states(mdp.states().labels());
    report.gamma(mdp.gamma());
    for x in 0..mdp.n_states() {
        let set = mdp.actions(x);
        if set.is_empty() {
            report.push(format!("state {x}"), "allowable action set is empty");
        }
        let unique: HashSet<_> = set.iter().collect();
        if unique.len() != set.len() {
            report.push(format!("state {x}"), "allowable action set has duplicates");
        }
    }
    for (row, transition) in mdp.kernel().iter().enumerate() {
        let (x, a) = mdp.row_key(row);
        report.distribution(&format!("kernel row (state {x}, action {a})"), transition);
    }
    report.distribution("initial", mdp.initial());
    report.rewards(mdp.reward(), mdp.kernel(), &|row| {
        let (x, a) = mdp.row_key(row);
        format!("reward (state {x}, action {a})")
    });
    report.0
}

pub fn validate_mrp(mrp: &Mrp) -> Vec<Violation> {
    let mut report = Report(Vec::new());
    report.states(mrp.states().labels());
    report.gamma(mrp.gamma());
    for (x, transition) in mrp.kernel().iter().enumerate() {
        report.distribution(&format!("kernel row (state {x})"), transition);
    }
    report.distribution("initial", mrp.initial());
    report.rewards(mrp.reward(), mrp.kernel(), &|x| format!("reward (state {x})"));
    report.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::StateSpace;

    fn chain(row0: Vec<f64>, reward: RewardFunction) -> Mrp {
        Mrp::new(
            StateSpace::indexed(2),
            vec![row0, vec![1.0, 0.0]],
            reward,
            vec![1.0, 0.0],
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn clean_model_has_no_violations() {
        let m = chain(
            vec![0.5, 0.5],
            RewardFunction::DeterministicState(vec![1.0, 0.0]),
        );
        assert!(validate_mrp(&m).is_empty());
    }

    #[test]
    fn short_row_is_named() {
        let m = chain(
            vec![0.5, 0.4],
            RewardFunction::DeterministicState(vec![1.0, 0.0]),
        );
        let v = validate_mrp(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "kernel row (state 0)");
        assert!(v[0].message.contains("0.9"));
    }

    #[test]
    fn negative_probability_in_pmf() {
        let bad = Pmf::new([(1.0, 1.5), (2.0, -0.5)]);
        let m = chain(
            vec![0.5, 0.5],
            RewardFunction::StochasticState(vec![bad, Pmf::point(0.0)]),
        );
        let v = validate_mrp(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].message.contains("-0.5"));
    }

    #[test]
    fn missing_transition_reward_on_reachable_pair() {
        let m = chain(
            vec![0.5, 0.5],
            RewardFunction::DeterministicTransition(vec![vec![1.0, f64::NAN], vec![0.0, f64::NAN]]),
        );
        let v = validate_mrp(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "reward (state 0) -> 1");
    }

    #[test]
    fn gamma_outside_unit_interval() {
        let m = Mrp::new(
            StateSpace::indexed(1),
            vec![vec![1.0]],
            RewardFunction::DeterministicState(vec![1.0]),
            vec![1.0],
            1.0,
        )
        .unwrap();
        assert_eq!(validate_mrp(&m).len(), 1);
    }
}
