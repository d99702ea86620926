use std::collections::{HashSet, VecDeque};

use super::{map_policy, AugmentedState, SatCase, SatResult, StateMap};
use crate::error::{Error, Result};
use crate::mdp::{induce_mrp, Mdp, Model, Mrp, Policy, RewardFunction, RewardKind, StateSpace};

/// Situations entered from one kernel row, each with its construction
/// probability `p(y|row)·r(j|row,y)`.
fn row_successors(
    reward: &RewardFunction,
    kernel_row: &[f64],
    row: usize,
    from: usize,
    action: Option<usize>,
) -> Vec<(AugmentedState, f64)> {
    let mut out = Vec::new();
    for (y, &p) in kernel_row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        for (j, q) in reward.pmf(row, y).support() {
            out.push((AugmentedState::situation(from, action, y, j), p * q));
        }
    }
    out
}

/// Closure of `seeds` under `expand`, in canonical state order.
fn reachable(
    seeds: impl IntoIterator<Item = AugmentedState>,
    expand: impl Fn(&AugmentedState) -> Vec<AugmentedState>,
) -> Result<StateMap> {
    let mut seen = HashSet::new();
    let mut found = Vec::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        if seen.insert(s.key()) {
            found.push(s);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for next in expand(&s) {
            if seen.insert(next.key()) {
                found.push(next);
                queue.push_back(next);
            }
        }
    }
    found.sort_by(|a, b| a.order(b));
    StateMap::new(found)
}

fn scatter(map: &StateMap, successors: &[(AugmentedState, f64)]) -> Vec<f64> {
    let mut row = vec![0.0; map.len()];
    for (s, p) in successors {
        let i = map.get(s).expect("successor is reachable");
        row[i] += p;
    }
    row
}

fn situation_reward(state: &AugmentedState, scale: f64) -> f64 {
    match *state {
        AugmentedState::Situation { reward, .. } => reward / scale,
        AugmentedState::Null { .. } => 0.0,
    }
}

/// Shared construction for cases 0 and 1: situations `(x, y, j)` with
/// `p†((y,y',j')|(x,y,j)) = p(y'|y)·r(j'|y,y')` and
/// `μ†((x,y,j)) = μ(x)·p(y|x)·r(j|x,y)`.
fn augment_mrp(mrp: &Mrp, case: SatCase) -> Result<SatResult> {
    let successors =
        |x: usize| row_successors(mrp.reward(), &mrp.kernel()[x], x, x, None);
    let seeds = (0..mrp.n_states())
        .filter(|&x| mrp.initial()[x] > 0.0)
        .flat_map(|x| successors(x).into_iter().map(|(s, _)| s));
    let map = reachable(seeds, |s| {
        successors(s.decision_state())
            .into_iter()
            .map(|(s, _)| s)
            .collect()
    })?;

    let kernel = map
        .iter()
        .map(|s| scatter(&map, &successors(s.decision_state())))
        .collect();
    let reward = map.iter().map(|s| situation_reward(s, 1.0)).collect();
    let mut initial = vec![0.0; map.len()];
    for x in 0..mrp.n_states() {
        let mu = mrp.initial()[x];
        if mu > 0.0 {
            for (s, p) in successors(x) {
                initial[map.get(&s).expect("seed is reachable")] += mu * p;
            }
        }
    }
    let model = Mrp::new(
        StateSpace::new(map.labels()),
        kernel,
        RewardFunction::DeterministicState(reward),
        initial,
        mrp.gamma(),
    )?;
    Ok(SatResult {
        case,
        model: Model::Mrp(model),
        state_map: map,
        compensated: false,
    })
}

/// Case 0: MRP with a deterministic transition-based reward. States are the
/// reachable transitions `(x, y)`, each carrying `r(x, y)`; there is no time
/// shift.
pub fn sat_case0(mrp: &Mrp) -> Result<SatResult> {
    if mrp.reward().kind() != RewardKind::DT {
        return Err(Error::WrongRewardKind {
            expected: "DT (deterministic transition-based) for case 0",
            found: mrp.reward().kind(),
        });
    }
    augment_mrp(mrp, SatCase::Case0)
}

/// Case 1: MRP with a stochastic (transition- or state-based) reward.
pub fn sat_case1(mrp: &Mrp) -> Result<SatResult> {
    if !mrp.reward().kind().is_stochastic() {
        return Err(Error::WrongRewardKind {
            expected: "SS or ST (stochastic) for case 1",
            found: mrp.reward().kind(),
        });
    }
    augment_mrp(mrp, SatCase::Case1)
}

/// The appropriate MRP transformation for the reward kind: case 0 for DT,
/// case 1 for SS/ST. DS rewards need no transformation and are rejected.
pub fn sat_for_mrp(mrp: &Mrp) -> Result<SatResult> {
    match mrp.reward().kind() {
        RewardKind::DT => sat_case0(mrp),
        RewardKind::SS | RewardKind::ST => sat_case1(mrp),
        RewardKind::DS => Err(Error::WrongRewardKind {
            expected: "a non-DS reward (DS needs no transformation)",
            found: RewardKind::DS,
        }),
    }
}

/// Upper bound `|S|²·|A|·max|J| + |S|` on the case-3 state count.
pub fn case3_state_bound(mdp: &Mdp) -> usize {
    let mut max_support = 0;
    for (row, transition) in mdp.kernel().iter().enumerate() {
        for (y, &p) in transition.iter().enumerate() {
            if p > 0.0 {
                max_support = max_support.max(mdp.reward().pmf(row, y).support_len());
            }
        }
    }
    let n = mdp.n_states();
    n * n * mdp.n_actions() * max_support + n
}

/// Case 3: an MDP with deterministic state-based reward over situations
/// `(x, a, y, j)` plus null states `w_x`, such that any policy on the
/// original maps (via [`map_policy`]) to one on the new MDP with the same
/// reward sequence, delayed by one epoch. Non-ST rewards are lifted to point
/// masses first. With `compensate`, situation rewards are `j / γ`.
pub fn sat_case3(mdp: &Mdp, compensate: bool) -> Result<SatResult> {
    let gamma = mdp.gamma();
    if compensate && !(gamma > 0.0) {
        return Err(Error::Compensation(gamma));
    }
    let scale = if compensate { gamma } else { 1.0 };
    let successors = |x: usize, a: usize| {
        let row = mdp.row(x, a).expect("action in A_x");
        row_successors(mdp.reward(), &mdp.kernel()[row], row, x, Some(a))
    };
    let expand = |s: &AugmentedState| -> Vec<AugmentedState> {
        let x = s.decision_state();
        mdp.actions(x)
            .iter()
            .flat_map(|&a| successors(x, a))
            .map(|(s, _)| s)
            .collect()
    };

    let seeds = (0..mdp.n_states())
        .filter(|&x| mdp.initial()[x] > 0.0)
        .map(|state| AugmentedState::Null { state });
    let reached = reachable(seeds, expand)?;
    // Null states for every state visited as a successor as well, so any
    // original start state has its surrogate. Their successors are already
    // present: they coincide with those of situations ending in that state.
    let mut nulls: Vec<usize> = reached
        .iter()
        .map(AugmentedState::decision_state)
        .collect();
    nulls.sort_unstable();
    nulls.dedup();
    let mut states: Vec<AugmentedState> = nulls
        .into_iter()
        .map(|state| AugmentedState::Null { state })
        .collect();
    states.extend(
        reached
            .iter()
            .filter(|s| matches!(s, AugmentedState::Situation { .. }))
            .copied(),
    );
    let map = StateMap::new(states)?;

    let mut actions = Vec::with_capacity(map.len());
    let mut kernel = Vec::new();
    let mut reward = Vec::new();
    for s in map.iter() {
        let x = s.decision_state();
        actions.push(mdp.actions(x).to_vec());
        for &a in mdp.actions(x) {
            kernel.push(scatter(&map, &successors(x, a)));
            reward.push(situation_reward(s, scale));
        }
    }
    let initial = map
        .iter()
        .map(|s| match *s {
            AugmentedState::Null { state } => mdp.initial()[state],
            AugmentedState::Situation { .. } => 0.0,
        })
        .collect();

    let model = Mdp::new(
        StateSpace::new(map.labels()),
        mdp.action_labels().to_vec(),
        actions,
        kernel,
        RewardFunction::DeterministicState(reward),
        initial,
        gamma,
    )?;
    debug_assert!(model.n_states() <= case3_state_bound(mdp));
    Ok(SatResult {
        case: SatCase::Case3,
        model: Model::Mdp(model),
        state_map: map,
        compensated: compensate,
    })
}

/// Case 2: an MDP under a (randomized) policy, as the case-3 MDP closed
/// under the mapped policy and restricted to reachable states.
pub fn sat_case2(mdp: &Mdp, policy: &Policy, compensate: bool) -> Result<SatResult> {
    policy.check(mdp)?;
    let full = sat_case3(mdp, compensate)?;
    let augmented = full.mdp().expect("case 3 yields an MDP");
    let mapped = map_policy(policy, &full.state_map)?;
    let induced = deterministic_state_reward(induce_mrp(augmented, &mapped)?)?;
    let (mrp, kept) = induced.restrict(&induced.reachable())?;
    Ok(SatResult {
        case: SatCase::Case2,
        model: Model::Mrp(mrp),
        state_map: full.state_map.restrict(&kept)?,
        compensated: compensate,
    })
}

/// The case-3 reward is action-independent, so closing it under a
/// randomized policy yields point-mass pmfs; fold them back to values.
fn deterministic_state_reward(mrp: Mrp) -> Result<Mrp> {
    let values = match mrp.reward() {
        RewardFunction::DeterministicState(_) => return Ok(mrp),
        RewardFunction::StochasticState(pmfs) => pmfs
            .iter()
            .map(|p| p.as_point())
            .collect::<Option<Vec<f64>>>(),
        _ => None,
    };
    match values {
        Some(v) => mrp.with_reward(RewardFunction::DeterministicState(v)),
        None => Err(Error::InvalidModel(
            "closed case-3 model does not have a deterministic state-based reward".into(),
        )),
    }
}
