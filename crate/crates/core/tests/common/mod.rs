//! Shared oracles and generators for the integration tests. Nothing here
//! calls into the code under test beyond constructors and the brute-force
//! enumerators.
#![allow(dead_code)]

use proptest::prelude::*;

use satrisk::evaluate::{NormalComponent, ReturnDistribution};
use satrisk::mdp::{Mdp, Mrp, Pmf, Policy, RewardFunction, StateSpace};

/// Inventory reward recomputed from the raw story: sell `min(D, x + a)`
/// units at 8 each, pay 4 + 2a to order (if ordering) and x to hold.
/// Returns `(next stock, reward)`.
pub fn inventory_outcome(x: usize, a: usize, demand: usize) -> (usize, f64) {
    let stock = x + a;
    let sold = demand.min(stock);
    let order = if a > 0 { 4.0 + 2.0 * a as f64 } else { 0.0 };
    (stock - sold, 8.0 * sold as f64 - order - x as f64)
}

pub const DEMAND: [f64; 3] = [0.25, 0.5, 0.25];

/// Atom-by-atom comparison: same number of atoms, values within
/// `value_tol`, probabilities within `prob_tol`.
pub fn pmfs_match(a: &Pmf, b: &Pmf, value_tol: f64, prob_tol: f64) -> Result<(), String> {
    if a.atoms().len() != b.atoms().len() {
        return Err(format!(
            "atom counts differ: {} vs {}\n{:?}\n{:?}",
            a.atoms().len(),
            b.atoms().len(),
            a.atoms(),
            b.atoms()
        ));
    }
    for (x, y) in a.atoms().iter().zip(b.atoms()) {
        if (x.0 - y.0).abs() > value_tol || (x.1 - y.1).abs() > prob_tol {
            return Err(format!("atom {x:?} vs {y:?}"));
        }
    }
    Ok(())
}

/// Pmf with every value multiplied by `c`.
pub fn scale_pmf(p: &Pmf, c: f64) -> Pmf {
    Pmf::new(p.atoms().iter().map(|&(v, q)| (v * c, q)))
}

/// A pmf as a step-function distribution (zero-variance components).
pub fn pmf_distribution(p: &Pmf) -> ReturnDistribution {
    ReturnDistribution::Analytic {
        components: p
            .support()
            .map(|(v, q)| NormalComponent {
                weight: q,
                mean: v,
                variance: 0.0,
            })
            .collect(),
    }
}

/// Sample mean, variance, and their standard errors.
pub struct MomentEstimate {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
}

pub fn moments(samples: &[f64]) -> MomentEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let m4 = samples.iter().map(|s| (s - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    MomentEstimate {
        mean,
        variance,
        se_mean: (variance / n).sqrt(),
        se_variance: ((m4 - m2 * m2) / n).sqrt(),
    }
}

// ---- random model generators -------------------------------------------

fn normalise(weights: Vec<u8>) -> Vec<f64> {
    let mut w: Vec<f64> = weights.into_iter().map(f64::from).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn prob_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u8..4, n).prop_map(normalise)
}

/// Small integer-valued reward pmf with 1–2 atoms.
pub fn reward_pmf() -> impl Strategy<Value = Pmf> {
    prop::collection::vec((-3i32..4, 1u8..4), 1..3).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| f64::from(a.1)).sum();
        Pmf::new(atoms.into_iter().map(|(v, w)| (f64::from(v), f64::from(w) / total)))
    })
}

pub fn reward_value() -> impl Strategy<Value = f64> {
    (-3i32..4).prop_map(f64::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    DS,
    DT,
    SS,
    ST,
}

pub fn reward_for(kind: Kind, rows: usize, n: usize) -> BoxedStrategy<RewardFunction> {
    match kind {
        Kind::DS => prop::collection::vec(reward_value(), rows)
            .prop_map(RewardFunction::DeterministicState)
            .boxed(),
        Kind::DT => prop::collection::vec(prop::collection::vec(reward_value(), n), rows)
            .prop_map(RewardFunction::DeterministicTransition)
            .boxed(),
        Kind::SS => prop::collection::vec(reward_pmf(), rows)
            .prop_map(RewardFunction::StochasticState)
            .boxed(),
        Kind::ST => prop::collection::vec(prop::collection::vec(reward_pmf(), n), rows)
            .prop_map(RewardFunction::StochasticTransition)
            .boxed(),
    }
}

pub fn any_kind() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::DS), Just(Kind::DT), Just(Kind::SS), Just(Kind::ST)]
}

pub fn gamma() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(0.9), Just(0.95)]
}

pub fn mrp(kind: Kind) -> impl Strategy<Value = Mrp> {
    (1usize..4).prop_flat_map(move |n| {
        (
            prop::collection::vec(prob_vector(n), n),
            reward_for(kind, n, n),
            prob_vector(n),
            gamma(),
        )
            .prop_map(move |(kernel, reward, initial, g)| {
                Mrp::new(StateSpace::indexed(n), kernel, reward, initial, g).unwrap()
            })
    })
}

/// MDP with 1–3 states, 2 global actions, and 1–2 allowed per state.
pub fn mdp(kind: Kind) -> impl Strategy<Value = Mdp> {
    (1usize..4)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(
                    prop_oneof![Just(vec![0usize]), Just(vec![1]), Just(vec![0, 1])],
                    n,
                ),
            )
        })
        .prop_flat_map(move |(n, actions)| {
            let rows: usize = actions.iter().map(Vec::len).sum();
            (
                Just(n),
                Just(actions),
                prop::collection::vec(prob_vector(n), rows),
                reward_for(kind, rows, n),
                prob_vector(n),
                gamma(),
            )
        })
        .prop_map(|(n, actions, kernel, reward, initial, g)| {
            Mdp::new(
                StateSpace::indexed(n),
                vec!["a".into(), "b".into()],
                actions,
                kernel,
                reward,
                initial,
                g,
            )
            .unwrap()
        })
}

/// Deterministic or randomized policy for `mdp`.
pub fn policy_for(mdp: &Mdp) -> impl Strategy<Value = Policy> {
    let sets: Vec<Vec<usize>> = mdp.action_sets().to_vec();
    let det = sets
        .iter()
        .map(|s| prop::sample::select(s.clone()))
        .collect::<Vec<_>>()
        .prop_map(Policy::Deterministic);
    let rnd = sets
        .iter()
        .map(|s| {
            let s = s.clone();
            prob_vector(s.len()).prop_map(move |p| s.iter().copied().zip(p).collect::<Vec<_>>())
        })
        .collect::<Vec<_>>()
        .prop_map(Policy::Randomized);
    prop_oneof![det, rnd]
}

pub fn mdp_with_policy(kind: Kind) -> impl Strategy<Value = (Mdp, Policy)> {
    mdp(kind).prop_flat_map(|m| {
        let p = policy_for(&m);
        (Just(m), p)
    })
}
