use super::{Mdp, Mrp, Pmf, Policy, RewardFunction};
use crate::error::Result;

/// Closes `mdp` under a stationary policy.
///
/// A deterministic policy keeps the reward kind, with the action fixed. A
/// randomized policy mixes kernels, and the reward becomes stochastic: the
/// pmf for `(x, y)` weights each action by `π(a|x)·p(y|x,a) / p_π(y|x)`.
/// State-based rewards stay state-based (mixed with weights `π(a|x)`) only
/// when that loses nothing, i.e. when the reward pmf or the transition row
/// is the same for every action in the policy's support at `x`; otherwise
/// the reward would be correlated with the successor through the action and
/// the result is transition-based.
pub fn induce_mrp(mdp: &Mdp, policy: &Policy) -> Result<Mrp> {
    policy.check(mdp)?;
    let n = mdp.n_states();
    match policy {
        Policy::Deterministic(chosen) => {
            let rows: Vec<usize> = (0..n)
                .map(|x| mdp.row(x, chosen[x]).expect("policy checked"))
                .collect();
            let kernel = rows.iter().map(|&row| mdp.kernel()[row].clone()).collect();
            let reward = match mdp.reward() {
                RewardFunction::DeterministicState(r) => {
                    RewardFunction::DeterministicState(rows.iter().map(|&i| r[i]).collect())
                }
                RewardFunction::DeterministicTransition(r) => RewardFunction::DeterministicTransition(
                    rows.iter().map(|&i| r[i].clone()).collect(),
                ),
                RewardFunction::StochasticState(r) => {
                    RewardFunction::StochasticState(rows.iter().map(|&i| r[i].clone()).collect())
                }
                RewardFunction::StochasticTransition(r) => RewardFunction::StochasticTransition(
                    rows.iter().map(|&i| r[i].clone()).collect(),
                ),
            };
            Mrp::new(
                mdp.states().clone(),
                kernel,
                reward,
                mdp.initial().to_vec(),
                mdp.gamma(),
            )
        }
        Policy::Randomized(_) => {
            // (row, π(a|x)) over the policy support at each state
            let support: Vec<Vec<(usize, f64)>> = (0..n)
                .map(|x| {
                    policy
                        .distribution(x)
                        .into_iter()
                        .map(|(a, w)| (mdp.row(x, a).expect("policy checked"), w))
                        .collect()
                })
                .collect();
            let kernel: Vec<Vec<f64>> = support
                .iter()
                .map(|rows| {
                    let mut mixed = vec![0.0; n];
                    for &(row, w) in rows {
                        for (y, &p) in mdp.kernel()[row].iter().enumerate() {
                            mixed[y] += w * p;
                        }
                    }
                    mixed
                })
                .collect();

            let state_based = !mdp.reward().kind().is_transition_based();
            let decouples = |x: usize| {
                let rows = &support[x];
                let first = rows[0].0;
                let same_reward = rows
                    .iter()
                    .all(|&(row, _)| mdp.reward().pmf(row, 0) == mdp.reward().pmf(first, 0));
                let same_kernel = rows
                    .iter()
                    .all(|&(row, _)| mdp.kernel()[row] == mdp.kernel()[first]);
                same_reward || same_kernel
            };

            let reward = if state_based && (0..n).all(decouples) {
                RewardFunction::StochasticState(
                    support
                        .iter()
                        .map(|rows| {
                            let pmfs: Vec<(f64, Pmf)> = rows
                                .iter()
                                .map(|&(row, w)| (w, mdp.reward().pmf(row, 0)))
                                .collect();
                            Pmf::mixture(pmfs.iter().map(|(w, p)| (*w, p)))
                        })
                        .collect(),
                )
            } else {
                RewardFunction::StochasticTransition(
                    (0..n)
                        .map(|x| {
                            (0..n)
                                .map(|y| {
                                    let p_xy = kernel[x][y];
                                    if p_xy <= 0.0 {
                                        return Pmf::default();
                                    }
                                    let parts: Vec<(f64, Pmf)> = support[x]
                                        .iter()
                                        .filter(|&&(row, _)| mdp.kernel()[row][y] > 0.0)
                                        .map(|&(row, w)| {
                                            (w * mdp.kernel()[row][y] / p_xy, mdp.reward().pmf(row, y))
                                        })
                                        .collect();
                                    Pmf::mixture(parts.iter().map(|(w, p)| (*w, p)))
                                })
                                .collect()
                        })
                        .collect(),
                )
            };
            Mrp::new(
                mdp.states().clone(),
                kernel,
                reward,
                mdp.initial().to_vec(),
                mdp.gamma(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::mdp::{validate_mrp, StateSpace};

    // Two states, two actions at state 0 with distinct DT rewards.
    fn fork() -> Mdp {
        Mdp::new(
            StateSpace::indexed(2),
            vec!["left".into(), "right".into()],
            vec![vec![0, 1], vec![0]],
            vec![vec![0.5, 0.5], vec![0.0, 1.0], vec![1.0, 0.0]],
            RewardFunction::DeterministicTransition(vec![
                vec![1.0, 2.0],
                vec![0.0, 10.0],
                vec![-1.0, 0.0],
            ]),
            vec![1.0, 0.0],
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn randomized_mixture_is_weighted_by_joint_probability() {
        let mdp = fork();
        let pi = Policy::Randomized(vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 1.0)]]);
        let mrp = induce_mrp(&mdp, &pi).unwrap();
        assert!(validate_mrp(&mrp).is_empty());
        assert_eq!(mrp.kernel()[0], vec![0.25, 0.75]);
        let RewardFunction::StochasticTransition(r) = mrp.reward() else {
            panic!("expected ST reward");
        };
        // (0 -> 0) only via action 0
        assert_eq!(r[0][0].atoms(), &[(1.0, 1.0)]);
        // (0 -> 1): action 0 contributes 0.25, action 1 contributes 0.5
        let pmf = &r[0][1];
        assert!((pmf.total() - 1.0).abs() < 1e-15);
        assert!((pmf.prob_of(2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((pmf.prob_of(10.0) - 2.0 / 3.0).abs() < 1e-15);
        // mean one-step reward: 0.5·(0.5·1 + 0.5·2) + 0.5·10
        let mean = mrp.reward().expected(0, &mrp.kernel()[0]);
        assert!((mean - 5.75).abs() < 1e-12);
    }

    #[test]
    fn point_mass_randomized_equals_deterministic() {
        let mdp = fork();
        let det = Policy::Deterministic(vec![1, 0]);
        let a = induce_mrp(&mdp, &det).unwrap();
        let b = induce_mrp(&mdp, &det.to_randomized()).unwrap();
        assert_eq!(a.kernel(), b.kernel());
        for x in 0..2 {
            for y in 0..2 {
                if a.kernel()[x][y] > 0.0 {
                    assert_eq!(a.reward().pmf(x, y), b.reward().pmf(x, y));
                }
            }
        }
    }

    #[test]
    fn deterministic_keeps_state_based_values() {
        let mdp = fork()
            .with_reward(RewardFunction::DeterministicState(vec![3.0, 4.0, 5.0]))
            .unwrap();
        let mrp = induce_mrp(&mdp, &Policy::Deterministic(vec![1, 0])).unwrap();
        assert_eq!(mrp.state_rewards().unwrap(), &[4.0, 5.0]);
    }

    #[test]
    fn state_based_reward_coupled_through_action_becomes_transition_based() {
        let mdp = fork()
            .with_reward(RewardFunction::DeterministicState(vec![3.0, 4.0, 5.0]))
            .unwrap();
        let pi = Policy::Randomized(vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 1.0)]]);
        let mrp = induce_mrp(&mdp, &pi).unwrap();
        assert_eq!(mrp.reward().kind(), crate::mdp::RewardKind::ST);
        // reaching state 0 implies action 0 was taken
        assert_eq!(mrp.reward().pmf(0, 0).atoms(), &[(3.0, 1.0)]);
    }

    #[test]
    fn state_based_reward_with_shared_kernel_stays_state_based() {
        let mdp = Mdp::new(
            StateSpace::indexed(1),
            vec!["a".into(), "b".into()],
            vec![vec![0, 1]],
            vec![vec![1.0], vec![1.0]],
            RewardFunction::DeterministicState(vec![1.0, -1.0]),
            vec![1.0],
            0.5,
        )
        .unwrap();
        let mrp = induce_mrp(&mdp, &Policy::uniform(&mdp)).unwrap();
        let RewardFunction::StochasticState(r) = mrp.reward() else {
            panic!("expected SS reward");
        };
        assert_eq!(r[0].atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn action_outside_allowable_set_is_rejected() {
        let err = induce_mrp(&fork(), &Policy::Deterministic(vec![0, 1])).unwrap_err();
        assert!(matches!(err, Error::InvalidPolicy(_)));
    }
}
