mod common;

use common::*;
use proptest::prelude::*;

use satrisk::evaluate::{
    analytic_distribution, linspace, occupancy_mean, policy_distribution, sobel, var_function, var_quantile,
    var_threshold, Cdf, GridSpec, Pipeline, RESIDUAL_TOL,
};
use satrisk::evaluate::linalg::{identity_minus, max_abs};
use satrisk::inventory::{build_inventory_mdp, InventoryParams};
use satrisk::mdp::{induce_mrp, Mdp, Policy, RewardFunction, StateSpace};
use satrisk::simulate::{empirical_distribution, SimConfig};
use satrisk::Error;

fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| (0..n).map(|k| a[i * n + k] * x[k]).sum()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sobel_solves_both_systems(m in mrp(Kind::DS)) {
        let s = sobel(&m).unwrap();
        let r = m.state_rewards().unwrap();
        let n = m.n_states();
        let lhs = matvec(&identity_minus(m.kernel(), m.gamma()), &s.v);
        let res: Vec<f64> = lhs.iter().zip(r).map(|(a, b)| a - b).collect();
        prop_assert!(max_abs(&res) <= RESIDUAL_TOL);
        let lhs = matvec(&identity_minus(m.kernel(), m.gamma() * m.gamma()), &s.psi);
        // clamping can only move ψ by the slack
        let res: Vec<f64> = lhs.iter().zip(&s.theta).map(|(a, b)| a - b).collect();
        prop_assert!(max_abs(&res) <= 1e-6, "{res:?}");
        prop_assert!(s.psi.iter().all(|&p| p >= 0.0));
        prop_assert_eq!(s.v.len(), n);
    }

    #[test]
    fn occupancy_mean_agrees(m in mrp(Kind::DS)) {
        let a = sobel(&m).unwrap().mean(m.initial());
        let b = occupancy_mean(&m).unwrap();
        prop_assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn analytic_cdf_is_monotone(m in mrp(Kind::DS)) {
        let d = analytic_distribution(&m).unwrap();
        let w: f64 = d.components().unwrap().iter().map(|c| c.weight).sum();
        prop_assert!((w - 1.0).abs() < 1e-9);
        let (lo, hi) = d.span(6.0);
        let grid = linspace(lo - 1.0, hi + 1.0, 400);
        let values: Vec<f64> = grid.iter().map(|&t| d.cdf(t)).collect();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(values[0] < 1e-6 && values[values.len() - 1] > 1.0 - 1e-6);
    }

    #[test]
    fn var_function_is_a_lower_envelope(
        m in prop_oneof![mdp(Kind::DT), mdp(Kind::ST), mdp(Kind::DS)],
        simplify in any::<bool>(),
    ) {
        let pipeline = if simplify { Pipeline::Simplify } else { Pipeline::Transform };
        let vf = var_function(&m, &GridSpec::Auto(200), pipeline, 1000).unwrap();
        prop_assert!(vf.values.windows(2).all(|w| w[0] <= w[1]));
        for (k, &t) in vf.grid.iter().enumerate() {
            for d in &vf.distributions {
                prop_assert!(vf.values[k] <= d.cdf(t));
            }
            prop_assert_eq!(vf.values[k], vf.distributions[vf.argmin[k]].cdf(t));
        }
    }
}

#[test]
fn two_state_alternating_closed_form() {
    let m = satrisk::mdp::Mrp::new(
        StateSpace::indexed(2),
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        RewardFunction::DeterministicState(vec![0.0, 1.0]),
        vec![1.0, 0.0],
        0.5,
    )
    .unwrap();
    let s = sobel(&m).unwrap();
    let g: f64 = 0.5;
    assert!((s.v[0] - g / (1.0 - g * g)).abs() < 1e-10);
    assert!((s.v[1] - 1.0 / (1.0 - g * g)).abs() < 1e-10);
}

#[test]
fn constant_reward_inventory_sized_chain() {
    let mdp = build_inventory_mdp(&InventoryParams::default()).unwrap();
    let mrp = induce_mrp(&mdp, &Policy::Deterministic(vec![2, 1, 0])).unwrap();
    let c = mrp.with_reward(RewardFunction::DeterministicState(vec![3.0; 3])).unwrap();
    let s = sobel(&c).unwrap();
    for x in 0..3 {
        assert!((s.v[x] - 60.0).abs() < 1e-9);
        assert_eq!(s.psi[x], 0.0);
    }
}

#[test]
fn sobel_rejects_stochastic_rewards() {
    let mdp = build_inventory_mdp(&InventoryParams::default()).unwrap();
    let mrp = induce_mrp(&mdp, &Policy::uniform(&mdp)).unwrap();
    assert!(matches!(sobel(&mrp), Err(Error::WrongRewardKind { .. })));
}

#[test]
fn simplified_distribution_is_narrower_for_order_up_to() {
    let mdp = build_inventory_mdp(&InventoryParams::default()).unwrap();
    let pi = Policy::Deterministic(vec![2, 1, 0]);
    let t = policy_distribution(&mdp, &pi, Pipeline::Transform).unwrap();
    let s = policy_distribution(&mdp, &pi, Pipeline::Simplify).unwrap();
    assert_eq!(s.components().unwrap().len(), 1);
    assert!(s.variance() < t.variance());
    assert!((s.mean() - t.mean()).abs() < 1e-8);
}

#[test]
fn inventory_has_six_policies() {
    let mdp = build_inventory_mdp(&InventoryParams::default()).unwrap();
    assert_eq!(mdp.deterministic_policy_count(), 6);
    let vf = var_function(&mdp, &GridSpec::default(), Pipeline::Transform, 10).unwrap();
    assert_eq!(vf.policies.len(), 6);
    assert!(matches!(
        var_function(&mdp, &GridSpec::default(), Pipeline::Transform, 5),
        Err(Error::CapExceeded { .. })
    ));
}

#[test]
fn single_policy_var_function_is_its_cdf() {
    let m = Mdp::new(
        StateSpace::indexed(2),
        vec!["go".into()],
        vec![vec![0], vec![0]],
        vec![vec![0.3, 0.7], vec![0.6, 0.4]],
        RewardFunction::DeterministicTransition(vec![vec![1.0, -1.0], vec![2.0, 0.0]]),
        vec![1.0, 0.0],
        0.9,
    )
    .unwrap();
    let vf = var_function(&m, &GridSpec::Auto(64), Pipeline::Transform, 10).unwrap();
    let d = policy_distribution(&m, &Policy::Deterministic(vec![0, 0]), Pipeline::Transform).unwrap();
    for (k, &t) in vf.grid.iter().enumerate() {
        assert_eq!(vf.values[k], d.cdf(t));
    }
}

#[test]
fn threshold_and_quantile_are_dual() {
    let mdp = build_inventory_mdp(&InventoryParams::default()).unwrap();
    let vf = var_function(&mdp, &GridSpec::Auto(4096), Pipeline::Transform, 10).unwrap();
    for alpha in [0.05, 0.1, 0.25, 0.5, 0.75] {
        let rho = var_threshold(&vf, alpha).unwrap();
        let eta = var_quantile(&vf, rho).unwrap();
        assert!((eta - alpha).abs() < 1e-3, "α={alpha}: η={eta}");
    }
    assert_eq!(var_threshold(&vf, 0.0).unwrap(), vf.grid[vf.grid.len() - 1]);
    assert_eq!(var_quantile(&vf, vf.grid[0]).unwrap(), 1.0 - vf.values[0]);
    assert!(matches!(var_quantile(&vf, vf.grid[0] - 1.0), Err(Error::OutOfRange { .. })));
}

#[test]
fn median_threshold_matches_simulated_median() {
    let mdp = build_inventory_mdp(&InventoryParams::default()).unwrap();
    let vf = var_function(&mdp, &GridSpec::Auto(4096), Pipeline::Transform, 10).unwrap();
    let rho = var_threshold(&vf, 0.5).unwrap();
    // the argmin policy at the crossing
    let k = vf.grid.partition_point(|&t| t <= rho).saturating_sub(1);
    let policy = &vf.policies[vf.argmin[k]];
    let mrp = induce_mrp(&mdp, policy).unwrap();
    let cfg = SimConfig {
        horizon: 1000,
        trajectories_per_batch: 100,
        batches: 100,
        seed: 99,
    };
    let e = empirical_distribution(&mrp, &cfg).unwrap();
    let samples = e.batches.concat();
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let est = moments(&samples);
    // asymptotic standard error of a sample median under normality
    let se = (std::f64::consts::PI / 2.0).sqrt() * est.variance.sqrt() / (samples.len() as f64).sqrt();
    assert!((rho - median).abs() < 2.0 * se, "ρ₀.₅={rho}, median={median}, se={se}");
}
