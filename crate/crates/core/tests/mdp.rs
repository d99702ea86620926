mod common;

use common::*;
use proptest::prelude::*;

use satrisk::mdp::io::{model_to_json, parse_model};
use satrisk::mdp::{induce_mrp, validate, validate_mdp, validate_mrp, Model, Policy};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_models_validate(m in any_kind().prop_flat_map(mdp)) {
        prop_assert!(validate_mdp(&m).is_empty());
    }

    #[test]
    fn induced_mrp_validates_and_keeps_expected_reward(
        (m, pi) in any_kind().prop_flat_map(mdp_with_policy),
    ) {
        let mrp = induce_mrp(&m, &pi).unwrap();
        prop_assert!(validate_mrp(&mrp).is_empty());
        for x in 0..m.n_states() {
            let want: f64 = pi
                .distribution(x)
                .into_iter()
                .map(|(a, p)| {
                    let row = m.row(x, a).unwrap();
                    p * m.reward().expected(row, m.transition(x, a))
                })
                .sum();
            let got = mrp.reward().expected(x, &mrp.kernel()[x]);
            prop_assert!((got - want).abs() < 1e-12, "state {x}: {got} vs {want}");
        }
    }

    #[test]
    fn point_mass_randomized_equals_deterministic(m in any_kind().prop_flat_map(mdp)) {
        let det = Policy::Deterministic(m.action_sets().iter().map(|s| s[0]).collect());
        let a = induce_mrp(&m, &det).unwrap();
        let b = induce_mrp(&m, &det.to_randomized()).unwrap();
        prop_assert_eq!(a.kernel(), b.kernel());
        for x in 0..m.n_states() {
            for y in 0..m.n_states() {
                if a.kernel()[x][y] > 0.0 {
                    prop_assert_eq!(a.reward().pmf(x, y), b.reward().pmf(x, y));
                }
            }
        }
    }

    #[test]
    fn json_round_trip(m in any_kind().prop_flat_map(mdp), r in any_kind().prop_flat_map(mrp)) {
        for model in [Model::Mdp(m), Model::Mrp(r)] {
            let text = model_to_json(&model);
            let back = parse_model(&text).unwrap();
            prop_assert!(validate(&back).is_empty());
            prop_assert_eq!(model_to_json(&back), text);
        }
    }
}

#[test]
fn broken_row_is_named() {
    let text = r#"{
        "states": ["a", "b"],
        "reward": {"kind": "DS", "entries": [{"state": 0, "value": 1}, {"state": 1, "value": 2}]},
        "kernel": [{"state": 0, "probs": [0.5, 0.4]}, {"state": 1, "probs": [0, 1]}],
        "initial": [1, 0],
        "gamma": 0.9
    }"#;
    let v = validate(&parse_model(text).unwrap());
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].to_string().contains("state 0"), "{}", v[0]);
}

#[test]
fn negative_probability_in_reward_pmf() {
    let text = r#"{
        "states": ["a"],
        "reward": {"kind": "SS", "entries": [{"state": 0, "pmf": [[1, 1.5], [2, -0.5]]}]},
        "kernel": [{"state": 0, "probs": [1]}],
        "initial": [1],
        "gamma": 0.9
    }"#;
    let v = validate(&parse_model(text).unwrap());
    assert_eq!(v.len(), 1, "{v:?}");
}
