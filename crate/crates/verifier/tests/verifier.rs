mod support;

use proptest::prelude::*;
use support::*;
use vspec_core::marabou::Verdict;
use vspec_core::query::{LinearQuery, MetaNetwork, Relation};
use vspec_core::scalar::{int, rat};
use vspec_verifier::*;

#[test]
fn identity_network_unrolls_to_two_relus() {
    let net = fixture_network("identity.vnet");
    let ctx = context(&[("f", net.clone())]);
    let q = single_app_query("f", &net, vec![]);
    let s = unroll_meta_network(&q, &ctx).unwrap();
    assert_eq!((s.total_inputs, s.total_outputs), (1, 1));
    assert_eq!(s.hidden_count(), 4);
    assert_eq!(s.relus.len(), 2);
}

#[test]
fn affine_only_network_has_no_relus() {
    let net = vspec_core::network::NetworkModel::new(
        1,
        vec![vspec_core::network::Layer::Affine { weights: vec![vec![int(2)]], bias: vec![int(1)] }],
    )
    .unwrap();
    let ctx = context(&[("g", net.clone())]);
    let q = single_app_query("g", &net, vec![constraint(&[(y(0), int(1))], Relation::Eq, int(5))]);
    assert!(unroll_meta_network(&q, &ctx).unwrap().relus.is_empty());
    let (v, _) = check_query(&q, &ctx, &CheckOptions::default()).unwrap();
    assert_eq!(v, Verdict::Sat([(x(0), int(2)), (y(0), int(5))].into_iter().collect()));
}

#[test]
fn two_applications_double_the_relu_nodes() {
    let hidden: Vec<(Vec<i64>, i64)> = (0..8).map(|i| (vec![1, i - 4], 0)).collect();
    let net = two_layer(2, &hidden, &[1; 8], 0);
    let ctx = context(&[("f", net.clone())]);
    let mut meta = MetaNetwork::default();
    meta.push("f", 2, 1);
    meta.push("f", 2, 1);
    let q = LinearQuery { index: 1, constraints: vec![], meta };
    assert_eq!(unroll_meta_network(&q, &ctx).unwrap().relus.len(), 16);
}

#[test]
fn identity_queries() {
    let net = fixture_network("identity.vnet");
    let ctx = context(&[("f", net.clone())]);
    let ge1 = constraint(&[(x(0), int(1))], Relation::Ge, int(1));
    let unsat = single_app_query("f", &net, vec![ge1.clone(), constraint(&[(y(0), int(1))], Relation::Le, int(0))]);
    assert_eq!(check_query(&unsat, &ctx, &CheckOptions::default()).unwrap().0, Verdict::Unsat);
    let bounded = single_app_query(
        "f",
        &net,
        vec![ge1.clone(), constraint(&[(x(0), int(1))], Relation::Le, int(5)), constraint(&[(y(0), int(1))], Relation::Le, int(0))],
    );
    assert_eq!(grid_oracle(&bounded, &ctx, 8).unwrap(), None);
    let sat = single_app_query("f", &net, vec![ge1, constraint(&[(y(0), int(1))], Relation::Ge, int(1))]);
    let Verdict::Sat(w) = check_query(&sat, &ctx, &CheckOptions::default()).unwrap().0 else { panic!() };
    assert_eq!(w[&y(0)], w[&x(0)]);
    assert!(witness_is_valid(&sat, &ctx, &w));
}

#[test]
fn phase_fixed_by_bounds() {
    let net = fixture_network("identity.vnet");
    let ctx = context(&[("f", net.clone())]);
    let q = single_app_query("f", &net, input_box(&[(1, 2)]));
    let s = unroll_meta_network(&q, &ctx).unwrap();
    let bounds = bound_propagation(&q, &ctx, &s).unwrap();
    assert!(bounds[s.relus[0].pre].nonnegative());
    assert!(bounds[s.relus[1].pre].nonpositive());
    let (_, stats) = check_query(&q, &ctx, &CheckOptions::default()).unwrap();
    assert_eq!(stats.unfixed, 0);
    let open = single_app_query("f", &net, vec![]);
    let (_, stats) = check_query(&open, &ctx, &CheckOptions::default()).unwrap();
    assert_eq!(stats.unfixed, 2);
}

fn running_example(net_file: &str) -> (vspec_core::network::NetworkContext, Vec<LinearQuery>) {
    let net = fixture_network(net_file);
    let ctx = context(&[("controller", net.clone())]);
    let terms = [(y(0), int(1)), (x(0), int(2)), (x(1), int(-1))];
    let bounds = vec![(-13, 4), (13, 4)];
    let mut box_constraints = Vec::new();
    for i in 0..2 {
        box_constraints.push(constraint(&[(x(i), int(1))], Relation::Ge, rat(bounds[0].0, bounds[0].1)));
        box_constraints.push(constraint(&[(x(i), int(1))], Relation::Le, rat(bounds[1].0, bounds[1].1)));
    }
    let mut q1 = box_constraints.clone();
    q1.push(constraint(&terms, Relation::Le, rat(-5, 4)));
    let mut q2 = box_constraints;
    q2.push(constraint(&terms, Relation::Ge, rat(5, 4)));
    let queries = vec![single_app_query("controller", &net, q1), single_app_query("controller", &net, q2)];
    (ctx, queries)
}

#[test]
fn handcrafted_controller_is_safe() {
    let (ctx, queries) = running_example("controller.vnet");
    for q in &queries {
        let (v, stats) = check_query(q, &ctx, &CheckOptions::default()).unwrap();
        assert_eq!(v, Verdict::Unsat);
        assert!(stats.lp_count <= 16);
        assert_eq!(grid_oracle(q, &ctx, 26).unwrap(), None);
    }
}

#[test]
fn zero_controller_is_unsafe() {
    let (ctx, queries) = running_example("zero.vnet");
    let Verdict::Sat(w) = check_query(&queries[1], &ctx, &CheckOptions::default()).unwrap().0 else { panic!() };
    assert!(witness_is_valid(&queries[1], &ctx, &w));
    let oracle = grid_oracle(&queries[1], &ctx, 2).unwrap().expect("grid witness");
    assert!(&oracle[&x(0)] * int(2) - &oracle[&x(1)] >= rat(5, 4));
}

#[test]
fn unbounded_input_is_reported() {
    let net = fixture_network("identity.vnet");
    let ctx = context(&[("f", net.clone())]);
    let q = single_app_query("f", &net, vec![constraint(&[(x(0), int(1))], Relation::Ge, int(0))]);
    assert_eq!(grid_oracle(&q, &ctx, 4), Err(VerifyError::UnboundedInput("x0".into())));
}

#[test]
fn budget_is_enforced() {
    let net = fixture_network("controller.vnet");
    let ctx = context(&[("c", net.clone())]);
    let q = single_app_query("c", &net, vec![]);
    let opts = CheckOptions { phase_budget: 3, ..CheckOptions::default() };
    assert_eq!(check_query(&q, &ctx, &opts), Err(VerifyError::PhaseBudgetExceeded { unfixed: 4, budget: 3 }));
}

#[test]
fn parallel_search_reports_the_same_witness() {
    let (ctx, queries) = running_example("zero.vnet");
    let serial = check_query(&queries[0], &ctx, &CheckOptions::default()).unwrap().0;
    let parallel = check_query(&queries[0], &ctx, &CheckOptions { jobs: 4, ..CheckOptions::default() }).unwrap().0;
    assert_eq!(serial, parallel);
}

fn arb_instance() -> impl Strategy<Value = (vspec_core::network::Network, LinearQuery)> {
    (1usize..=2, 1usize..=6).prop_flat_map(|(inputs, hidden)| {
        (
            prop::collection::vec((prop::collection::vec(-3i64..=3, inputs), -3i64..=3), hidden),
            prop::collection::vec(-3i64..=3, hidden),
            -3i64..=3,
            prop::collection::vec((-3i64..=0, 0i64..=3), inputs),
            prop::collection::vec(-3i64..=3, inputs + 1),
            0usize..5,
            -6i64..=6,
        )
            .prop_map(move |(h, out, ob, boxes, coeffs, rel, k)| {
                let net = two_layer(inputs, &h, &out, ob);
                let mut cs = input_box(&boxes);
                let mut terms = vec![(y(0), int(coeffs[0]))];
                terms.extend((0..inputs).map(|i| (x(i), int(coeffs[i + 1]))));
                terms.retain(|(_, c)| *c != int(0));
                if terms.is_empty() {
                    terms.push((y(0), int(1)));
                }
                let relation = [Relation::Le, Relation::Lt, Relation::Ge, Relation::Gt, Relation::Eq][rel];
                cs.push(constraint(&terms, relation, int(k)));
                let q = single_app_query("f", &net, cs);
                (net, q)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verifier_agrees_with_grid_oracle((net, q) in arb_instance()) {
        let ctx = context(&[("f", net)]);
        let (v, _) = check_query(&q, &ctx, &CheckOptions::default()).unwrap();
        let oracle = grid_oracle(&q, &ctx, 6).unwrap();
        match v {
            Verdict::Sat(w) => prop_assert!(witness_is_valid(&q, &ctx, &w)),
            Verdict::Unsat => prop_assert!(oracle.is_none()),
        }
    }

    #[test]
    fn pruning_does_not_change_verdicts((net, q) in arb_instance()) {
        let ctx = context(&[("f", net)]);
        let on = check_query(&q, &ctx, &CheckOptions::default()).unwrap().0;
        let off = check_query(&q, &ctx, &CheckOptions { bound_propagation: false, ..CheckOptions::default() }).unwrap().0;
        prop_assert_eq!(matches!(on, Verdict::Sat(_)), matches!(off, Verdict::Sat(_)));
    }

    #[test]
    fn unsat_queries_try_every_phase((net, q) in arb_instance()) {
        let ctx = context(&[("f", net)]);
        let opts = CheckOptions { bound_propagation: false, ..CheckOptions::default() };
        let (v, stats) = check_query(&q, &ctx, &opts).unwrap();
        if v == Verdict::Unsat {
            prop_assert_eq!(stats.lp_count, 1usize << stats.unfixed);
        }
    }

    #[test]
    fn verdicts_are_deterministic((net, q) in arb_instance()) {
        let ctx = context(&[("f", net)]);
        let a = check_query(&q, &ctx, &CheckOptions::default()).unwrap();
        let b = check_query(&q, &ctx, &CheckOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
