use distauto::graph::*;
use distauto::machine::StateId;
use distauto::popproto::*;
use distauto::verdict::Outcome;
use proptest::prelude::*;

fn black_count(g: &LabeledGraph) -> usize {
    (0..g.n()).filter(|&v| g.label(v) == "black").count()
}

fn bw_labelings(g: &LabeledGraph) -> Vec<LabeledGraph> {
    labelings(g, &["white", "black"])
}

#[test]
fn complete_graphs_follow_their_predicates() {
    let parity = parity_protocol();
    for n in 2..=4 {
        for g in bw_labelings(&complete(n).unwrap()) {
            let k = black_count(&g);
            assert_eq!(pp_decide(&parity, &g).unwrap().outcome, Outcome::from_bool(k % 2 == 0), "parity K{n} k={k}");
            for c in 1..=4 {
                let pp = threshold_protocol(c).unwrap();
                assert_eq!(pp_decide(&pp, &g).unwrap().outcome, Outcome::from_bool(k >= c), "threshold-{c} K{n} k={k}");
            }
        }
    }
}

#[test]
fn threshold_one_detects_black_on_small_graphs() {
    let pp = threshold_protocol(1).unwrap();
    for g in enumerate_connected(4) {
        for g in bw_labelings(&g) {
            assert_eq!(pp_decide(&pp, &g).unwrap().outcome, Outcome::from_bool(black_count(&g) > 0));
        }
    }
}

#[test]
fn sparse_graph_cases() {
    let star = generate_star(2).unwrap().relabeled(&["white", "black"], &[0, 1, 0]);
    assert_eq!(pp_decide(&threshold_protocol(2).unwrap(), &star).unwrap().outcome, Outcome::Reject);
    let p3 = path(3).unwrap().relabeled(&["white", "black"], &[1, 0, 1]);
    assert_eq!(pp_decide(&parity_protocol(), &p3).unwrap().outcome, Outcome::Accept);
    let c4 = cycle(4).unwrap().relabeled(&["white", "black"], &[1, 1, 1, 0]);
    assert_eq!(pp_decide(&parity_protocol(), &c4).unwrap().outcome, Outcome::Reject);
}

#[test]
fn step_updates_only_the_pair() {
    let pp = threshold_protocol(3).unwrap();
    let g = path(3).unwrap().relabeled(&["white", "black"], &[1, 1, 0]);
    let c = pp_initial(&pp, &g).unwrap();
    assert_eq!(c, vec![1, 1, 0]);
    assert_eq!(pp_step(&c, PairSelection::new(0, 1), &pp, &g).unwrap(), vec![0, 2, 0]);
    assert_eq!(pp_step(&c, PairSelection::new(2, 1), &pp, &g).unwrap(), vec![1, 1, 0]);
    assert!(pp_step(&c, PairSelection::new(0, 2), &pp, &g).is_err());
    assert_eq!(pair_selections(&g).len(), 4);
}

#[test]
fn protocol_from_pair_rules() {
    // An epidemic: "y" spreads along every interaction.
    let pp = PopulationProtocol::parse(
        r#"{"name":"epidemic","states":["n","y"],"alphabet":["white","black"],
            "init":{"white":"n","black":"y"},"accepting":["y"],"rejecting":["n"],
            "pair_rules":[{"lhs":["y","n"],"rhs":["y","y"]},{"lhs":["n","y"],"rhs":["y","y"]}]}"#,
    )
    .unwrap();
    for g in bw_labelings(&path(4).unwrap()) {
        assert_eq!(pp_decide(&pp, &g).unwrap().outcome, Outcome::from_bool(black_count(&g) > 0));
    }
    assert!(PopulationProtocol::parse(r#"{"states":["a"],"alphabet":["x"],"init":{"x":"zz"}}"#).is_err());
}

proptest! {
    #[test]
    fn parity_conserves_token_parity(labels in proptest::collection::vec(0usize..2, 4), picks in proptest::collection::vec(0usize..8, 0..60)) {
        let pp = parity_protocol();
        let g = cycle(4).unwrap().relabeled(&["white", "black"], &labels);
        let pairs = pair_selections(&g);
        let want = black_count(&g) % 2;
        let mut c = pp_initial(&pp, &g).unwrap();
        for i in picks {
            c = pp_step(&c, pairs[i % pairs.len()], &pp, &g).unwrap();
            // Active states are A0, A1; the active bits sum to the parity.
            let active: Vec<StateId> = c.iter().copied().filter(|&q| q < 2).collect();
            prop_assert!(!active.is_empty());
            prop_assert_eq!(active.iter().map(|&q| q as usize).sum::<usize>() % 2, want);
        }
    }

    #[test]
    fn threshold_conserves_sum_below_cap(c in 2usize..5, labels in proptest::collection::vec(0usize..2, 5), picks in proptest::collection::vec(0usize..10, 0..60)) {
        let pp = threshold_protocol(c).unwrap();
        let g = generate_star(4).unwrap().relabeled(&["white", "black"], &labels);
        let pairs = pair_selections(&g);
        let k = black_count(&g);
        let mut conf = pp_initial(&pp, &g).unwrap();
        for i in picks {
            conf = pp_step(&conf, pairs[i % pairs.len()], &pp, &g).unwrap();
            if conf.iter().all(|&q| (q as usize) < c) {
                prop_assert_eq!(conf.iter().map(|&q| q as usize).sum::<usize>(), k);
            } else {
                prop_assert!(k >= c);
            }
        }
    }
}
