use distauto::catalog::parse_machine;
use distauto::engine::{simulate, Policy};
use distauto::graph::*;
use distauto::machine::*;
use distauto::zoo::{random_machine, star_recognizer_halting, zoo_entry};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rand_machine(seed: u64, nq: usize, beta: u8) -> Machine {
    random_machine(&mut ChaCha8Rng::seed_from_u64(seed), nq, beta, &[UNLABELED.to_string()])
}

fn small_graph() -> impl Strategy<Value = LabeledGraph> {
    (0usize..5).prop_map(|i| {
        [
            complete(2).unwrap(),
            path(4).unwrap(),
            cycle(5).unwrap(),
            generate_star(3).unwrap(),
            complete(4).unwrap(),
        ][i]
            .clone()
    })
}

/// Brute-force neighbor count, independent of the multiset type.
fn count_in(c: &[StateId], g: &LabeledGraph, v: usize, q: StateId, beta: u8) -> u8 {
    let raw = g.edges().iter().filter(|&&(a, b)| (a == v && c[b] == q) || (b == v && c[a] == q)).count();
    raw.min(beta as usize) as u8
}

proptest! {
    #[test]
    fn selected_nodes_read_the_old_configuration(
        seed in any::<u64>(), nq in 2usize..5, beta in 1u8..3, g in small_graph(),
        raw in proptest::collection::vec(any::<u32>(), 5), mask in any::<u8>(),
    ) {
        let m = rand_machine(seed, nq, beta);
        let c: Configuration = (0..g.n()).map(|v| raw[v] % nq as u32).collect();
        let sel: Vec<usize> = (0..g.n()).filter(|&v| mask >> v & 1 == 1).collect();
        let next = successor(&c, &sel, &m, &g).unwrap();
        for v in 0..g.n() {
            if sel.contains(&v) {
                prop_assert_eq!(next[v], successor(&c, &[v], &m, &g).unwrap()[v]);
            } else {
                prop_assert_eq!(next[v], c[v]);
            }
        }
    }

    #[test]
    fn bounded_counts_match_brute_force(
        beta in 1u8..4, g in small_graph(), raw in proptest::collection::vec(0u32..3, 5),
    ) {
        let c: Configuration = raw[..g.n()].to_vec();
        for v in 0..g.n() {
            let p = bounded_multiset(&c, v, &g, beta).unwrap();
            for q in 0..3 {
                prop_assert_eq!(p.count(q), count_in(&c, &g, v, q, beta));
            }
        }
    }

    #[test]
    fn rule_table_roundtrip(seed in any::<u64>(), nq in 1usize..4, beta in 1u8..3) {
        let m = rand_machine(seed, nq, beta);
        let table = export_table(&m).unwrap();
        let back = compile_rule_table(&table_to_rules(&m, &table)).unwrap();
        prop_assert_eq!(export_table(&back).unwrap(), table);
    }
}

#[test]
fn halting_machines_never_leave_decided_states() {
    let e = star_recognizer_halting();
    assert!(is_halting(&e.machine).unwrap());
    for n in 2..6 {
        let g = generate_star(n).unwrap();
        for seed in 0..10 {
            let tr = simulate(&e.machine, &g, &Policy::LiberalBernoulli(0.5), 2000, seed).unwrap();
            assert!(distauto::engine::halting_violations(&tr, &e.machine).is_empty());
        }
    }
    assert!(!is_halting(&zoo_entry("star-stabilizing").unwrap().machine).unwrap());
}

#[test]
fn saturation_and_order() {
    let p = BoundedMultiset::from_states(2, [3, 1, 3, 3, 0]);
    assert_eq!((p.count(0), p.count(1), p.count(2), p.count(3)), (1, 1, 0, 2));
    assert_eq!(p.support().collect::<Vec<_>>(), vec![0, 1, 3]);
    assert_eq!(p, BoundedMultiset::from_counts(2, &[1, 1, 0, 5]));
    let mut n = 0;
    for_each_multiset(3, 2, |_| {
        n += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(n, 27);
}

#[test]
fn rule_json_first_match_and_default_stay() {
    let m = parse_machine(
        r#"{"states":["a","b","c"],"alphabet":["x"],"beta":2,"init":{"x":"a"},
            "accepting":["c"],"rejecting":[],
            "rules":[{"from":"a","guards":[{"state":"a","op":">=","n":2}],"to":"c"},
                     {"from":"a","guards":[{"state":"a","op":">=","n":1}],"to":"b"}]}"#,
    )
    .unwrap();
    let d = |counts: &[u8]| m.delta(0, &BoundedMultiset::from_counts(2, counts)).unwrap();
    assert_eq!(d(&[2, 0, 0]), 2);
    assert_eq!(d(&[1, 0, 0]), 1);
    assert_eq!(d(&[0, 1, 0]), 0);
    assert_eq!(m.delta(1, &BoundedMultiset::empty(2)).unwrap(), 1);
}

#[test]
fn malformed_tables_are_rejected() {
    let base = |extra: &str| {
        format!(r#"{{"states":["a","b"],"alphabet":["x"],"beta":1,"init":{{"x":"a"}}{extra}}}"#)
    };
    assert!(parse_machine(&base(r#","accepting":["a"],"rejecting":["a"]"#)).is_err());
    assert!(parse_machine(&base(r#","accepting":["zz"]"#)).is_err());
    assert!(parse_machine(&base(
        r#","rules":[{"from":"a","guards":[{"state":"a","op":">=","n":2}],"to":"b"}]"#
    ))
    .is_err());
    assert!(parse_machine(r#"{"states":["a"],"alphabet":["x"],"beta":1,"init":{}}"#).is_err());
    assert!(parse_machine(r#"{"states":["a"],"alphabet":["x"],"beta":0,"init":{"x":"a"}}"#).is_err());
}

#[test]
fn initial_configuration_uses_labels() {
    let m = zoo_entry("black").unwrap().machine;
    let g = generate_path(&["white", "black", "white"]).unwrap();
    let c = initial_configuration(&m, &g).unwrap();
    assert_eq!(c, vec![m.init_of("white").unwrap(), m.init_of("black").unwrap(), m.init_of("white").unwrap()]);
    assert!(initial_configuration(&m, &path(2).unwrap()).is_err());
}
