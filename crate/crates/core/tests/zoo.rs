use distauto::engine::updates;
use distauto::graph::*;
use distauto::machine::{initial_configuration, is_halting, Configuration, Machine};
use distauto::verdict::{decide, DecideOptions, Outcome};
use distauto::zoo::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sync_run(m: &Machine, g: &LabeledGraph, steps: usize) -> Vec<Configuration> {
    let mut c = initial_configuration(m, g).unwrap();
    let mut out = vec![c.clone()];
    for _ in 0..steps {
        c = updates(m, g, &c).unwrap();
        out.push(c.clone());
    }
    out
}

/// Star membership by isomorphism against the generated star.
fn star_by_isomorphism(g: &LabeledGraph) -> bool {
    g.n() >= 3 && isomorphic(&g.relabeled(&[UNLABELED], &vec![0; g.n()]), &generate_star(g.n() - 1).unwrap()).unwrap()
}

#[test]
fn oracles_agree_with_brute_force() {
    for g in enumerate_connected(6) {
        assert_eq!(is_star(&g), star_by_isomorphism(&g));
        assert_eq!(is_even_star(&g), star_by_isomorphism(&g) && (g.n() - 1) % 2 == 0);
    }
    let tri = generate_cycle(&["2", "0", "1"]).unwrap();
    assert!(is_labeled_triangle(&tri));
    assert!(!is_labeled_triangle(&generate_cycle(&["0", "0", "1"]).unwrap()));
    assert!(!is_labeled_triangle(&generate_path(&["0", "1", "2"]).unwrap()));
}

#[test]
fn zoo_matches_oracles_up_to_four_nodes() {
    let opts = DecideOptions::default();
    for e in all_entries() {
        let alpha = e.corpus_alphabet();
        for g in enumerate_connected(4).iter().flat_map(|g| labelings(g, &alpha)) {
            let got = decide(&e.machine, &g, &e.model_class, &opts).unwrap().outcome;
            assert_eq!(got, Outcome::from_bool((e.oracle)(&g)), "{} on {:?} {:?}", e.name, g.edges(), g.labels());
        }
    }
}

#[test]
fn triangle_recognizer_on_cycles() {
    let e = c3_recognizer();
    let opts = DecideOptions::default();
    let c3 = generate_cycle(&["0", "1", "2"]).unwrap();
    let c6 = generate_cycle(&["0", "1", "2", "0", "1", "2"]).unwrap();
    assert_eq!(decide(&e.machine, &c3, &e.model_class, &opts).unwrap().outcome, Outcome::Accept);
    assert_eq!(decide(&e.machine, &c6, &e.model_class, &opts).unwrap().outcome, Outcome::Reject);
    assert_eq!(e.machine.num_states(), 29);
}

#[test]
fn state_counts_and_halting() {
    assert_eq!(even_star_counter().machine.num_states(), 27);
    assert_eq!(even_star_liberal().machine.num_states(), 27 + 27 * 27);
    for e in all_entries() {
        if e.model_class.acceptance == distauto::engine::Acceptance::Halting {
            assert!(is_halting(&e.machine).unwrap_or(true), "{}", e.name);
        }
    }
    assert_eq!(ZOO_NAMES.len(), all_entries().len());
    assert!(zoo_entry("nope").is_err());
}

#[test]
fn even_center_codec() {
    for q in 0..27 {
        if let Some(c) = even_center_of(q) {
            assert_eq!(even_center_id(c), q);
        }
    }
    for q in 0..29 {
        assert_eq!(c3_encode(c3_decode(q)), q);
    }
}

#[test]
fn random_builtin_is_reproducible() {
    let p = serde_json::json!({"seed": 9, "states": 3, "beta": 2, "outputs": true});
    let a = builtin("random", &p).unwrap();
    let b = builtin("random", &p).unwrap();
    assert_eq!(
        distauto::machine::export_table(&a).unwrap(),
        distauto::machine::export_table(&b).unwrap()
    );
    assert!(builtin("random", &serde_json::json!({"states": 0})).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn set_machines_run_uniformly_on_unlabeled_graphs(seed in any::<u64>(), nq in 2usize..6) {
        let m = random_machine(&mut ChaCha8Rng::seed_from_u64(seed), nq, 1, &[UNLABELED.to_string()]);
        let reference = sync_run(&m, &complete(2).unwrap(), 100);
        for g in enumerate_connected(5) {
            let run = sync_run(&m, &g, 100);
            for (c, r) in run.iter().zip(&reference) {
                prop_assert!(c.iter().all(|&q| q == r[0]));
            }
        }
    }

    #[test]
    fn triangle_and_hexagon_look_alike(seed in any::<u64>(), nq in 2usize..5, beta in 1u8..4, labels in proptest::collection::vec(0usize..2, 3)) {
        let alpha = ["a".to_string(), "b".to_string()];
        let m = random_machine(&mut ChaCha8Rng::seed_from_u64(seed), nq, beta, &alpha);
        let g3 = cycle(3).unwrap().relabeled(&alpha, &labels);
        let six: Vec<usize> = labels.iter().chain(&labels).copied().collect();
        let g6 = cycle(6).unwrap().relabeled(&alpha, &six);
        for (a, b) in sync_run(&m, &g3, 100).iter().zip(&sync_run(&m, &g6, 100)) {
            for v in 0..3 {
                prop_assert_eq!(a[v], b[v]);
                prop_assert_eq!(a[v], b[v + 3]);
            }
        }
    }

    #[test]
    fn stars_past_the_bound_look_alike(seed in any::<u64>(), nq in 2usize..5, beta in 1u8..4) {
        let m = random_machine(&mut ChaCha8Rng::seed_from_u64(seed), nq, beta, &[UNLABELED.to_string()]);
        let b = beta as usize;
        let s1 = sync_run(&m, &generate_star(b + 1).unwrap(), 100);
        let s2 = sync_run(&m, &generate_star(b + 2).unwrap(), 100);
        for (x, y) in s1.iter().zip(&s2) {
            prop_assert_eq!(x[0], y[0]);
            prop_assert!(x[1..].iter().chain(&y[1..]).all(|&q| q == x[1]));
        }
    }
}
