use std::collections::{HashMap, HashSet};

use distauto::engine::*;
use distauto::graph::*;
use distauto::machine::*;
use distauto::verdict::*;
use distauto::zoo::{all_entries, black_detector, oscillator_halt, random_decided_machine};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mc(s: &str) -> ModelClass {
    s.parse().unwrap()
}

fn small_graphs() -> Vec<LabeledGraph> {
    let mut out = Vec::new();
    for g in enumerate_connected(4) {
        out.extend(labelings(&g, &["a", "b"]));
    }
    out
}

fn rand_machine(seed: u64, nq: usize, beta: u8) -> Machine {
    let alpha = vec!["a".to_string(), "b".to_string()];
    random_decided_machine(&mut ChaCha8Rng::seed_from_u64(seed), nq, beta, &alpha)
}

/// Strong-fairness verdict by explicit reachability closure: a bottom SCC
/// is a configuration set closed under reachability in both directions.
fn brute_strong(m: &Machine, g: &LabeledGraph, liberal: bool) -> Outcome {
    let n = g.n();
    let sels: Vec<Vec<usize>> = if liberal {
        (0u32..1 << n).map(|mask| (0..n).filter(|&v| mask >> v & 1 == 1).collect()).collect()
    } else {
        (0..n).map(|v| vec![v]).collect()
    };
    let start = initial_configuration(m, g).unwrap();
    let mut ids: HashMap<Configuration, usize> = HashMap::from([(start.clone(), 0)]);
    let mut configs = vec![start];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < configs.len() {
        let mut out = Vec::new();
        for s in &sels {
            let d = successor(&configs[i], s, m, g).unwrap();
            let next = ids.len();
            let id = *ids.entry(d.clone()).or_insert_with(|| {
                configs.push(d);
                next
            });
            out.push(id);
        }
        succ.push(out);
        i += 1;
    }
    let k = configs.len();
    let reach: Vec<HashSet<usize>> = (0..k)
        .map(|u| {
            let mut seen = HashSet::from([u]);
            let mut stack = vec![u];
            while let Some(x) = stack.pop() {
                for &y in &succ[x] {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen
        })
        .collect();
    let bottom: Vec<usize> = (0..k).filter(|&u| reach[u].iter().all(|&v| reach[v].contains(&u))).collect();
    let acc = bottom.iter().all(|&u| is_accepting_config(&configs[u], m));
    let rej = bottom.iter().all(|&u| is_rejecting_config(&configs[u], m));
    match (acc, rej) {
        (true, false) => Outcome::Accept,
        (false, true) => Outcome::Reject,
        _ => Outcome::Inconsistent,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strong_matches_brute_force(seed in any::<u64>(), nq in 2usize..4, beta in 1u8..3, gi in 0usize..40) {
        let m = rand_machine(seed, nq, beta);
        let gs = small_graphs();
        let g = &gs[gi % gs.len()];
        let opts = DecideOptions::default();
        for (liberal, sc) in [(true, SelectionConstraint::Liberal), (false, SelectionConstraint::Exclusive)] {
            let got = decide_strong(&m, g, sc, &opts).unwrap().outcome;
            prop_assert_eq!(got, brute_strong(&m, g, liberal));
        }
    }

    #[test]
    fn weak_methods_agree(seed in any::<u64>(), nq in 2usize..4, beta in 1u8..3, gi in 0usize..40) {
        let m = rand_machine(seed, nq, beta);
        let gs = small_graphs();
        let g = &gs[gi % gs.len()];
        let opts = DecideOptions::default();
        for sc in [SelectionConstraint::Liberal, SelectionConstraint::Exclusive] {
            let a = decide_weak(&m, g, sc, &opts).unwrap().outcome;
            let b = decide_weak_product(&m, g, sc, &opts, false).unwrap().outcome;
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn liberal_weak_verdicts_carry_over(seed in any::<u64>(), nq in 2usize..4, gi in 0usize..40) {
        let m = rand_machine(seed, nq, 2);
        let gs = small_graphs();
        let g = &gs[gi % gs.len()];
        let opts = DecideOptions::default();
        let base = decide(&m, g, &mc("multiset.stabilizing.liberal.weak"), &opts).unwrap().outcome;
        if base.is_decided() {
            for c in ["exclusive.weak", "synchronous.weak", "liberal.strong", "exclusive.strong"] {
                let o = decide(&m, g, &mc(&format!("multiset.stabilizing.{c}")), &opts).unwrap().outcome;
                prop_assert_eq!(o, base, "{}", c);
            }
        }
    }

    #[test]
    fn synchronous_fairness_notions_coincide(seed in any::<u64>(), nq in 2usize..5, beta in 1u8..3, gi in 0usize..40) {
        let m = rand_machine(seed, nq, beta);
        let gs = small_graphs();
        let g = &gs[gi % gs.len()];
        let opts = DecideOptions::default();
        let d = decide(&m, g, &mc("multiset.stabilizing.synchronous.weak"), &opts).unwrap().outcome;
        prop_assert_eq!(decide_strong(&m, g, SelectionConstraint::Synchronous, &opts).unwrap().outcome, d);
        prop_assert_eq!(decide_weak(&m, g, SelectionConstraint::Synchronous, &opts).unwrap().outcome, d);
        prop_assert_eq!(decide_synchronous(&m, g, &opts).unwrap().outcome, d);
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>(), nq in 2usize..4, gi in 0usize..40, ci in 0usize..6) {
        let m = rand_machine(seed, nq, 1);
        let gs = small_graphs();
        let g = &gs[gi % gs.len()];
        let class = ["liberal.weak", "liberal.strong", "exclusive.weak", "exclusive.strong", "synchronous.weak", "synchronous.strong"][ci];
        let opts = DecideOptions { witness: true, ..DecideOptions::default() };
        let v = decide(&m, g, &mc(&format!("set.stabilizing.{class}")), &opts).unwrap();
        for lasso in &v.witness {
            prop_assert!(lasso.replays(&m, g).unwrap());
        }
        if v.outcome == Outcome::Inconsistent && class.ends_with("weak") && !class.starts_with("synchronous") {
            for lasso in &v.witness {
                prop_assert_eq!(lasso.cycle_selected(), (0..g.n()).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn oscillator_is_inconsistent_under_liberal_weak() {
    // Under exclusive selection the node pair can settle into h.
    let e = oscillator_halt();
    let g = generate_star(2).unwrap();
    let opts = DecideOptions::default();
    assert_eq!(decide(&e.machine, &g, &mc("set.stabilizing.liberal.weak"), &opts).unwrap().outcome, Outcome::Inconsistent);
    assert_eq!(decide(&e.machine, &g, &e.model_class, &opts).unwrap().outcome, Outcome::Accept);
}

#[test]
fn black_detector_small_cases() {
    let e = black_detector();
    let opts = DecideOptions::default();
    let none = generate_path(&["white", "white", "white"]).unwrap();
    let one = generate_path(&["white", "black", "white"]).unwrap();
    assert_eq!(decide(&e.machine, &none, &e.model_class, &opts).unwrap().outcome, Outcome::Reject);
    assert_eq!(decide(&e.machine, &one, &e.model_class, &opts).unwrap().outcome, Outcome::Accept);
}

#[test]
fn caps_produce_too_large() {
    let e = black_detector();
    let g = generate_path(&["black", "white", "white", "white", "white"]).unwrap();
    let opts = DecideOptions { max_configs: 2, ..DecideOptions::default() };
    for c in ["liberal.strong", "liberal.weak", "synchronous.weak"] {
        let v = decide(&e.machine, &g, &mc(&format!("set.stabilizing.{c}")), &opts).unwrap();
        assert_eq!(v.outcome, Outcome::TooLarge, "{c}");
    }
}

#[test]
fn class_mismatch_is_a_validation_error() {
    let e = distauto::zoo::star_recognizer_halting();
    let g = generate_star(2).unwrap();
    assert!(decide(&e.machine, &g, &mc("set.halting.liberal.weak"), &DecideOptions::default()).is_err());
}

#[test]
fn decided_verdicts_survive_simulation() {
    let opts = DecideOptions::default();
    for e in all_entries() {
        let alpha = e.corpus_alphabet();
        for g in enumerate_connected(3).iter().flat_map(|g| labelings(g, &alpha)) {
            let v = decide(&e.machine, &g, &e.model_class, &opts).unwrap().outcome;
            let opposite = match v {
                Outcome::Accept => Status::Rejecting,
                Outcome::Reject => Status::Accepting,
                _ => continue,
            };
            let policy = Policy::for_selection(e.model_class.selection);
            for seed in 0..50 {
                let tr = simulate(&e.machine, &g, &policy, 10_000, seed).unwrap();
                if tr.terminal == Terminal::Fixpoint {
                    assert_ne!(*tr.statuses.last().unwrap(), opposite, "{} seed {seed}", e.name);
                }
            }
        }
    }
}

#[test]
fn tarjan_on_a_small_graph() {
    // 0 -> 1 -> 2 -> 0, 2 -> 3, 3 -> 3
    let offsets = [0, 1, 2, 4, 5];
    let targets = [1, 2, 0, 3, 3];
    let (comp, count) = tarjan_scc(&offsets, &targets);
    assert_eq!(count, 2);
    assert_eq!(comp[0], comp[1]);
    assert_eq!(comp[1], comp[2]);
    assert_ne!(comp[2], comp[3]);
}
