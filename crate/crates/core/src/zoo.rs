//! Concrete automata for the four example languages plus baselines, each
//! paired with the model class it is meant for and a brute-force
//! membership oracle.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::engine::{Acceptance, Detection, Fairness, ModelClass, SelectionConstraint};
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, UNLABELED};
use crate::machine::{BoundedMultiset, DenseTable, Machine, MachineParts, StateId};
use crate::transforms::exclusive_strong_to_liberal_strong;

pub type Oracle = fn(&LabeledGraph) -> bool;

#[derive(Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub machine: Machine,
    pub model_class: ModelClass,
    pub oracle: Oracle,
}

impl std::fmt::Debug for ZooEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZooEntry")
            .field("name", &self.name)
            .field("model_class", &self.model_class.to_string())
            .finish()
    }
}

fn class(d: Detection, a: Acceptance, s: SelectionConstraint, f: Fairness) -> ModelClass {
    ModelClass::new(d, a, s, f)
}

fn build(
    name: &'static str,
    states: Vec<String>,
    alphabet: &[&str],
    beta: u8,
    init: Vec<StateId>,
    accepting: Vec<StateId>,
    rejecting: Vec<StateId>,
    delta: impl Fn(StateId, &BoundedMultiset) -> StateId + Send + Sync + 'static,
) -> Machine {
    Machine::new(MachineParts {
        name: name.to_string(),
        states,
        alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
        beta,
        init,
        accepting,
        rejecting,
        delta: Arc::new(move |q: StateId, p: &BoundedMultiset| Ok(delta(q, p))),
    })
    .expect("zoo machines are well formed")
    .with_source(json!({ "builtin": name }))
}

// Oracles. These look only at the graph.

pub fn has_black(g: &LabeledGraph) -> bool {
    (0..g.n()).any(|v| g.label(v) == "black")
}

/// A center adjacent to every other node, at least two leaves, and no
/// other edges.
pub fn is_star(g: &LabeledGraph) -> bool {
    let n = g.n();
    if n < 3 || g.edges().len() != n - 1 {
        return false;
    }
    let centers = (0..n).filter(|&v| g.degree(v) == n - 1).count();
    centers == 1 && (0..n).all(|v| g.degree(v) == 1 || g.degree(v) == n - 1)
}

pub fn is_even_star(g: &LabeledGraph) -> bool {
    is_star(g) && (g.n() - 1) % 2 == 0
}

pub fn is_labeled_triangle(g: &LabeledGraph) -> bool {
    if g.n() != 3 || g.edges().len() != 3 {
        return false;
    }
    let mut labels: Vec<&str> = (0..3).map(|v| g.label(v)).collect();
    labels.sort_unstable();
    labels == ["0", "1", "2"]
}

fn always(_: &LabeledGraph) -> bool {
    true
}

fn never(_: &LabeledGraph) -> bool {
    false
}

/// White nodes with a black neighbor turn black.
pub fn black_detector() -> ZooEntry {
    const WHITE: StateId = 0;
    const BLACK: StateId = 1;
    let machine = build(
        "black",
        vec!["white".into(), "black".into()],
        &["white", "black"],
        1,
        vec![WHITE, BLACK],
        vec![BLACK],
        vec![WHITE],
        |q, p| if q == WHITE && p.contains(BLACK) { BLACK } else { q },
    );
    ZooEntry {
        name: "black",
        machine,
        model_class: class(
            Detection::Set,
            Acceptance::Stabilizing,
            SelectionConstraint::Liberal,
            Fairness::Weak,
        ),
        oracle: has_black,
    }
}

const LEAF: u32 = 0;
const CENTER: u32 = 1;
const UNKNOWN: u32 = 2;
const NEITHER: u32 = 3;

/// Estimate/color pairs. Every activation flips the color; a node that
/// sees two neighbor colors cannot be a leaf.
pub fn star_recognizer_stabilizing() -> ZooEntry {
    let est = |q: StateId| q / 2;
    let col = |q: StateId| q % 2;
    let enc = |d: u32, c: u32| d * 2 + c;
    let mut states = Vec::new();
    for d in ["leaf", "center", "unknown", "neither"] {
        for c in 0..2 {
            states.push(format!("({d},{c})"));
        }
    }
    let machine = build(
        "star-stabilizing",
        states,
        &[UNLABELED],
        1,
        vec![enc(UNKNOWN, 0)],
        vec![enc(LEAF, 0), enc(LEAF, 1), enc(CENTER, 0), enc(CENTER, 1)],
        vec![enc(UNKNOWN, 0), enc(UNKNOWN, 1), enc(NEITHER, 0), enc(NEITHER, 1)],
        move |q, p| {
            let d = est(q);
            let has = |e: u32| p.any(|s| est(s) == e);
            let two_colors = p.any(|s| col(s) == 0) && p.any(|s| col(s) == 1);
            let only_center = p.all(|s| est(s) == CENTER) && !p.is_empty();
            let next = if has(NEITHER) {
                NEITHER
            } else if d == UNKNOWN && !has(CENTER) && two_colors {
                CENTER
            } else if d == UNKNOWN && has(CENTER) && two_colors {
                NEITHER
            } else if d == UNKNOWN && only_center && !two_colors {
                LEAF
            } else if d == CENTER && has(CENTER) {
                NEITHER
            } else if d == LEAF && two_colors {
                NEITHER
            } else {
                d
            };
            enc(next, 1 - col(q))
        },
    );
    ZooEntry {
        name: "star-stabilizing",
        machine,
        model_class: class(
            Detection::Set,
            Acceptance::Stabilizing,
            SelectionConstraint::Liberal,
            Fairness::Strong,
        ),
        oracle: is_star,
    }
}

const H_INIT: StateId = 0;
const H_LEAF: StateId = 1;
const H_NONLEAF: StateId = 2;
const H_ACCEPT: StateId = 3;
const H_REJECT: StateId = 4;

/// Counting lets a node see whether it is a leaf. Decided nodes never move.
pub fn star_recognizer_halting() -> ZooEntry {
    let machine = build(
        "star-halting",
        ["init", "leaf", "non-leaf", "accept", "reject"].iter().map(|s| s.to_string()).collect(),
        &[UNLABELED],
        2,
        vec![H_INIT],
        vec![H_ACCEPT],
        vec![H_REJECT],
        |q, p| {
            if q == H_ACCEPT || q == H_REJECT {
                return q;
            }
            let degree = p.count_where(2, |_| true);
            let has = |s: StateId| p.contains(s);
            if degree <= 1 {
                if has(H_INIT) || has(H_NONLEAF) {
                    H_LEAF
                } else if has(H_LEAF) || has(H_REJECT) {
                    H_REJECT
                } else if has(H_ACCEPT) {
                    H_ACCEPT
                } else {
                    q
                }
            } else if has(H_REJECT) || has(H_NONLEAF) {
                H_REJECT
            } else if has(H_INIT) {
                H_NONLEAF
            } else {
                H_ACCEPT
            }
        },
    );
    ZooEntry {
        name: "star-halting",
        machine,
        model_class: class(
            Detection::Multiset,
            Acceptance::Halting,
            SelectionConstraint::Liberal,
            Fairness::Weak,
        ),
        oracle: is_star,
    }
}

// Even-star state layout: star phase, leaf counting states, center states.
const E_INIT: StateId = 0;
const E_LEAF: StateId = 1;
const E_NONLEAF: StateId = 2;
const E_REJECT: StateId = 3;
const E_VISIBLE: StateId = 4;
const E_INVISIBLE: StateId = 5;
const E_DEAD: StateId = 6;
const E_EVEN: StateId = 7;
const E_ODD: StateId = 8;
const E_CENTER: StateId = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CenterState {
    pub phase: u32,
    pub parity: u32,
    /// `None` until the count is complete, then the parity.
    pub decision: Option<u32>,
}

pub fn even_center_id(c: CenterState) -> StateId {
    let d = match c.decision {
        None => 0,
        Some(x) => 1 + x,
    };
    E_CENTER + (c.phase * 2 + c.parity) * 3 + d
}

pub fn even_center_of(q: StateId) -> Option<CenterState> {
    (q >= E_CENTER).then(|| {
        let x = q - E_CENTER;
        CenterState {
            phase: x / 6,
            parity: (x / 3) % 2,
            decision: match x % 3 {
                0 => None,
                d => Some(d - 1),
            },
        }
    })
}

fn is_leaf_counting(q: StateId) -> bool {
    (E_VISIBLE..=E_ODD).contains(&q)
}

/// Recognizes stars first, then lets the center count leaves modulo 2:
/// leaves toggle visibility while the center is in phase 0 and the center
/// counts only when exactly one leaf is visible.
pub fn even_star_counter() -> ZooEntry {
    let mut states: Vec<String> = ["init", "leaf", "non-leaf", "reject", "visible", "invisible", "dead", "even", "odd"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for ph in 0..3 {
        for p in 0..2 {
            for d in ["none", "0", "1"] {
                states.push(format!("({ph},{p},{d})"));
            }
        }
    }
    let finished = |d: u32| (0..2).map(move |p| even_center_id(CenterState { phase: 2, parity: p, decision: Some(d) }));
    let machine = build(
        "even-star",
        states,
        &[UNLABELED],
        2,
        vec![E_INIT],
        std::iter::once(E_EVEN).chain(finished(0)).collect(),
        [E_REJECT, E_ODD].into_iter().chain(finished(1)).collect(),
        |q, p| {
            let has = |s: StateId| p.contains(s);
            let counting = |s: StateId| is_leaf_counting(s) || s >= E_CENTER;
            match q {
                E_REJECT => q,
                E_INIT | E_LEAF | E_NONLEAF => {
                    if p.count_where(2, |_| true) <= 1 {
                        if has(E_INIT) || has(E_NONLEAF) {
                            E_LEAF
                        } else if has(E_LEAF) || has(E_REJECT) {
                            E_REJECT
                        } else if p.any(counting) {
                            E_INVISIBLE
                        } else {
                            q
                        }
                    } else if has(E_REJECT) || has(E_NONLEAF) {
                        E_REJECT
                    } else if has(E_INIT) {
                        E_NONLEAF
                    } else {
                        even_center_id(CenterState { phase: 0, parity: 0, decision: None })
                    }
                }
                _ if is_leaf_counting(q) => {
                    let Some(center) = p.support().find_map(even_center_of) else {
                        return q;
                    };
                    match (q, center.phase) {
                        (E_INVISIBLE, 0) => E_VISIBLE,
                        (E_VISIBLE, 0) => E_INVISIBLE,
                        (E_VISIBLE, 1) => E_DEAD,
                        (E_DEAD, 2) => match center.decision {
                            Some(0) => E_EVEN,
                            Some(_) => E_ODD,
                            None => q,
                        },
                        _ => q,
                    }
                }
                _ => {
                    let c = even_center_of(q).expect("center state");
                    let only = |allowed: &[StateId]| p.all(|s| allowed.contains(&s));
                    if c.phase == 0 && p.count(E_VISIBLE) == 1 {
                        even_center_id(CenterState { phase: 1, parity: 1 - c.parity, ..c })
                    } else if c.phase == 1 && only(&[E_INVISIBLE, E_DEAD]) && has(E_INVISIBLE) {
                        even_center_id(CenterState { phase: 0, ..c })
                    } else if c.phase == 1 && only(&[E_DEAD]) && !p.is_empty() {
                        even_center_id(CenterState { phase: 2, parity: c.parity, decision: Some(c.parity) })
                    } else {
                        q
                    }
                }
            }
        },
    );
    ZooEntry {
        name: "even-star",
        machine,
        model_class: class(
            Detection::Multiset,
            Acceptance::Halting,
            SelectionConstraint::Exclusive,
            Fairness::Strong,
        ),
        oracle: is_even_star,
    }
}

/// [`even_star_counter`] compiled for liberal selection.
pub fn even_star_liberal() -> ZooEntry {
    let inner = even_star_counter();
    let machine = exclusive_strong_to_liberal_strong(&inner.machine)
        .expect("compiles")
        .with_name("even-star-liberal")
        .with_source(json!({ "builtin": "even-star-liberal" }));
    ZooEntry {
        name: "even-star-liberal",
        machine,
        model_class: class(
            Detection::Multiset,
            Acceptance::Halting,
            SelectionConstraint::Liberal,
            Fairness::Strong,
        ),
        oracle: is_even_star,
    }
}

// Triangle recognizer layout. Relays carry labels 0 and 1, the hub label 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Token {
    None,
    Cw,
    Ccw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HubMode {
    Idle,
    Send,
    Wait,
    Recv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum C3State {
    Relay { label: u32, color: u32, token: Token },
    Hub { color: u32, phase: u32, mode: HubMode },
    Reject,
}

const TOKENS: [Token; 3] = [Token::None, Token::Cw, Token::Ccw];
const MODES: [HubMode; 4] = [HubMode::Idle, HubMode::Send, HubMode::Wait, HubMode::Recv];
const C3_REJECT: StateId = 28;

pub fn c3_encode(s: C3State) -> StateId {
    match s {
        C3State::Relay { label, color, token } => {
            (label * 2 + color) * 3 + TOKENS.iter().position(|&t| t == token).unwrap() as u32
        }
        C3State::Hub { color, phase, mode } => {
            12 + (color * 2 + phase) * 4 + MODES.iter().position(|&m| m == mode).unwrap() as u32
        }
        C3State::Reject => C3_REJECT,
    }
}

pub fn c3_decode(q: StateId) -> C3State {
    if q < 12 {
        C3State::Relay {
            label: q / 6,
            color: (q / 3) % 2,
            token: TOKENS[(q % 3) as usize],
        }
    } else if q < C3_REJECT {
        let x = q - 12;
        C3State::Hub {
            color: x / 8,
            phase: (x / 4) % 2,
            mode: MODES[(x % 4) as usize],
        }
    } else {
        C3State::Reject
    }
}

fn c3_label(s: C3State) -> Option<u32> {
    match s {
        C3State::Relay { label, .. } => Some(label),
        C3State::Hub { .. } => Some(2),
        C3State::Reject => None,
    }
}

fn hub_direction(phase: u32) -> Token {
    if phase == 0 {
        Token::Cw
    } else {
        Token::Ccw
    }
}

fn offers(s: C3State, d: Token) -> bool {
    match s {
        C3State::Relay { token, .. } => token == d,
        C3State::Hub { phase, mode, .. } => mode == HubMode::Send && hub_direction(phase) == d,
        C3State::Reject => false,
    }
}

fn holds(s: C3State, d: Token) -> bool {
    match s {
        C3State::Relay { token, .. } => token == d,
        C3State::Hub { phase, mode, .. } => mode == HubMode::Recv && hub_direction(phase) == d,
        C3State::Reject => false,
    }
}

fn relay_token(s: C3State) -> Token {
    match s {
        C3State::Relay { token, .. } => token,
        _ => Token::None,
    }
}

fn c3_delta(q: StateId, p: &BoundedMultiset) -> StateId {
    let me = c3_decode(q);
    let Some(l) = c3_label(me) else {
        return q;
    };
    if p.contains(C3_REJECT) {
        return C3_REJECT;
    }
    let nbrs: Vec<C3State> = p.support().map(c3_decode).collect();
    let mut by_label: [Option<C3State>; 3] = [None; 3];
    for &s in &nbrs {
        let k = c3_label(s).expect("reject handled") as usize;
        if by_label[k].is_some() {
            // Two different states carry the same label.
            return C3_REJECT;
        }
        by_label[k] = Some(s);
    }
    let (prev, next) = ((l + 2) % 3, (l + 1) % 3);
    if (0..3).any(|k| by_label[k as usize].is_some() != (k == prev || k == next)) {
        return C3_REJECT;
    }
    let nb = |k: u32| by_label[k as usize].expect("label present");
    match me {
        C3State::Relay { label, color, token } => {
            // Clockwise tokens travel 0 -> 1 -> 2 -> 0.
            let pred = |d: Token| if d == Token::Cw { nb(prev) } else { nb(next) };
            let succ = |d: Token| if d == Token::Cw { nb(next) } else { nb(prev) };
            let token = match token {
                Token::None => {
                    if offers(pred(Token::Cw), Token::Cw) && !holds(succ(Token::Cw), Token::Cw) {
                        Token::Cw
                    } else if offers(pred(Token::Ccw), Token::Ccw) && !holds(succ(Token::Ccw), Token::Ccw) {
                        Token::Ccw
                    } else {
                        Token::None
                    }
                }
                d => {
                    if holds(succ(d), d) && !offers(pred(d), d) {
                        Token::None
                    } else {
                        d
                    }
                }
            };
            c3_encode(C3State::Relay {
                label,
                color: 1 - color,
                token,
            })
        }
        C3State::Hub { color, phase, mode } => {
            let d = hub_direction(phase);
            let (out, inn) = if phase == 0 { (nb(0), nb(1)) } else { (nb(1), nb(0)) };
            let toward_hub = relay_token(nb(1)) == Token::Cw || relay_token(nb(0)) == Token::Ccw;
            let expected = relay_token(inn) == d;
            let unexpected = relay_token(out) != Token::None && relay_token(out) != d;
            let hub = |phase: u32, mode: HubMode| {
                c3_encode(C3State::Hub {
                    color: 1 - color,
                    phase,
                    mode,
                })
            };
            match mode {
                HubMode::Idle if toward_hub => C3_REJECT,
                HubMode::Idle => hub(phase, HubMode::Send),
                _ if unexpected => C3_REJECT,
                HubMode::Send if relay_token(out) == d => hub(phase, HubMode::Wait),
                HubMode::Send => hub(phase, HubMode::Send),
                HubMode::Wait if expected => hub(phase, HubMode::Recv),
                HubMode::Wait => hub(phase, HubMode::Wait),
                HubMode::Recv if expected => hub(phase, HubMode::Recv),
                HubMode::Recv => hub(1 - phase, HubMode::Idle),
            }
        }
        C3State::Reject => unreachable!(),
    }
}

/// Labeled-triangle recognizer. Nodes check their neighbors' labels; the
/// node labeled 2 alternately sends a clockwise and a counterclockwise
/// token around the cycle and rejects when a token comes back from the
/// wrong side. Colors flip on every activation so that two neighbors
/// sharing a label eventually show different states.
pub fn c3_recognizer() -> ZooEntry {
    let states: Vec<String> = (0..=C3_REJECT)
        .map(|q| match c3_decode(q) {
            C3State::Relay { label, color, token } => format!("relay{label}({color},{token:?})"),
            C3State::Hub { color, phase, mode } => format!("hub({color},{phase},{mode:?})"),
            C3State::Reject => "reject".into(),
        })
        .collect();
    let relay = |label| c3_encode(C3State::Relay { label, color: 0, token: Token::None });
    let machine = build(
        "c3",
        states,
        &["0", "1", "2"],
        1,
        vec![
            relay(0),
            relay(1),
            c3_encode(C3State::Hub {
                color: 0,
                phase: 0,
                mode: HubMode::Idle,
            }),
        ],
        (0..C3_REJECT).collect(),
        vec![C3_REJECT],
        c3_delta,
    );
    ZooEntry {
        name: "c3",
        machine,
        model_class: class(
            Detection::Set,
            Acceptance::Stabilizing,
            SelectionConstraint::Liberal,
            Fairness::Strong,
        ),
        oracle: is_labeled_triangle,
    }
}

/// Alternates between `p` and `q` while the whole neighborhood agrees and
/// halts in `h` as soon as it does not. Only asymmetric schedules halt.
pub fn oscillator_halt() -> ZooEntry {
    const P: StateId = 0;
    const Q: StateId = 1;
    const H: StateId = 2;
    let machine = build(
        "oscillator",
        vec!["p".into(), "q".into(), "h".into()],
        &[UNLABELED],
        1,
        vec![P],
        vec![H],
        vec![],
        |s, nb| match s {
            P if nb.all(|x| x == P) => Q,
            Q if nb.all(|x| x == Q) => P,
            _ => H,
        },
    );
    ZooEntry {
        name: "oscillator",
        machine,
        model_class: class(
            Detection::Set,
            Acceptance::Halting,
            SelectionConstraint::Exclusive,
            Fairness::Weak,
        ),
        oracle: always,
    }
}

fn constant(name: &'static str, accept: bool) -> ZooEntry {
    let (acc, rej) = if accept { (vec![0], vec![]) } else { (vec![], vec![0]) };
    let machine = build(
        name,
        vec![if accept { "yes" } else { "no" }.into()],
        &[UNLABELED, "0", "1", "2", "black", "white"],
        1,
        vec![0; 6],
        acc,
        rej,
        |q, _| q,
    );
    ZooEntry {
        name,
        machine,
        model_class: class(
            Detection::Set,
            Acceptance::Halting,
            SelectionConstraint::Liberal,
            Fairness::Weak,
        ),
        oracle: if accept { always } else { never },
    }
}

pub fn trivial_accept() -> ZooEntry {
    constant("trivial-accept", true)
}

pub fn trivial_reject() -> ZooEntry {
    constant("trivial-reject", false)
}

pub const ZOO_NAMES: [&str; 9] = [
    "black",
    "star-stabilizing",
    "star-halting",
    "even-star",
    "even-star-liberal",
    "c3",
    "oscillator",
    "trivial-accept",
    "trivial-reject",
];

pub fn zoo_entry(name: &str) -> Result<ZooEntry> {
    Ok(match name {
        "black" => black_detector(),
        "star-stabilizing" => star_recognizer_stabilizing(),
        "star-halting" => star_recognizer_halting(),
        "even-star" => even_star_counter(),
        "even-star-liberal" => even_star_liberal(),
        "c3" => c3_recognizer(),
        "oscillator" => oscillator_halt(),
        "trivial-accept" => trivial_accept(),
        "trivial-reject" => trivial_reject(),
        _ => {
            return Err(Error::domain(format!(
                "unknown zoo machine {name:?}; known: {}",
                ZOO_NAMES.join(", ")
            )))
        }
    })
}

pub fn all_entries() -> Vec<ZooEntry> {
    ZOO_NAMES.iter().map(|n| zoo_entry(n).expect("listed")).collect()
}

/// Uniformly random total transition table with random initialization.
/// No state is accepting or rejecting.
pub fn random_machine<R: Rng + ?Sized>(rng: &mut R, nq: usize, beta: u8, alphabet: &[String]) -> Machine {
    random_with_outputs(rng, nq, beta, alphabet, false)
}

/// Like [`random_machine`], but each state is independently accepting,
/// rejecting or neither.
pub fn random_decided_machine<R: Rng + ?Sized>(rng: &mut R, nq: usize, beta: u8, alphabet: &[String]) -> Machine {
    random_with_outputs(rng, nq, beta, alphabet, true)
}

fn random_with_outputs<R: Rng + ?Sized>(
    rng: &mut R,
    nq: usize,
    beta: u8,
    alphabet: &[String],
    outputs: bool,
) -> Machine {
    assert!(nq >= 1 && beta >= 1);
    let per = (beta as usize + 1).pow(nq as u32);
    let targets: Vec<StateId> = (0..nq * per).map(|_| rng.gen_range(0..nq as StateId)).collect();
    let init: Vec<StateId> = alphabet.iter().map(|_| rng.gen_range(0..nq as StateId)).collect();
    let (mut acc, mut rej) = (Vec::new(), Vec::new());
    if outputs {
        for q in 0..nq as StateId {
            match rng.gen_range(0..3) {
                0 => acc.push(q),
                1 => rej.push(q),
                _ => {}
            }
        }
    }
    Machine::new(MachineParts {
        name: "random".into(),
        states: (0..nq).map(|i| format!("s{i}")).collect(),
        alphabet: alphabet.to_vec(),
        beta,
        init,
        accepting: acc,
        rejecting: rej,
        delta: Arc::new(DenseTable::new(nq, beta, targets)),
    })
    .expect("random machine is well formed")
}

/// Resolves `{"builtin": name, "params": {...}}`. Besides the zoo names,
/// `random` takes `seed`, `states`, `beta`, `alphabet` and `outputs`.
pub fn builtin(name: &str, params: &serde_json::Value) -> Result<Machine> {
    if name != "random" {
        return Ok(zoo_entry(name)?.machine);
    }
    let get = |k: &str| params.get(k);
    let num = |k: &str, default: u64| -> Result<u64> {
        match get(k) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::parse(format!("params.{k}"), "expected a non-negative integer")),
        }
    };
    let seed = num("seed", 0)?;
    let nq = num("states", 3)? as usize;
    let beta = num("beta", 1)?;
    if !(1..=16).contains(&nq) || !(1..=4).contains(&beta) {
        return Err(Error::domain("random machine needs 1..=16 states and bound 1..=4"));
    }
    let per = (beta + 1).checked_pow(nq as u32).unwrap_or(u64::MAX);
    if per.saturating_mul(nq as u64) > crate::machine::TABLE_CAP {
        return Err(Error::too_large("random transition table"));
    }
    let alphabet: Vec<String> = match get("alphabet") {
        None => vec![UNLABELED.to_string()],
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| Error::parse("params.alphabet", e.to_string()))?,
    };
    let outputs = get("outputs").and_then(|v| v.as_bool()).unwrap_or(false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_with_outputs(&mut rng, nq, beta as u8, &alphabet, outputs);
    Ok(m.with_source(json!({
        "builtin": "random",
        "params": {"seed": seed, "states": nq, "beta": beta, "alphabet": alphabet, "outputs": outputs},
    })))
}

impl ZooEntry {
    /// Labels used when enumerating test graphs for this entry.
    pub fn corpus_alphabet(&self) -> Vec<String> {
        let labels: &[&str] = match self.name {
            "black" => &["white", "black"],
            "c3" => &["0", "1", "2"],
            _ => &[UNLABELED],
        };
        labels.iter().map(|s| s.to_string()).collect()
    }
}
