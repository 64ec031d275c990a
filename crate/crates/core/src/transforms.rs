//! Machine-to-machine compilers. Each output keeps the source machine's
//! evaluator and decodes its own structured states on the fly.

use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::machine::{
    export_table_capped, is_halting_capped, table_to_rules, BoundedMultiset, Machine, MachineParts, StateId, TABLE_CAP,
};
use crate::popproto::PopulationProtocol;

fn source_of(m: &Machine) -> serde_json::Value {
    if let Some(s) = m.source() {
        return s.clone();
    }
    match export_table_capped(m, 100_000) {
        Ok(t) => serde_json::to_value(table_to_rules(m, &t)).expect("rule table serializes"),
        Err(_) => serde_json::Value::Null,
    }
}

fn transform_source(name: &str, params: serde_json::Value, inputs: &[&Machine]) -> serde_json::Value {
    json!({
        "transform": name,
        "params": params,
        "inputs": inputs.iter().map(|m| source_of(m)).collect::<Vec<_>>(),
    })
}

fn ids(m: &Machine) -> std::ops::Range<StateId> {
    0..m.num_states() as StateId
}

/// Triples `(past, current, phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Triple {
    past: StateId,
    cur: StateId,
    phase: u8,
}

fn enc3(nq: usize, t: Triple) -> StateId {
    ((t.past as usize * nq + t.cur as usize) * 3 + t.phase as usize) as StateId
}

fn dec3(nq: usize, s: StateId) -> Triple {
    let s = s as usize;
    Triple {
        past: ((s / 3) / nq) as StateId,
        cur: ((s / 3) % nq) as StateId,
        phase: (s % 3) as u8,
    }
}

/// The inner multiset a phase-`i` node simulates against: neighbors in the
/// same phase contribute their current state, neighbors one phase ahead
/// their past state.
fn synchronized_view(p: &BoundedMultiset, phase_of: impl Fn(StateId) -> Triple, i: u8, beta: u8) -> BoundedMultiset {
    p.project(beta, |s| {
        let t = phase_of(s);
        if t.phase == i {
            Some(t.cur)
        } else if t.phase == (i + 1) % 3 {
            Some(t.past)
        } else {
            None
        }
    })
}

/// Phase-counter synchronizer. A node waits while some neighbor is a phase
/// behind; otherwise it takes one step of the source machine against the
/// states its neighbors had in its own round, and advances its phase.
pub fn synchronize(m: &Machine) -> Result<Machine> {
    let nq = m.num_states();
    let mut states = Vec::with_capacity(3 * nq * nq);
    for s in 0..(3 * nq * nq) as StateId {
        let t = dec3(nq, s);
        states.push(format!("<{},{},{}>", m.state_name(t.past), m.state_name(t.cur), t.phase));
    }
    let inner = m.clone();
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let t = dec3(nq, s);
        let behind = (t.phase + 2) % 3;
        if p.any(|x| dec3(nq, x).phase == behind) {
            return Ok(s);
        }
        let view = synchronized_view(p, |x| dec3(nq, x), t.phase, inner.beta());
        let next = inner.delta(t.cur, &view).map_err(|e| e.to_string())?;
        Ok(enc3(
            nq,
            Triple {
                past: t.cur,
                cur: next,
                phase: (t.phase + 1) % 3,
            },
        ))
    };
    let both = |pred: &dyn Fn(StateId) -> bool| -> Vec<StateId> {
        (0..(3 * nq * nq) as StateId)
            .filter(|&s| {
                let t = dec3(nq, s);
                pred(t.past) && pred(t.cur)
            })
            .collect()
    };
    let machine = Machine::new(MachineParts {
        name: format!("synchronize({})", m.name()),
        states,
        alphabet: m.alphabet().to_vec(),
        beta: m.beta(),
        init: (0..m.alphabet().len())
            .map(|a| {
                let q = m.init_state(a);
                enc3(nq, Triple { past: q, cur: q, phase: 0 })
            })
            .collect(),
        accepting: both(&|q| m.is_accepting(q)),
        rejecting: both(&|q| m.is_rejecting(q)),
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(transform_source("synchronize", json!({}), &[m])))
}

/// Phase of a state of [`synchronize`]'s output.
pub fn synchronizer_phase(m_states: usize, s: StateId) -> u8 {
    dec3(m_states, s).phase
}

/// Phase of a state of [`liberal_strong_to_exclusive_strong`]'s output.
pub fn exclusive_phase(m_states: usize, s: StateId) -> u8 {
    dec3(m_states, s / 2).phase
}

/// Liberal strong-fairness machine to exclusive strong-fairness machine.
/// States are `(past, current, phase, flag)`. A node with a lowered flag
/// raises it once no neighbor is a phase ahead, or advances silently when
/// neighbors have moved on; a node with a raised flag performs one source
/// step using the synchronized view once no neighbor is a phase behind.
pub fn liberal_strong_to_exclusive_strong(m: &Machine) -> Result<Machine> {
    let nq = m.num_states();
    let total = 6 * nq * nq;
    let dec = move |s: StateId| (dec3(nq, s / 2), s % 2 == 1);
    let enc = move |t: Triple, flag: bool| enc3(nq, t) * 2 + flag as StateId;
    let states: Vec<String> = (0..total as StateId)
        .map(|s| {
            let (t, flag) = dec(s);
            format!(
                "<{},{},{},{}>",
                m.state_name(t.past),
                m.state_name(t.cur),
                t.phase,
                if flag { "T" } else { "F" }
            )
        })
        .collect();
    let inner = m.clone();
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let (t, flag) = dec(s);
        let ahead = (t.phase + 1) % 3;
        let behind = (t.phase + 2) % 3;
        let any_phase = |ph: u8| p.any(|x| dec(x).0.phase == ph);
        if !flag {
            if !any_phase(ahead) {
                return Ok(enc(t, true));
            }
            if any_phase(behind) {
                return Ok(s);
            }
            return Ok(enc(
                Triple {
                    past: t.cur,
                    cur: t.cur,
                    phase: ahead,
                },
                false,
            ));
        }
        if any_phase(behind) {
            return Ok(s);
        }
        let view = synchronized_view(p, |x| dec(x).0, t.phase, inner.beta());
        let next = inner.delta(t.cur, &view).map_err(|e| e.to_string())?;
        Ok(enc(
            Triple {
                past: t.cur,
                cur: next,
                phase: ahead,
            },
            false,
        ))
    };
    let both = |pred: &dyn Fn(StateId) -> bool| -> Vec<StateId> {
        (0..total as StateId)
            .filter(|&s| {
                let t = dec(s).0;
                pred(t.past) && pred(t.cur)
            })
            .collect()
    };
    let machine = Machine::new(MachineParts {
        name: format!("lib2excl({})", m.name()),
        states,
        alphabet: m.alphabet().to_vec(),
        beta: m.beta(),
        init: (0..m.alphabet().len())
            .map(|a| {
                let q = m.init_state(a);
                enc(Triple { past: q, cur: q, phase: 0 }, false)
            })
            .collect(),
        accepting: both(&|q| m.is_accepting(q)),
        rejecting: both(&|q| m.is_rejecting(q)),
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(transform_source("lib2excl-strong", json!({}), &[m])))
}

/// Exclusive strong-fairness machine to liberal strong-fairness machine.
/// A state change of the source goes through an intermediate pair
/// `<old,new>`; any intermediate neighbor makes plain nodes wait and pair
/// nodes fall back to their old state. Steps that leave the state unchanged
/// skip the intermediate, so halting machines stay halting. Intermediates
/// count as decided only for non-halting sources.
pub fn exclusive_strong_to_liberal_strong(m: &Machine) -> Result<Machine> {
    let nq = m.num_states();
    let total = nq + nq * nq;
    let pair = move |s: StateId| -> Option<(StateId, StateId)> {
        let s = s as usize;
        (s >= nq).then(|| (((s - nq) / nq) as StateId, ((s - nq) % nq) as StateId))
    };
    let enc_pair = move |a: StateId, b: StateId| (nq + a as usize * nq + b as usize) as StateId;
    let mut states: Vec<String> = m.states().to_vec();
    for a in ids(m) {
        for b in ids(m) {
            states.push(format!("<{},{}>", m.state_name(a), m.state_name(b)));
        }
    }
    let inner = m.clone();
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let intermediate_seen = p.any(|x| pair(x).is_some());
        match pair(s) {
            None if intermediate_seen => Ok(s),
            None => {
                let next = inner.delta(s, p).map_err(|e| e.to_string())?;
                Ok(if next == s { s } else { enc_pair(s, next) })
            }
            Some((old, _)) if intermediate_seen => Ok(old),
            Some((_, new)) => Ok(new),
        }
    };
    // Intermediates of a halting source never carry a decided state, and
    // flagging them would break halting.
    let flag_pairs = !matches!(is_halting_capped(m, TABLE_CAP), Ok(true));
    let lift = |pred: &dyn Fn(StateId) -> bool| -> Vec<StateId> {
        (0..total as StateId)
            .filter(|&s| match pair(s) {
                None => pred(s),
                Some((a, b)) => flag_pairs && pred(a) && pred(b),
            })
            .collect()
    };
    let machine = Machine::new(MachineParts {
        name: format!("excl2lib({})", m.name()),
        states,
        alphabet: m.alphabet().to_vec(),
        beta: m.beta(),
        init: (0..m.alphabet().len()).map(|a| m.init_state(a)).collect(),
        accepting: lift(&|q| m.is_accepting(q)),
        rejecting: lift(&|q| m.is_rejecting(q)),
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(transform_source("excl2lib-strong", json!({}), &[m])))
}

/// Exclusive weak-fairness machine to synchronous machine. Each node
/// tracks its state under both 2-colorings of a bipartite graph; even
/// rounds update the color-0 component against neighbors' color-1
/// components and odd rounds the reverse.
pub fn exclusive_weak_to_synchronous_weak(m: &Machine) -> Result<Machine> {
    let nq = m.num_states();
    let total = 2 * nq * nq;
    let dec = move |s: StateId| {
        let s = s as usize;
        ((s / 2 / nq) as StateId, (s / 2 % nq) as StateId, (s % 2) as u8)
    };
    let enc = move |a: StateId, b: StateId, r: u8| ((a as usize * nq + b as usize) * 2 + r as usize) as StateId;
    let states: Vec<String> = (0..total as StateId)
        .map(|s| {
            let (a, b, r) = dec(s);
            format!("<{},{},{}>", m.state_name(a), m.state_name(b), r)
        })
        .collect();
    let inner = m.clone();
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let (a, b, r) = dec(s);
        if r == 0 {
            let p1 = p.project(inner.beta(), |x| Some(dec(x).1));
            let a2 = inner.delta(a, &p1).map_err(|e| e.to_string())?;
            Ok(enc(a2, b, 1))
        } else {
            let p0 = p.project(inner.beta(), |x| Some(dec(x).0));
            let b2 = inner.delta(b, &p0).map_err(|e| e.to_string())?;
            Ok(enc(a, b2, 0))
        }
    };
    let both = |pred: &dyn Fn(StateId) -> bool| -> Vec<StateId> {
        (0..total as StateId)
            .filter(|&s| {
                let (a, b, _) = dec(s);
                pred(a) && pred(b)
            })
            .collect()
    };
    let machine = Machine::new(MachineParts {
        name: format!("exclweak2sync({})", m.name()),
        states,
        alphabet: m.alphabet().to_vec(),
        beta: m.beta(),
        init: (0..m.alphabet().len())
            .map(|i| {
                let q = m.init_state(i);
                enc(q, q, 0)
            })
            .collect(),
        accepting: both(&|q| m.is_accepting(q)),
        rejecting: both(&|q| m.is_rejecting(q)),
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(transform_source("exclweak2sync", json!({}), &[m])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combinator {
    And,
    Or,
    Left,
}

impl std::str::FromStr for Combinator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Combinator::And),
            "or" => Ok(Combinator::Or),
            "left" => Ok(Combinator::Left),
            _ => Err(Error::parse("combinator", format!("unknown combinator {s:?}; expected and|or|left"))),
        }
    }
}

impl std::fmt::Display for Combinator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Combinator::And => "and",
            Combinator::Or => "or",
            Combinator::Left => "left",
        })
    }
}

/// Runs two machines side by side. Each component observes the projection
/// of the neighbors' states onto its own machine, saturated at its own
/// bound. Under `And` a pair rejects when either side rejects and the pair
/// does not accept.
pub fn product(m1: &Machine, m2: &Machine, comb: Combinator) -> Result<Machine> {
    if m1.alphabet() != m2.alphabet() {
        return Err(Error::domain("product requires machines over the same alphabet"));
    }
    let n2 = m2.num_states();
    let total = m1.num_states() * n2;
    let dec = move |s: StateId| ((s as usize / n2) as StateId, (s as usize % n2) as StateId);
    let enc = move |a: StateId, b: StateId| (a as usize * n2 + b as usize) as StateId;
    let mut states = Vec::with_capacity(total);
    for a in ids(m1) {
        for b in ids(m2) {
            states.push(format!("<{},{}>", m1.state_name(a), m2.state_name(b)));
        }
    }
    let (i1, i2) = (m1.clone(), m2.clone());
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let (a, b) = dec(s);
        let p1 = p.project(i1.beta(), |x| Some(dec(x).0));
        let p2 = p.project(i2.beta(), |x| Some(dec(x).1));
        let a2 = i1.delta(a, &p1).map_err(|e| e.to_string())?;
        let b2 = i2.delta(b, &p2).map_err(|e| e.to_string())?;
        Ok(enc(a2, b2))
    };
    let pick = |pred: &dyn Fn(StateId, StateId) -> bool| -> Vec<StateId> {
        (0..total as StateId)
            .filter(|&s| {
                let (a, b) = dec(s);
                pred(a, b)
            })
            .collect()
    };
    let (accepting, rejecting) = match comb {
        Combinator::And => (
            pick(&|a, b| m1.is_accepting(a) && m2.is_accepting(b)),
            pick(&|a, b| (m1.is_rejecting(a) || m2.is_rejecting(b)) && !(m1.is_accepting(a) && m2.is_accepting(b))),
        ),
        Combinator::Or => (
            pick(&|a, b| m1.is_accepting(a) || m2.is_accepting(b)),
            pick(&|a, b| m1.is_rejecting(a) && m2.is_rejecting(b)),
        ),
        Combinator::Left => (pick(&|a, _| m1.is_accepting(a)), pick(&|a, _| m1.is_rejecting(a))),
    };
    let machine = Machine::new(MachineParts {
        name: format!("product-{comb}({},{})", m1.name(), m2.name()),
        states,
        alphabet: m1.alphabet().to_vec(),
        beta: m1.beta().max(m2.beta()),
        init: (0..m1.alphabet().len())
            .map(|i| enc(m1.init_state(i), m2.init_state(i)))
            .collect(),
        accepting,
        rejecting,
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(transform_source("product", json!({"combinator": comb.to_string()}), &[m1, m2])))
}

/// Decoded state of [`decount_bounded_degree`]'s output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecountState {
    pub init: StateId,
    pub cur: StateId,
    pub phase: u8,
    pub fc: u8,
    pub sc: u8,
}

/// State codec for [`decount_bounded_degree`] over a source machine with
/// `nq` states and degree bound `k`.
#[derive(Clone, Copy, Debug)]
pub struct DecountCodec {
    pub nq: usize,
    pub colors: usize,
}

impl DecountCodec {
    pub fn new(nq: usize, k: usize) -> Self {
        DecountCodec { nq, colors: k * k + 1 }
    }

    pub fn total(&self) -> usize {
        6 * self.colors * self.nq * self.nq
    }

    pub fn encode(&self, d: DecountState) -> StateId {
        let mut x = d.init as usize;
        x = x * self.nq + d.cur as usize;
        x = x * 3 + d.phase as usize;
        x = x * self.colors + d.fc as usize;
        x = x * 2 + d.sc as usize;
        x as StateId
    }

    pub fn decode(&self, s: StateId) -> DecountState {
        let mut x = s as usize;
        let sc = (x % 2) as u8;
        x /= 2;
        let fc = (x % self.colors) as u8;
        x /= self.colors;
        let phase = (x % 3) as u8;
        x /= 3;
        let cur = (x % self.nq) as StateId;
        x /= self.nq;
        DecountState {
            init: x as StateId,
            cur,
            phase,
            fc,
            sc,
        }
    }
}

/// Counting machine to set-detection machine on graphs of maximum degree
/// at most `k`. Nodes repeatedly pick first colors from `0..=k²` until
/// every closed neighborhood is colored injectively, and then simulate the
/// source machine, counting neighbors in state `s` as the number of
/// distinct neighbor states whose current component is `s`. Toggling
/// second colors exposes nodes that share a first color; a detected
/// conflict sends the neighborhood back to phase 0.
pub fn decount_bounded_degree(m: &Machine, k: usize) -> Result<Machine> {
    if k == 0 || k > 15 {
        return Err(Error::domain("degree bound must lie in 1..=15"));
    }
    let nq = m.num_states();
    let codec = DecountCodec::new(nq, k);
    let total = codec.total();
    let colors = codec.colors as u8;
    let states: Vec<String> = (0..total as StateId)
        .map(|s| {
            let d = codec.decode(s);
            format!(
                "({},{},{},{},{})",
                m.state_name(d.init),
                m.state_name(d.cur),
                d.phase,
                d.fc,
                d.sc
            )
        })
        .collect();
    let inner = m.clone();
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let me = codec.decode(s);
        let nbrs: Vec<DecountState> = p.support().map(|x| codec.decode(x)).collect();
        let some_phase = |ph: u8| nbrs.iter().any(|d| d.phase == ph);
        let all_phase = |ph: u8| nbrs.iter().all(|d| d.phase == ph);
        let next_fc = (me.fc + 1) % colors;
        let mut out = me;
        match me.phase {
            0 => {
                if some_phase(2) {
                    return Ok(s);
                }
                out.cur = me.init;
                out.phase = 1;
            }
            1 => {
                if some_phase(0) {
                    out.fc = next_fc;
                } else if all_phase(1) {
                    out.phase = 2;
                    out.fc = next_fc;
                } else if some_phase(2) {
                    out.phase = 2;
                } else {
                    return Ok(s);
                }
            }
            _ => {
                if some_phase(1) {
                    out.fc = next_fc;
                } else if all_phase(2) {
                    let mut seen = [u8::MAX; 256];
                    let mut conflict = false;
                    for (fc, sc) in std::iter::once((me.fc, me.sc)).chain(nbrs.iter().map(|d| (d.fc, d.sc))) {
                        let slot = &mut seen[fc as usize];
                        if *slot == u8::MAX {
                            *slot = sc;
                        } else if *slot != sc {
                            conflict = true;
                        }
                    }
                    if conflict {
                        out.phase = 0;
                    } else {
                        let mut view = BoundedMultiset::empty(inner.beta());
                        for d in &nbrs {
                            view.add(d.cur, 1);
                        }
                        out.cur = inner.delta(me.cur, &view).map_err(|e| e.to_string())?;
                        out.sc = 1 - me.sc;
                    }
                } else if some_phase(0) {
                    out.phase = 0;
                } else {
                    return Ok(s);
                }
            }
        }
        Ok(codec.encode(out))
    };
    let by_current = |pred: &dyn Fn(StateId) -> bool| -> Vec<StateId> {
        (0..total as StateId).filter(|&s| pred(codec.decode(s).cur)).collect()
    };
    let machine = Machine::new(MachineParts {
        name: format!("decount{k}({})", m.name()),
        states,
        alphabet: m.alphabet().to_vec(),
        beta: 1,
        init: (0..m.alphabet().len())
            .map(|a| {
                let q = m.init_state(a);
                codec.encode(DecountState {
                    init: q,
                    cur: q,
                    phase: 0,
                    fc: 0,
                    sc: 0,
                })
            })
            .collect(),
        accepting: by_current(&|q| m.is_accepting(q)),
        rejecting: by_current(&|q| m.is_rejecting(q)),
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(transform_source("decount", json!({"k": k}), &[m])))
}

/// Kind of a state of [`popproto_to_automaton`]'s output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PpState {
    Plain(StateId),
    Request(StateId),
    Respond(StateId),
    Abort(StateId),
    Pair(StateId, StateId),
}

#[derive(Clone, Copy, Debug)]
pub struct PpCodec {
    pub nq: usize,
}

impl PpCodec {
    pub fn total(&self) -> usize {
        4 * self.nq + self.nq * self.nq
    }

    pub fn encode(&self, s: PpState) -> StateId {
        let n = self.nq as StateId;
        match s {
            PpState::Plain(q) => q,
            PpState::Request(q) => n + q,
            PpState::Respond(q) => 2 * n + q,
            PpState::Abort(q) => 3 * n + q,
            PpState::Pair(a, b) => 4 * n + a * n + b,
        }
    }

    pub fn decode(&self, s: StateId) -> PpState {
        let n = self.nq as StateId;
        match s / n {
            0 => PpState::Plain(s),
            1 => PpState::Request(s - n),
            2 => PpState::Respond(s - 2 * n),
            3 => PpState::Abort(s - 3 * n),
            _ => {
                let x = s - 4 * n;
                PpState::Pair(x / n, x % n)
            }
        }
    }
}

/// Graph population protocol to exclusive strong-fairness machine with
/// counting bound 2. An initiator raises `?`, a unique responder answers
/// `!`, the initiator moves to `<old, new>` while the responder takes its
/// part, and the initiator then drops its old state. Nodes that see more
/// than one partner abort through `⊥`.
pub fn popproto_to_automaton(pp: &PopulationProtocol) -> Result<Machine> {
    let nq = pp.num_states();
    let codec = PpCodec { nq };
    let total = codec.total();
    let states: Vec<String> = (0..total as StateId)
        .map(|s| match codec.decode(s) {
            PpState::Plain(q) => pp.state_name(q).to_string(),
            PpState::Request(q) => format!("<{},?>", pp.state_name(q)),
            PpState::Respond(q) => format!("<{},!>", pp.state_name(q)),
            PpState::Abort(q) => format!("<{},_|_>", pp.state_name(q)),
            PpState::Pair(a, b) => format!("<{},{}>", pp.state_name(a), pp.state_name(b)),
        })
        .collect();
    let proto = pp.clone();
    let delta = move |s: StateId, p: &BoundedMultiset| -> std::result::Result<StateId, String> {
        let kinds: Vec<(PpState, u8)> = p.iter().map(|(x, k)| (codec.decode(x), k)).collect();
        let count = |f: &dyn Fn(&PpState) -> bool| -> u8 {
            kinds.iter().filter(|(x, _)| f(x)).map(|&(_, k)| k).sum::<u8>().min(2)
        };
        let plain = |x: &PpState| matches!(x, PpState::Plain(_));
        let request = |x: &PpState| matches!(x, PpState::Request(_));
        let respond = |x: &PpState| matches!(x, PpState::Respond(_));
        let pair = |x: &PpState| matches!(x, PpState::Pair(..));
        let non_plain = count(&|x| !plain(x));
        let out = match codec.decode(s) {
            PpState::Plain(q) => {
                let req = count(&request);
                if non_plain == 0 {
                    PpState::Request(q)
                } else if req == 1 && non_plain == 1 {
                    PpState::Respond(q)
                } else if req >= 2 {
                    PpState::Abort(q)
                } else {
                    PpState::Plain(q)
                }
            }
            PpState::Request(q) => {
                if non_plain == 0 {
                    PpState::Request(q)
                } else if count(&respond) == 1 && non_plain == 1 {
                    let partner = kinds
                        .iter()
                        .find_map(|(x, _)| match x {
                            PpState::Respond(r) => Some(*r),
                            _ => None,
                        })
                        .expect("one responder");
                    PpState::Pair(q, proto.delta(q, partner).0)
                } else {
                    PpState::Abort(q)
                }
            }
            PpState::Respond(q) => {
                if count(&request) == 1 && non_plain == 1 {
                    PpState::Respond(q)
                } else if count(&pair) == 1 && non_plain == 1 {
                    let initiator = kinds
                        .iter()
                        .find_map(|(x, _)| match x {
                            PpState::Pair(a, _) => Some(*a),
                            _ => None,
                        })
                        .expect("one initiator");
                    PpState::Plain(proto.delta(initiator, q).1)
                } else {
                    PpState::Plain(q)
                }
            }
            PpState::Abort(q) => {
                if count(&|x| request(x) || respond(x)) > 0 {
                    PpState::Abort(q)
                } else {
                    PpState::Plain(q)
                }
            }
            PpState::Pair(old, new) => {
                if count(&respond) > 0 {
                    PpState::Pair(old, new)
                } else {
                    PpState::Plain(new)
                }
            }
        };
        Ok(codec.encode(out))
    };
    let lift = |pred: &dyn Fn(StateId) -> bool| -> Vec<StateId> {
        (0..total as StateId)
            .filter(|&s| match codec.decode(s) {
                PpState::Plain(q) | PpState::Request(q) | PpState::Respond(q) | PpState::Abort(q) => pred(q),
                PpState::Pair(a, b) => pred(a) && pred(b),
            })
            .collect()
    };
    let machine = Machine::new(MachineParts {
        name: format!("from-popproto({})", pp.name()),
        states,
        alphabet: pp.alphabet().to_vec(),
        beta: 2,
        init: (0..pp.alphabet().len()).map(|a| pp.init_state(a)).collect(),
        accepting: lift(&|q| pp.is_accepting(q)),
        rejecting: lift(&|q| pp.is_rejecting(q)),
        delta: Arc::new(delta),
    })?;
    Ok(machine.with_source(json!({
        "transform": "from-popproto",
        "params": {},
        "protocol": pp.to_json(),
    })))
}
