//! Graph population protocols: an ordered pair of adjacent nodes interacts
//! and jointly updates its states.

use std::collections::BTreeMap;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::machine::{Configuration, StateId};
use crate::verdict::{tarjan_scc, Outcome, Stats, Verdict, DEFAULT_MAX_CONFIGS};

#[derive(Clone, Debug)]
pub struct PopulationProtocol {
    name: String,
    states: Arc<Vec<String>>,
    alphabet: Vec<String>,
    init: Vec<StateId>,
    /// Row-major `nq × nq` table of `(initiator', responder')`.
    delta: Arc<Vec<(StateId, StateId)>>,
    accepting: Arc<Vec<bool>>,
    rejecting: Arc<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRule {
    pub lhs: [String; 2],
    pub rhs: [String; 2],
}

/// JSON form. Pairs without a rule are left unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub init: BTreeMap<String, String>,
    #[serde(default)]
    pub accepting: Vec<String>,
    #[serde(default)]
    pub rejecting: Vec<String>,
    #[serde(default)]
    pub pair_rules: Vec<PairRule>,
}

impl PopulationProtocol {
    /// `delta` maps each ordered pair of state indices to its successor pair.
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        alphabet: Vec<String>,
        init: Vec<StateId>,
        delta: impl Fn(StateId, StateId) -> (StateId, StateId),
        accepting: &[StateId],
        rejecting: &[StateId],
    ) -> Result<Self> {
        let nq = states.len();
        if nq == 0 {
            return Err(Error::validation("protocol has no states"));
        }
        if alphabet.is_empty() || init.len() != alphabet.len() {
            return Err(Error::validation("initialization must cover the alphabet"));
        }
        if init.iter().any(|&q| q as usize >= nq) {
            return Err(Error::validation("initial state out of range"));
        }
        let mut table = Vec::with_capacity(nq * nq);
        for a in 0..nq as StateId {
            for b in 0..nq as StateId {
                let (x, y) = delta(a, b);
                if x as usize >= nq || y as usize >= nq {
                    return Err(Error::validation("transition target out of range"));
                }
                table.push((x, y));
            }
        }
        let mut acc = vec![false; nq];
        let mut rej = vec![false; nq];
        for &q in accepting {
            *acc.get_mut(q as usize).ok_or_else(|| Error::validation("accepting state out of range"))? = true;
        }
        for &q in rejecting {
            *rej.get_mut(q as usize).ok_or_else(|| Error::validation("rejecting state out of range"))? = true;
        }
        if let Some(q) = (0..nq).find(|&q| acc[q] && rej[q]) {
            return Err(Error::validation(format!(
                "state {:?} is both accepting and rejecting",
                states[q]
            )));
        }
        Ok(PopulationProtocol {
            name: name.into(),
            states: Arc::new(states),
            alphabet,
            init,
            delta: Arc::new(table),
            accepting: Arc::new(acc),
            rejecting: Arc::new(rej),
        })
    }

    pub fn from_spec(spec: &ProtocolSpec) -> Result<Self> {
        let index: FxHashMap<&str, StateId> = spec
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as StateId))
            .collect();
        if index.len() != spec.states.len() {
            return Err(Error::validation("duplicate state name"));
        }
        let lookup = |loc: String, s: &str| -> Result<StateId> {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::parse(loc, format!("unknown state {s:?}")))
        };
        let mut init = Vec::with_capacity(spec.alphabet.len());
        for a in &spec.alphabet {
            let q = spec
                .init
                .get(a)
                .ok_or_else(|| Error::parse(format!("init.{a}"), "label has no initial state"))?;
            init.push(lookup(format!("init.{a}"), q)?);
        }
        let nq = spec.states.len();
        let mut table: Vec<(StateId, StateId)> = (0..nq * nq)
            .map(|i| ((i / nq) as StateId, (i % nq) as StateId))
            .collect();
        let mut seen = vec![false; nq * nq];
        for (i, r) in spec.pair_rules.iter().enumerate() {
            let loc = format!("pair_rules[{i}]");
            let a = lookup(loc.clone(), &r.lhs[0])?;
            let b = lookup(loc.clone(), &r.lhs[1])?;
            let slot = a as usize * nq + b as usize;
            if seen[slot] {
                return Err(Error::parse(loc, "duplicate left-hand side"));
            }
            seen[slot] = true;
            table[slot] = (lookup(loc.clone(), &r.rhs[0])?, lookup(loc, &r.rhs[1])?);
        }
        let acc = spec
            .accepting
            .iter()
            .enumerate()
            .map(|(i, s)| lookup(format!("accepting[{i}]"), s))
            .collect::<Result<Vec<_>>>()?;
        let rej = spec
            .rejecting
            .iter()
            .enumerate()
            .map(|(i, s)| lookup(format!("rejecting[{i}]"), s))
            .collect::<Result<Vec<_>>>()?;
        PopulationProtocol::new(
            spec.name.clone().unwrap_or_else(|| "protocol".into()),
            spec.states.clone(),
            spec.alphabet.clone(),
            init,
            |a, b| table[a as usize * nq + b as usize],
            &acc,
            &rej,
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let spec: ProtocolSpec = serde_json::from_str(text).map_err(|e| Error::parse("protocol", e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> ProtocolSpec {
        let nq = self.num_states();
        let mut pair_rules = Vec::new();
        for a in 0..nq as StateId {
            for b in 0..nq as StateId {
                let (x, y) = self.delta(a, b);
                if (x, y) != (a, b) {
                    pair_rules.push(PairRule {
                        lhs: [self.state_name(a).into(), self.state_name(b).into()],
                        rhs: [self.state_name(x).into(), self.state_name(y).into()],
                    });
                }
            }
        }
        let names = |flags: &[bool]| -> Vec<String> {
            (0..nq).filter(|&q| flags[q]).map(|q| self.states[q].clone()).collect()
        };
        ProtocolSpec {
            name: Some(self.name.clone()),
            states: self.states.to_vec(),
            alphabet: self.alphabet.clone(),
            init: self
                .alphabet
                .iter()
                .zip(&self.init)
                .map(|(a, &q)| (a.clone(), self.state_name(q).to_string()))
                .collect(),
            accepting: names(&self.accepting),
            rejecting: names(&self.rejecting),
            pair_rules,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_spec()).expect("protocol serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| i as StateId)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn init_state(&self, a: usize) -> StateId {
        self.init[a]
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn is_rejecting(&self, q: StateId) -> bool {
        self.rejecting[q as usize]
    }

    /// Successor states of initiator `a` and responder `b`.
    pub fn delta(&self, a: StateId, b: StateId) -> (StateId, StateId) {
        self.delta[a as usize * self.num_states() + b as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairSelection {
    pub initiator: usize,
    pub responder: usize,
}

impl PairSelection {
    pub fn new(initiator: usize, responder: usize) -> Self {
        PairSelection { initiator, responder }
    }
}

/// All ordered pairs of adjacent nodes.
pub fn pair_selections(g: &LabeledGraph) -> Vec<PairSelection> {
    let mut out = Vec::with_capacity(2 * g.edges().len());
    for &(u, v) in g.edges() {
        out.push(PairSelection::new(u, v));
        out.push(PairSelection::new(v, u));
    }
    out
}

pub fn pp_initial(pp: &PopulationProtocol, g: &LabeledGraph) -> Result<Configuration> {
    let mut c = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        let label = g.label(v);
        let a = pp
            .alphabet()
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| Error::domain(format!("label {label:?} is not in the protocol's alphabet")))?;
        c.push(pp.init_state(a));
    }
    Ok(c)
}

pub fn pp_step(c: &[StateId], s: PairSelection, pp: &PopulationProtocol, g: &LabeledGraph) -> Result<Configuration> {
    if s.initiator >= g.n() || s.responder >= g.n() || !g.adjacent(s.initiator, s.responder) {
        return Err(Error::domain(format!(
            "nodes {} and {} are not adjacent",
            s.initiator, s.responder
        )));
    }
    let mut next = c.to_vec();
    let (x, y) = pp.delta(c[s.initiator], c[s.responder]);
    next[s.initiator] = x;
    next[s.responder] = y;
    Ok(next)
}

/// Exact decision under strong fairness with stable consensus: every
/// reachable bottom component of the configuration graph must be
/// uniformly accepting (or uniformly rejecting).
pub fn pp_decide(pp: &PopulationProtocol, g: &LabeledGraph) -> Result<Verdict> {
    pp_decide_capped(pp, g, DEFAULT_MAX_CONFIGS)
}

pub fn pp_decide_capped(pp: &PopulationProtocol, g: &LabeledGraph, max_configs: usize) -> Result<Verdict> {
    let pairs = pair_selections(g);
    let start = pp_initial(pp, g)?;
    let mut index: FxHashMap<Configuration, u32> = FxHashMap::default();
    let mut configs: Vec<Configuration> = vec![start.clone()];
    index.insert(start, 0);
    let mut offsets = vec![0usize];
    let mut targets: Vec<u32> = Vec::new();
    let mut i = 0;
    while i < configs.len() {
        let c = configs[i].clone();
        let mut succ: Vec<u32> = Vec::with_capacity(pairs.len());
        for &s in &pairs {
            let d = pp_step(&c, s, pp, g)?;
            let id = match index.get(&d) {
                Some(&id) => id,
                None => {
                    if configs.len() >= max_configs {
                        return Ok(Verdict::too_large(format!(
                            "more than {max_configs} reachable configurations"
                        )));
                    }
                    let id = configs.len() as u32;
                    index.insert(d.clone(), id);
                    configs.push(d);
                    id
                }
            };
            succ.push(id);
        }
        succ.sort_unstable();
        succ.dedup();
        targets.extend(succ);
        offsets.push(targets.len());
        i += 1;
    }
    let (comp, ncomp) = tarjan_scc(&offsets, &targets);
    let mut bottom = vec![true; ncomp];
    let mut all_acc = vec![true; ncomp];
    let mut all_rej = vec![true; ncomp];
    for v in 0..configs.len() {
        let cv = comp[v] as usize;
        for &w in &targets[offsets[v]..offsets[v + 1]] {
            if comp[w as usize] as usize != cv {
                bottom[cv] = false;
            }
        }
        all_acc[cv] &= configs[v].iter().all(|&q| pp.is_accepting(q));
        all_rej[cv] &= configs[v].iter().all(|&q| pp.is_rejecting(q));
    }
    let bottoms: Vec<usize> = (0..ncomp).filter(|&k| bottom[k]).collect();
    let outcome = if bottoms.iter().all(|&k| all_acc[k]) {
        Outcome::Accept
    } else if bottoms.iter().all(|&k| all_rej[k]) {
        Outcome::Reject
    } else {
        Outcome::Inconsistent
    };
    Ok(Verdict {
        outcome,
        witness: Vec::new(),
        stats: Stats {
            configs: configs.len(),
            edges: targets.len(),
            product_states: 0,
            components: ncomp,
        },
        note: None,
    })
}

fn bw() -> Vec<String> {
    vec!["white".into(), "black".into()]
}

/// Parity of the number of black nodes. Every node starts as an active
/// token carrying its own bit. Two tokens merge into one carrying the sum
/// mod 2; a token interacting with a passive node hops to it, and both
/// adopt the token's bit. Accepts iff the number of black nodes is even.
pub fn parity_protocol() -> PopulationProtocol {
    // A0, A1, P0, P1
    let active = |q: StateId| q < 2;
    let bit = |q: StateId| q % 2;
    let delta = |a: StateId, b: StateId| match (active(a), active(b)) {
        (true, true) => {
            let x = (bit(a) + bit(b)) % 2;
            (x, 2 + x)
        }
        (true, false) => (2 + bit(a), bit(a)),
        (false, true) => (bit(b), 2 + bit(b)),
        (false, false) => (a, b),
    };
    PopulationProtocol::new(
        "parity",
        vec!["A0".into(), "A1".into(), "P0".into(), "P1".into()],
        bw(),
        vec![0, 1],
        delta,
        &[0, 2],
        &[1, 3],
    )
    .expect("parity protocol is well formed")
}

/// At least `c` black nodes, for `1 <= c <= 4`. Values below `c` merge
/// into the responder and so travel through the graph; once a pair sums to
/// `c` both adopt `c`, which then spreads.
pub fn threshold_protocol(c: usize) -> Result<PopulationProtocol> {
    if !(1..=4).contains(&c) {
        return Err(Error::domain("threshold must lie in 1..=4"));
    }
    let cap = c as StateId;
    let delta = move |a: StateId, b: StateId| {
        if a + b >= cap {
            (cap, cap)
        } else {
            (0, a + b)
        }
    };
    PopulationProtocol::new(
        format!("threshold-{c}"),
        (0..=c).map(|v| v.to_string()).collect(),
        bw(),
        vec![0, 1],
        delta,
        &[cap],
        &(0..cap).collect::<Vec<_>>(),
    )
}
