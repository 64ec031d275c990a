//! Exact Accept / Reject / Inconsistent decisions by exhaustive analysis of
//! the reachable configuration graph.
//!
//! Strong fairness: a strongly fair run eventually stays inside one bottom
//! SCC and visits all of it infinitely often, and every reachable bottom SCC
//! is the limit of some strongly fair run. So the machine accepts iff every
//! reachable bottom SCC consists of accepting configurations.
//!
//! Weak fairness: every edge of the configuration graph is annotated with the
//! nodes whose selection is compatible with it (nodes that moved, plus
//! nodes whose update is a no-op). A weakly fair run's infinitely visited
//! part lies in one SCC whose internal edges cover every node; conversely
//! such an SCC carries a weakly fair run through each of its vertices. The
//! machine accepts iff every covering SCC consists of accepting
//! configurations. The pending-set product is also available and used as a
//! cross-check.
//!
//! Liberal selection always includes the empty selection, so every
//! configuration has a self-loop; self-loops count as cycles throughout.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::{check_model_class, config_to_json, Acceptance, Fairness, ModelClass, SelectionConstraint};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::machine::{initial_configuration, is_halting, BoundedMultiset, Configuration, Machine, StateId};

pub const DEFAULT_MAX_CONFIGS: usize = 2_000_000;
pub const DEFAULT_MAX_PRODUCT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Accept,
    Reject,
    Inconsistent,
    TooLarge,
}

impl Outcome {
    pub fn is_decided(self) -> bool {
        matches!(self, Outcome::Accept | Outcome::Reject)
    }

    pub fn from_bool(accept: bool) -> Outcome {
        if accept {
            Outcome::Accept
        } else {
            Outcome::Reject
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Which weak-fairness algorithm to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WeakMethod {
    #[default]
    Coverage,
    PendingProduct,
}

#[derive(Clone, Copy, Debug)]
pub struct DecideOptions {
    pub max_configs: usize,
    pub max_product: usize,
    pub witness: bool,
    pub weak_method: WeakMethod,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            max_configs: DEFAULT_MAX_CONFIGS,
            max_product: DEFAULT_MAX_PRODUCT,
            witness: false,
            weak_method: WeakMethod::Coverage,
        }
    }
}

/// A finite run prefix `stem` followed by a `cycle` repeated forever. Each
/// step records the selection applied and the configuration it produced;
/// the cycle ends where it starts.
#[derive(Clone, Debug, PartialEq)]
pub struct Lasso {
    pub start: Configuration,
    pub stem: Vec<(Vec<usize>, Configuration)>,
    pub cycle: Vec<(Vec<usize>, Configuration)>,
    /// What the cycle exhibits: "accepting", "rejecting", "non-accepting",
    /// "non-rejecting" or "neither".
    pub shows: String,
}

impl Lasso {
    pub fn entry(&self) -> &Configuration {
        self.stem.last().map(|s| &s.1).unwrap_or(&self.start)
    }

    /// Checks every step through `successor` and that the cycle closes.
    pub fn replays(&self, m: &Machine, g: &LabeledGraph) -> Result<bool> {
        let mut c = self.start.clone();
        for (sel, next) in &self.stem {
            c = crate::machine::successor(&c, sel, m, g)?;
            if &c != next {
                return Ok(false);
            }
        }
        let entry = c.clone();
        for (sel, next) in &self.cycle {
            c = crate::machine::successor(&c, sel, m, g)?;
            if &c != next {
                return Ok(false);
            }
        }
        Ok(!self.cycle.is_empty() && c == entry)
    }

    /// Union of the nodes selected along the cycle.
    pub fn cycle_selected(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.cycle.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn to_json(&self, m: &Machine, g: &LabeledGraph) -> serde_json::Value {
        let steps = |s: &[(Vec<usize>, Configuration)]| -> Vec<serde_json::Value> {
            s.iter()
                .map(|(sel, c)| {
                    json!({
                        "selection": sel.iter().map(|&v| g.id(v)).collect::<Vec<_>>(),
                        "configuration": config_to_json(c, m, g),
                    })
                })
                .collect()
        };
        json!({
            "shows": self.shows,
            "start": config_to_json(&self.start, m, g),
            "stem": steps(&self.stem),
            "cycle": steps(&self.cycle),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub configs: usize,
    pub edges: usize,
    pub product_states: usize,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Vec<Lasso>,
    pub stats: Stats,
    pub note: Option<String>,
}

impl Verdict {
    pub(crate) fn too_large(note: String) -> Verdict {
        Verdict {
            outcome: Outcome::TooLarge,
            witness: Vec::new(),
            stats: Stats::default(),
            note: Some(note),
        }
    }

    pub fn to_json(&self, m: &Machine, g: &LabeledGraph) -> serde_json::Value {
        let mut v = json!({
            "outcome": self.outcome,
            "stats": self.stats,
        });
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        if !self.witness.is_empty() {
            v["witness"] = json!(self.witness.iter().map(|l| l.to_json(m, g)).collect::<Vec<_>>());
        }
        v
    }
}

enum Interner {
    Packed { bits: u32, map: FxHashMap<u128, u32> },
    Wide(FxHashMap<Box<[StateId]>, u32>),
}

impl Interner {
    fn new(nq: usize, n: usize) -> Self {
        let bits = usize::BITS - (nq.max(2) - 1).leading_zeros();
        if bits as usize * n <= 128 {
            Interner::Packed {
                bits,
                map: FxHashMap::default(),
            }
        } else {
            Interner::Wide(FxHashMap::default())
        }
    }

    /// Returns the id of `c`, inserting it with id `fresh` if absent.
    fn intern(&mut self, c: &[StateId], fresh: u32) -> (u32, bool) {
        match self {
            Interner::Packed { bits, map } => {
                let mut key = 0u128;
                for &q in c {
                    key = (key << *bits) | q as u128;
                }
                match map.entry(key) {
                    std::collections::hash_map::Entry::Occupied(e) => (*e.get(), false),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(fresh);
                        (fresh, true)
                    }
                }
            }
            Interner::Wide(map) => {
                if let Some(&id) = map.get(c) {
                    (id, false)
                } else {
                    map.insert(c.into(), fresh);
                    (fresh, true)
                }
            }
        }
    }

    fn get(&self, c: &[StateId]) -> Option<u32> {
        match self {
            Interner::Packed { bits, map } => {
                let mut key = 0u128;
                for &q in c {
                    key = (key << *bits) | q as u128;
                }
                map.get(&key).copied()
            }
            Interner::Wide(map) => map.get(c).copied(),
        }
    }
}

/// Memoizes δ for one exploration.
struct DeltaCache<'a> {
    m: &'a Machine,
    g: &'a LabeledGraph,
    cache: FxHashMap<(StateId, BoundedMultiset), StateId>,
}

impl<'a> DeltaCache<'a> {
    fn new(m: &'a Machine, g: &'a LabeledGraph) -> Self {
        DeltaCache {
            m,
            g,
            cache: FxHashMap::default(),
        }
    }

    fn updates(&mut self, c: &[StateId], out: &mut Vec<StateId>) -> Result<()> {
        out.clear();
        for v in 0..self.g.n() {
            let p = self.m.observe(c, v, self.g);
            let key = (c[v], p);
            let r = match self.cache.get(&key) {
                Some(&r) => r,
                None => {
                    let r = self.m.delta(key.0, &key.1)?;
                    if self.cache.len() < 4_000_000 {
                        self.cache.insert(key, r);
                    }
                    r
                }
            };
            out.push(r);
        }
        Ok(())
    }
}

/// Reachable configurations with their successor edges in compressed
/// adjacency form. When built with coverage, each edge also carries the
/// set of nodes whose selection is compatible with it.
pub struct ConfigGraph {
    n: usize,
    selection: SelectionConstraint,
    configs: Vec<StateId>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    masks: Option<Vec<u64>>,
    parent: Vec<u32>,
    accepting: Vec<bool>,
    rejecting: Vec<bool>,
}

impl ConfigGraph {
    pub fn num_vertices(&self) -> usize {
        self.accepting.len()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn selection(&self) -> SelectionConstraint {
        self.selection
    }

    pub fn config(&self, i: usize) -> &[StateId] {
        &self.configs[i * self.n..(i + 1) * self.n]
    }

    pub fn successors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    fn edge_masks(&self, i: usize) -> Option<&[u64]> {
        self.masks.as_ref().map(|m| &m[self.offsets[i]..self.offsets[i + 1]])
    }

    pub fn is_accepting(&self, i: usize) -> bool {
        self.accepting[i]
    }

    pub fn is_rejecting(&self, i: usize) -> bool {
        self.rejecting[i]
    }

    pub fn index_of(&self, c: &[StateId]) -> Option<usize> {
        (0..self.num_vertices()).find(|&i| self.config(i) == c)
    }

    /// Graphviz rendering with accepting vertices green and rejecting red.
    pub fn to_dot(&self, m: &Machine) -> String {
        let mut s = String::from("digraph configs {\n  node [shape=box];\n");
        for i in 0..self.num_vertices() {
            let names: Vec<&str> = self.config(i).iter().map(|&q| m.state_name(q)).collect();
            let color = if self.accepting[i] {
                "palegreen"
            } else if self.rejecting[i] {
                "lightcoral"
            } else {
                "white"
            };
            let _ = writeln!(
                s,
                "  c{i} [label=\"{}\", style=filled, fillcolor={color}];",
                names.join(" ").replace('"', "'")
            );
        }
        for i in 0..self.num_vertices() {
            for &j in self.successors(i) {
                let _ = writeln!(s, "  c{i} -> c{j};");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Explores the configurations reachable from the initial one.
pub fn build_config_graph(
    m: &Machine,
    g: &LabeledGraph,
    sc: SelectionConstraint,
    cap: usize,
) -> Result<ConfigGraph> {
    build(m, g, sc, cap, false, false)
}

fn build(
    m: &Machine,
    g: &LabeledGraph,
    sc: SelectionConstraint,
    cap: usize,
    with_masks: bool,
    check_halting: bool,
) -> Result<ConfigGraph> {
    let n = g.n();
    if with_masks && n > 64 {
        return Err(Error::too_large("coverage analysis supports at most 64 nodes"));
    }
    let c0 = initial_configuration(m, g)?;
    let mut interner = Interner::new(m.num_states(), n);
    let mut cg = ConfigGraph {
        n,
        selection: sc,
        configs: Vec::new(),
        offsets: vec![0],
        targets: Vec::new(),
        masks: if with_masks { Some(Vec::new()) } else { None },
        parent: Vec::new(),
        accepting: Vec::new(),
        rejecting: Vec::new(),
    };
    let push_vertex = |cg: &mut ConfigGraph, c: &[StateId], parent: u32| {
        cg.configs.extend_from_slice(c);
        cg.parent.push(parent);
        cg.accepting.push(c.iter().all(|&q| m.is_accepting(q)));
        cg.rejecting.push(c.iter().all(|&q| m.is_rejecting(q)));
    };
    interner.intern(&c0, 0);
    push_vertex(&mut cg, &c0, u32::MAX);
    let mut cache = DeltaCache::new(m, g);
    let mut upd = Vec::with_capacity(n);
    let mut c = vec![0; n];
    let mut next = vec![0; n];
    let mut changing = Vec::with_capacity(n);
    let mut succ: Vec<(u32, u64)> = Vec::new();
    let full: u64 = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut i = 0usize;
    while i < cg.num_vertices() {
        c.copy_from_slice(cg.config(i));
        cache.updates(&c, &mut upd)?;
        if check_halting {
            for v in 0..n {
                if (m.is_accepting(c[v]) || m.is_rejecting(c[v])) && upd[v] != c[v] {
                    return Err(Error::validation(format!(
                        "machine is not halting: state {} moves to {}",
                        m.state_name(c[v]),
                        m.state_name(upd[v])
                    )));
                }
            }
        }
        succ.clear();
        let mut visit = |cfg: &[StateId], mask: u64, cg: &mut ConfigGraph, succ: &mut Vec<(u32, u64)>| -> Result<()> {
            let fresh = cg.num_vertices() as u32;
            let (id, new) = interner.intern(cfg, fresh);
            if new {
                if cg.num_vertices() >= cap {
                    return Err(Error::too_large(format!("more than {cap} reachable configurations")));
                }
                push_vertex(cg, cfg, i as u32);
            }
            succ.push((id, mask));
            Ok(())
        };
        match sc {
            SelectionConstraint::Synchronous => {
                visit(&upd, full, &mut cg, &mut succ)?;
            }
            SelectionConstraint::Exclusive => {
                let mut stable = 0u64;
                for v in 0..n {
                    if upd[v] == c[v] {
                        stable |= 1 << v;
                    }
                }
                if stable != 0 {
                    visit(&c, stable, &mut cg, &mut succ)?;
                }
                for v in 0..n {
                    if upd[v] != c[v] {
                        next.copy_from_slice(&c);
                        next[v] = upd[v];
                        visit(&next, 1 << v, &mut cg, &mut succ)?;
                    }
                }
            }
            SelectionConstraint::Liberal => {
                changing.clear();
                let mut stable = 0u64;
                for v in 0..n {
                    if upd[v] != c[v] {
                        changing.push(v);
                    } else {
                        stable |= 1 << v;
                    }
                }
                if changing.len() > 30 {
                    return Err(Error::too_large("too many simultaneously enabled nodes"));
                }
                for sub in 0u64..(1u64 << changing.len()) {
                    next.copy_from_slice(&c);
                    let mut mask = stable;
                    for (j, &v) in changing.iter().enumerate() {
                        if sub & (1 << j) != 0 {
                            next[v] = upd[v];
                            mask |= 1 << v;
                        }
                    }
                    visit(&next, mask, &mut cg, &mut succ)?;
                }
            }
        }
        for &(t, mk) in &succ {
            cg.targets.push(t);
            if let Some(ms) = cg.masks.as_mut() {
                ms.push(mk);
            }
        }
        cg.offsets.push(cg.targets.len());
        i += 1;
    }
    Ok(cg)
}

/// Strongly connected components of a graph in compressed adjacency form,
/// numbered in reverse topological order (sinks first).
pub fn tarjan_scc(offsets: &[usize], targets: &[u32]) -> (Vec<u32>, usize) {
    let nv = offsets.len() - 1;
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; nv];
    let mut low = vec![0u32; nv];
    let mut on_stack = vec![false; nv];
    let mut comp = vec![UNSEEN; nv];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut ncomp = 0usize;
    for s in 0..nv {
        if index[s] != UNSEEN {
            continue;
        }
        index[s] = counter;
        low[s] = counter;
        counter += 1;
        stack.push(s as u32);
        on_stack[s] = true;
        call.push((s as u32, offsets[s]));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let v = v as usize;
            if *pos < offsets[v + 1] {
                let w = targets[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("scc stack") as usize;
                        on_stack[w] = false;
                        comp[w] = ncomp as u32;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
                if let Some(&(u, _)) = call.last() {
                    let u = u as usize;
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    (comp, ncomp)
}

/// Per-component summary used by both fairness analyses.
struct ComponentInfo {
    /// Component has no edge leaving it.
    bottom: bool,
    /// Union of coverage masks over internal edges.
    cover: u64,
    has_internal_edge: bool,
    non_accepting: Option<u32>,
    non_rejecting: Option<u32>,
}

fn component_info(cg: &ConfigGraph, comp: &[u32], ncomp: usize) -> Vec<ComponentInfo> {
    let mut info: Vec<ComponentInfo> = (0..ncomp)
        .map(|_| ComponentInfo {
            bottom: true,
            cover: 0,
            has_internal_edge: false,
            non_accepting: None,
            non_rejecting: None,
        })
        .collect();
    for i in 0..cg.num_vertices() {
        let ci = comp[i] as usize;
        let inf = &mut info[ci];
        if !cg.accepting[i] && inf.non_accepting.is_none() {
            inf.non_accepting = Some(i as u32);
        }
        if !cg.rejecting[i] && inf.non_rejecting.is_none() {
            inf.non_rejecting = Some(i as u32);
        }
        let masks = cg.edge_masks(i);
        for (k, &t) in cg.successors(i).iter().enumerate() {
            if comp[t as usize] as usize == ci {
                inf.has_internal_edge = true;
                if let Some(ms) = masks {
                    inf.cover |= ms[k];
                }
            } else {
                inf.bottom = false;
            }
        }
    }
    info
}

fn classify<'a>(
    relevant: impl Iterator<Item = &'a ComponentInfo>,
) -> (Outcome, Option<u32>, Option<u32>) {
    let mut bad_acc = None;
    let mut bad_rej = None;
    let mut any = false;
    for inf in relevant {
        any = true;
        if bad_acc.is_none() {
            bad_acc = inf.non_accepting;
        }
        if bad_rej.is_none() {
            bad_rej = inf.non_rejecting;
        }
    }
    assert!(any, "every finite configuration graph has a fair component");
    let outcome = match (bad_acc, bad_rej) {
        (None, Some(_)) => Outcome::Accept,
        (Some(_), None) => Outcome::Reject,
        (Some(_), Some(_)) => Outcome::Inconsistent,
        (None, None) => unreachable!("a configuration cannot be both accepting and rejecting"),
    };
    (outcome, bad_acc, bad_rej)
}

fn halting_needs_lazy_check(m: &Machine, mc: Option<&ModelClass>) -> bool {
    matches!(mc, Some(mc) if mc.acceptance == Acceptance::Halting) && is_halting(m).is_err()
}

/// Bottom-SCC analysis under strong fairness.
pub fn decide_strong(m: &Machine, g: &LabeledGraph, sc: SelectionConstraint, opts: &DecideOptions) -> Result<Verdict> {
    decide_strong_inner(m, g, sc, opts, false)
}

fn decide_strong_inner(
    m: &Machine,
    g: &LabeledGraph,
    sc: SelectionConstraint,
    opts: &DecideOptions,
    lazy_halting: bool,
) -> Result<Verdict> {
    let cg = match build(m, g, sc, opts.max_configs, false, lazy_halting) {
        Ok(cg) => cg,
        Err(Error::TooLarge(msg)) => return Ok(Verdict::too_large(msg)),
        Err(e) => return Err(e),
    };
    let (comp, ncomp) = tarjan_scc(&cg.offsets, &cg.targets);
    let info = component_info(&cg, &comp, ncomp);
    let (outcome, bad_acc, bad_rej) = classify(info.iter().filter(|c| c.bottom));
    let stats = Stats {
        configs: cg.num_vertices(),
        edges: cg.num_edges(),
        product_states: 0,
        components: ncomp,
    };
    let witness = if opts.witness {
        witnesses(m, g, &cg, &comp, outcome, bad_acc, bad_rej, None)?
    } else {
        Vec::new()
    };
    Ok(Verdict {
        outcome,
        witness,
        stats,
        note: None,
    })
}

/// Weak-fairness decision.
pub fn decide_weak(m: &Machine, g: &LabeledGraph, sc: SelectionConstraint, opts: &DecideOptions) -> Result<Verdict> {
    decide_weak_inner(m, g, sc, opts, false)
}

fn decide_weak_inner(
    m: &Machine,
    g: &LabeledGraph,
    sc: SelectionConstraint,
    opts: &DecideOptions,
    lazy_halting: bool,
) -> Result<Verdict> {
    if opts.weak_method == WeakMethod::PendingProduct {
        return decide_weak_product(m, g, sc, opts, lazy_halting);
    }
    let cg = match build(m, g, sc, opts.max_configs, true, lazy_halting) {
        Ok(cg) => cg,
        Err(Error::TooLarge(msg)) => return Ok(Verdict::too_large(msg)),
        Err(e) => return Err(e),
    };
    let full: u64 = if g.n() >= 64 { u64::MAX } else { (1u64 << g.n()) - 1 };
    let (comp, ncomp) = tarjan_scc(&cg.offsets, &cg.targets);
    let info = component_info(&cg, &comp, ncomp);
    let (outcome, bad_acc, bad_rej) = classify(info.iter().filter(|c| c.has_internal_edge && c.cover == full));
    let stats = Stats {
        configs: cg.num_vertices(),
        edges: cg.num_edges(),
        product_states: 0,
        components: ncomp,
    };
    let witness = if opts.witness {
        witnesses(m, g, &cg, &comp, outcome, bad_acc, bad_rej, Some(full))?
    } else {
        Vec::new()
    };
    Ok(Verdict {
        outcome,
        witness,
        stats,
        note: None,
    })
}

/// Weak-fairness decision through the product of configurations with the
/// set of nodes not yet selected in the current round. A selection that
/// empties the pending set is a reset and starts a new round. Weakly fair
/// runs are exactly the product paths with infinitely many resets.
pub fn decide_weak_product(
    m: &Machine,
    g: &LabeledGraph,
    sc: SelectionConstraint,
    opts: &DecideOptions,
    lazy_halting: bool,
) -> Result<Verdict> {
    let n = g.n();
    if n > crate::engine::LIBERAL_ENUM_CAP {
        return Ok(Verdict::too_large(format!("product analysis above {} nodes", crate::engine::LIBERAL_ENUM_CAP)));
    }
    let cg = match build(m, g, sc, opts.max_configs, false, lazy_halting) {
        Ok(cg) => cg,
        Err(Error::TooLarge(msg)) => return Ok(Verdict::too_large(msg)),
        Err(e) => return Err(e),
    };
    let mut interner = Interner::new(m.num_states(), n);
    for i in 0..cg.num_vertices() {
        interner.intern(cg.config(i), i as u32);
    }
    let full: u32 = ((1u64 << n) - 1) as u32;
    let selections: Vec<u32> = match sc {
        SelectionConstraint::Liberal => (0..=full).collect(),
        SelectionConstraint::Exclusive => (0..n).map(|v| 1u32 << v).collect(),
        SelectionConstraint::Synchronous => vec![full],
    };
    let mut index: FxHashMap<(u32, u32), u32> = FxHashMap::default();
    let mut states: Vec<(u32, u32)> = vec![(0, full)];
    index.insert((0, full), 0);
    let mut offsets = vec![0usize];
    let mut targets: Vec<u32> = Vec::new();
    let mut reset: Vec<bool> = Vec::new();
    let mut cache = DeltaCache::new(m, g);
    let mut upd = Vec::new();
    let mut next = vec![0; n];
    let mut i = 0;
    while i < states.len() {
        let (ci, pending) = states[i];
        let c = cg.config(ci as usize).to_vec();
        cache.updates(&c, &mut upd)?;
        let mut out: Vec<(u32, bool)> = Vec::new();
        for &s in &selections {
            for v in 0..n {
                next[v] = if s & (1 << v) != 0 { upd[v] } else { c[v] };
            }
            let cj = interner.get(&next).expect("successor explored");
            let mut p = pending & !s;
            let is_reset = p == 0;
            if is_reset {
                p = full;
            }
            let key = (cj, p);
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    if states.len() >= opts.max_product {
                        return Ok(Verdict::too_large(format!("more than {} product states", opts.max_product)));
                    }
                    let id = states.len() as u32;
                    states.push(key);
                    index.insert(key, id);
                    id
                }
            };
            out.push((id, is_reset));
        }
        out.sort_unstable();
        out.dedup();
        for (t, r) in out {
            targets.push(t);
            reset.push(r);
        }
        offsets.push(targets.len());
        i += 1;
    }
    let (comp, ncomp) = tarjan_scc(&offsets, &targets);
    let mut fair = vec![false; ncomp];
    for u in 0..states.len() {
        for k in offsets[u]..offsets[u + 1] {
            if reset[k] && comp[targets[k] as usize] == comp[u] {
                fair[comp[u] as usize] = true;
            }
        }
    }
    let mut bad_acc = false;
    let mut bad_rej = false;
    for u in 0..states.len() {
        if fair[comp[u] as usize] {
            let ci = states[u].0 as usize;
            bad_acc |= !cg.accepting[ci];
            bad_rej |= !cg.rejecting[ci];
        }
    }
    assert!(fair.iter().any(|&f| f), "weakly fair schedules always exist");
    let outcome = match (bad_acc, bad_rej) {
        (false, true) => Outcome::Accept,
        (true, false) => Outcome::Reject,
        (true, true) => Outcome::Inconsistent,
        (false, false) => unreachable!("a configuration cannot be both accepting and rejecting"),
    };
    Ok(Verdict {
        outcome,
        witness: Vec::new(),
        stats: Stats {
            configs: cg.num_vertices(),
            edges: targets.len(),
            product_states: states.len(),
            components: ncomp,
        },
        note: None,
    })
}

/// The single synchronous run, classified by its eventual cycle.
pub fn decide_synchronous(m: &Machine, g: &LabeledGraph, opts: &DecideOptions) -> Result<Verdict> {
    decide_synchronous_inner(m, g, opts, false)
}

fn decide_synchronous_inner(m: &Machine, g: &LabeledGraph, opts: &DecideOptions, lazy_halting: bool) -> Result<Verdict> {
    let n = g.n();
    let c0 = initial_configuration(m, g)?;
    let mut interner = Interner::new(m.num_states(), n);
    let mut run: Vec<Configuration> = vec![c0.clone()];
    interner.intern(&c0, 0);
    let mut cache = DeltaCache::new(m, g);
    let mut upd = Vec::with_capacity(n);
    let start = loop {
        let c = run.last().unwrap().clone();
        cache.updates(&c, &mut upd)?;
        if lazy_halting {
            for v in 0..n {
                if (m.is_accepting(c[v]) || m.is_rejecting(c[v])) && upd[v] != c[v] {
                    return Err(Error::validation(format!(
                        "machine is not halting: state {} moves to {}",
                        m.state_name(c[v]),
                        m.state_name(upd[v])
                    )));
                }
            }
        }
        let (id, new) = interner.intern(&upd, run.len() as u32);
        if !new {
            break id as usize;
        }
        if run.len() >= opts.max_configs {
            return Ok(Verdict::too_large(format!("synchronous run longer than {} configurations", opts.max_configs)));
        }
        run.push(upd.clone());
    };
    let cyc = &run[start..];
    let all_acc = cyc.iter().all(|c| c.iter().all(|&q| m.is_accepting(q)));
    let all_rej = cyc.iter().all(|c| c.iter().all(|&q| m.is_rejecting(q)));
    let outcome = match (all_acc, all_rej) {
        (true, false) => Outcome::Accept,
        (false, true) => Outcome::Reject,
        (false, false) => Outcome::Inconsistent,
        (true, true) => unreachable!("a configuration cannot be both accepting and rejecting"),
    };
    let witness = if opts.witness {
        let all: Vec<usize> = (0..n).collect();
        let shows = match outcome {
            Outcome::Accept => "accepting",
            Outcome::Reject => "rejecting",
            _ => "neither",
        };
        let mut cycle: Vec<(Vec<usize>, Configuration)> = run[start + 1..].iter().map(|c| (all.clone(), c.clone())).collect();
        cycle.push((all.clone(), run[start].clone()));
        vec![Lasso {
            start: c0,
            stem: run[1..=start].iter().map(|c| (all.clone(), c.clone())).collect(),
            cycle,
            shows: shows.to_string(),
        }]
    } else {
        Vec::new()
    };
    Ok(Verdict {
        outcome,
        witness,
        stats: Stats {
            configs: run.len(),
            edges: run.len(),
            product_states: 0,
            components: 0,
        },
        note: None,
    })
}

/// Checks the class requirements, then dispatches on selection and
/// fairness. Synchronous selection has a single schedule, so both fairness
/// notions reduce to its one run.
pub fn decide(m: &Machine, g: &LabeledGraph, mc: &ModelClass, opts: &DecideOptions) -> Result<Verdict> {
    let violations = check_model_class(m, mc);
    if !violations.is_empty() {
        return Err(Error::validation(violations.join("; ")));
    }
    let lazy = halting_needs_lazy_check(m, Some(mc));
    match (mc.selection, mc.fairness) {
        (SelectionConstraint::Synchronous, _) => decide_synchronous_inner(m, g, opts, lazy),
        (sc, Fairness::Strong) => decide_strong_inner(m, g, sc, opts, lazy),
        (sc, Fairness::Weak) => decide_weak_inner(m, g, sc, opts, lazy),
    }
}

/// Verdicts of one machine over a corpus.
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub class: ModelClass,
    pub rows: Vec<(usize, Outcome)>,
}

impl ConsistencyReport {
    /// Corpus indices where the machine is not a valid automaton.
    pub fn inconsistent(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|(_, o)| *o == Outcome::Inconsistent)
            .map(|(i, _)| *i)
            .collect()
    }
}

pub fn consistency_report(m: &Machine, mc: &ModelClass, corpus: &[LabeledGraph], opts: &DecideOptions) -> Result<ConsistencyReport> {
    let mut rows = Vec::with_capacity(corpus.len());
    for (i, g) in corpus.iter().enumerate() {
        rows.push((i, decide(m, g, mc, opts)?.outcome));
    }
    Ok(ConsistencyReport { class: *mc, rows })
}

/// Selection realizing the edge `c → d`, preferring node `want` when given.
fn edge_selection(c: &[StateId], d: &[StateId], upd: &[StateId], sc: SelectionConstraint, want: Option<usize>) -> Vec<usize> {
    let n = c.len();
    match sc {
        SelectionConstraint::Synchronous => (0..n).collect(),
        SelectionConstraint::Liberal => (0..n).filter(|&v| d[v] == upd[v]).collect(),
        SelectionConstraint::Exclusive => {
            let changed: Vec<usize> = (0..n).filter(|&v| c[v] != d[v]).collect();
            if let Some(&v) = changed.first() {
                vec![v]
            } else if let Some(w) = want.filter(|&w| upd[w] == c[w]) {
                vec![w]
            } else {
                vec![(0..n).find(|&v| upd[v] == c[v]).expect("self-loop has a stable node")]
            }
        }
    }
}

/// Shortest path of vertices from `from` to `to` inside component `ci`
/// (`from` excluded, `to` included); for `from == to` a shortest cycle.
fn path_within(cg: &ConfigGraph, comp: &[u32], ci: u32, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev: FxHashMap<usize, usize> = FxHashMap::default();
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &t in cg.successors(u) {
            let t = t as usize;
            if comp[t] != ci {
                continue;
            }
            if t == to {
                let mut path = vec![t];
                let mut x = u;
                while x != from {
                    path.push(x);
                    x = prev[&x];
                }
                path.reverse();
                return Some(path);
            }
            if t != from && !prev.contains_key(&t) {
                prev.insert(t, u);
                queue.push_back(t);
            }
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn witnesses(
    m: &Machine,
    g: &LabeledGraph,
    cg: &ConfigGraph,
    comp: &[u32],
    outcome: Outcome,
    bad_acc: Option<u32>,
    bad_rej: Option<u32>,
    cover: Option<u64>,
) -> Result<Vec<Lasso>> {
    let mut targets: Vec<(usize, &str)> = Vec::new();
    match outcome {
        Outcome::Accept => targets.push((bad_rej.unwrap() as usize, "accepting")),
        Outcome::Reject => targets.push((bad_acc.unwrap() as usize, "rejecting")),
        _ => {
            let a = bad_acc.unwrap() as usize;
            let r = bad_rej.unwrap() as usize;
            if a == r {
                targets.push((a, "neither"));
            } else {
                targets.push((a, "non-accepting"));
                targets.push((r, "non-rejecting"));
            }
        }
    }
    targets
        .into_iter()
        .map(|(v, shows)| lasso_through(m, g, cg, comp, v, shows, cover))
        .collect()
}

fn lasso_through(
    m: &Machine,
    g: &LabeledGraph,
    cg: &ConfigGraph,
    comp: &[u32],
    v: usize,
    shows: &str,
    cover: Option<u64>,
) -> Result<Lasso> {
    let sc = cg.selection;
    let upd_of = |i: usize| -> Result<Vec<StateId>> { crate::engine::updates(m, g, cg.config(i)) };
    let mut stem_vertices = vec![v];
    let mut x = v;
    while cg.parent[x] != u32::MAX {
        x = cg.parent[x] as usize;
        stem_vertices.push(x);
    }
    stem_vertices.reverse();
    let mut stem = Vec::new();
    for w in stem_vertices.windows(2) {
        let u = upd_of(w[0])?;
        stem.push((edge_selection(cg.config(w[0]), cg.config(w[1]), &u, sc, None), cg.config(w[1]).to_vec()));
    }
    let ci = comp[v];
    let mut cycle = Vec::new();
    let mut cur = v;
    let step = |from: usize, to: usize, want: Option<usize>, cycle: &mut Vec<(Vec<usize>, Configuration)>| -> Result<()> {
        let u = upd_of(from)?;
        cycle.push((edge_selection(cg.config(from), cg.config(to), &u, sc, want), cg.config(to).to_vec()));
        Ok(())
    };
    if cover.is_some() {
        // Visit, for every node, an internal edge whose selection includes it.
        for node in 0..g.n() {
            if cycle.iter().any(|(s, _): &(Vec<usize>, Configuration)| s.contains(&node)) {
                continue;
            }
            let (a, b) = (0..cg.num_vertices())
                .filter(|&a| comp[a] == ci)
                .find_map(|a| {
                    let ms = cg.edge_masks(a).unwrap();
                    cg.successors(a)
                        .iter()
                        .zip(ms)
                        .find(|(&t, &mk)| comp[t as usize] == ci && mk & (1 << node) != 0)
                        .map(|(&t, _)| (a, t as usize))
                })
                .expect("covering component has an edge for every node");
            if a != cur {
                let p = path_within(cg, comp, ci, cur, a).expect("strongly connected");
                let mut prev = cur;
                for w in p {
                    step(prev, w, None, &mut cycle)?;
                    prev = w;
                }
            }
            step(a, b, Some(node), &mut cycle)?;
            cur = b;
        }
    }
    if cur != v || cycle.is_empty() {
        let p = path_within(cg, comp, ci, cur, v).expect("vertex lies on a cycle");
        let mut prev = cur;
        for w in p {
            step(prev, w, None, &mut cycle)?;
            prev = w;
        }
    }
    Ok(Lasso {
        start: cg.config(0).to_vec(),
        stem,
        cycle,
        shows: shows.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tarjan_small() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3 (self loop)
        let offsets = vec![0, 1, 2, 4, 5];
        let targets = vec![1, 2, 1, 3, 3];
        let (comp, n) = tarjan_scc(&offsets, &targets);
        assert_eq!(n, 3);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[0], comp[1]);
        assert_eq!(comp[3], 0);
    }
}
