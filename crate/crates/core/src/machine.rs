//! Distributed machines: states, threshold-bounded neighbor observation,
//! one-step successor semantics, and the guarded-rule table format.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub type StateId = u32;

/// Total map node index → state.
pub type Configuration = Vec<StateId>;

/// Default cap on `|Q|·(β+1)^|Q|` for exhaustive table operations.
pub const TABLE_CAP: u64 = 1_000_000;

/// Neighbor-state counts saturated at `beta`. Only nonzero counts are
/// stored, sorted by state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundedMultiset {
    beta: u8,
    entries: SmallVec<[(StateId, u8); 6]>,
}

impl BoundedMultiset {
    pub fn empty(beta: u8) -> Self {
        assert!(beta >= 1, "counting bound must be positive");
        BoundedMultiset {
            beta,
            entries: SmallVec::new(),
        }
    }

    /// Builds a multiset from raw occurrences, saturating each count.
    pub fn from_states(beta: u8, states: impl IntoIterator<Item = StateId>) -> Self {
        let mut m = Self::empty(beta);
        for s in states {
            m.add(s, 1);
        }
        m
    }

    /// Dense counts indexed by state; counts above `beta` are saturated.
    pub fn from_counts(beta: u8, counts: &[u8]) -> Self {
        let mut m = Self::empty(beta);
        for (s, &k) in counts.iter().enumerate() {
            if k > 0 {
                m.entries.push((s as StateId, k.min(beta)));
            }
        }
        m
    }

    /// Adds `k` occurrences of `s`, saturating at `beta`.
    pub fn add(&mut self, s: StateId, k: u8) {
        if k == 0 {
            return;
        }
        match self.entries.binary_search_by_key(&s, |e| e.0) {
            Ok(i) => self.entries[i].1 = self.entries[i].1.saturating_add(k).min(self.beta),
            Err(i) => self.entries.insert(i, (s, k.min(self.beta))),
        }
    }

    pub fn beta(&self) -> u8 {
        self.beta
    }

    pub fn count(&self, s: StateId) -> u8 {
        match self.entries.binary_search_by_key(&s, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.count(s) > 0
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(state, count)` pairs with positive count, sorted by state.
    pub fn iter(&self) -> impl Iterator<Item = (StateId, u8)> + '_ {
        self.entries.iter().copied()
    }

    /// Distinct states present.
    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Sum of the saturated counts over states satisfying `pred`, itself
    /// saturated at `cap`.
    pub fn count_where(&self, cap: u8, pred: impl Fn(StateId) -> bool) -> u8 {
        let mut total: u32 = 0;
        for (s, k) in self.iter() {
            if pred(s) {
                total += k as u32;
            }
        }
        total.min(cap as u32) as u8
    }

    pub fn any(&self, pred: impl Fn(StateId) -> bool) -> bool {
        self.support().any(pred)
    }

    pub fn all(&self, pred: impl Fn(StateId) -> bool) -> bool {
        self.support().all(pred)
    }

    /// Image under `f` with counts re-saturated at `beta`. States mapped to
    /// `None` are dropped. Exact as long as `beta` is at most the bound
    /// this multiset was built with.
    pub fn project(&self, beta: u8, f: impl Fn(StateId) -> Option<StateId>) -> BoundedMultiset {
        let mut m = BoundedMultiset::empty(beta);
        for (s, k) in self.iter() {
            if let Some(t) = f(s) {
                m.add(t, k);
            }
        }
        m
    }
}

/// Transition evaluator. Must be re-entrant.
pub trait Transition: Send + Sync {
    fn apply(&self, q: StateId, p: &BoundedMultiset) -> std::result::Result<StateId, String>;
}

impl<F> Transition for F
where
    F: Fn(StateId, &BoundedMultiset) -> std::result::Result<StateId, String> + Send + Sync,
{
    fn apply(&self, q: StateId, p: &BoundedMultiset) -> std::result::Result<StateId, String> {
        self(q, p)
    }
}

#[derive(Clone)]
pub struct Machine {
    name: String,
    states: Arc<Vec<String>>,
    alphabet: Vec<String>,
    beta: u8,
    init: Vec<StateId>,
    accepting: Arc<Vec<bool>>,
    rejecting: Arc<Vec<bool>>,
    delta: Arc<dyn Transition>,
    source: Option<serde_json::Value>,
}

impl fmt::Debug for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Machine")
            .field("name", &self.name)
            .field("states", &self.states.len())
            .field("alphabet", &self.alphabet)
            .field("beta", &self.beta)
            .finish()
    }
}

/// Everything needed to assemble a [`Machine`].
pub struct MachineParts {
    pub name: String,
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub beta: u8,
    /// Initial state per alphabet symbol, in alphabet order.
    pub init: Vec<StateId>,
    pub accepting: Vec<StateId>,
    pub rejecting: Vec<StateId>,
    pub delta: Arc<dyn Transition>,
}

impl Machine {
    pub fn new(parts: MachineParts) -> Result<Self> {
        let nq = parts.states.len();
        if nq == 0 {
            return Err(Error::validation("machine has no states"));
        }
        if nq > u32::MAX as usize / 2 {
            return Err(Error::too_large("state space"));
        }
        if parts.beta == 0 {
            return Err(Error::validation("counting bound must be at least 1"));
        }
        if parts.alphabet.is_empty() || parts.init.len() != parts.alphabet.len() {
            return Err(Error::validation("initialization must cover the alphabet"));
        }
        if parts.init.iter().any(|&q| q as usize >= nq) {
            return Err(Error::validation("initial state out of range"));
        }
        let mut acc = vec![false; nq];
        let mut rej = vec![false; nq];
        for &q in &parts.accepting {
            *acc.get_mut(q as usize).ok_or_else(|| Error::validation("accepting state out of range"))? = true;
        }
        for &q in &parts.rejecting {
            *rej.get_mut(q as usize).ok_or_else(|| Error::validation("rejecting state out of range"))? = true;
        }
        if let Some(q) = (0..nq).find(|&q| acc[q] && rej[q]) {
            return Err(Error::validation(format!(
                "state {:?} is both accepting and rejecting",
                parts.states[q]
            )));
        }
        Ok(Machine {
            name: parts.name,
            states: Arc::new(parts.states),
            alphabet: parts.alphabet,
            beta: parts.beta,
            init: parts.init,
            accepting: Arc::new(acc),
            rejecting: Arc::new(rej),
            delta: parts.delta,
            source: None,
        })
    }

    /// Attaches the JSON document that reproduces this machine.
    pub fn with_source(mut self, source: serde_json::Value) -> Self {
        self.source = Some(source);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> Option<&serde_json::Value> {
        self.source.as_ref()
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

    pub fn beta(&self) -> u8 {
        self.beta
    }

    /// Initial state for the alphabet symbol at index `a`.
    pub fn init_state(&self, a: usize) -> StateId {
        self.init[a]
    }

    pub fn init_of(&self, label: &str) -> Option<StateId> {
        self.alphabet.iter().position(|a| a == label).map(|i| self.init[i])
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn is_rejecting(&self, q: StateId) -> bool {
        self.rejecting[q as usize]
    }

    pub fn accepting_states(&self) -> Vec<StateId> {
        (0..self.num_states() as StateId).filter(|&q| self.is_accepting(q)).collect()
    }

    pub fn rejecting_states(&self) -> Vec<StateId> {
        (0..self.num_states() as StateId).filter(|&q| self.is_rejecting(q)).collect()
    }

    pub fn delta(&self, q: StateId, p: &BoundedMultiset) -> Result<StateId> {
        match self.delta.apply(q, p) {
            Ok(r) if (r as usize) < self.num_states() => Ok(r),
            Ok(r) => Err(self.eval_error(q, p, format!("result {r} out of range"))),
            Err(msg) => Err(self.eval_error(q, p, msg)),
        }
    }

    fn eval_error(&self, q: StateId, p: &BoundedMultiset, message: String) -> Error {
        Error::Eval {
            state: self.states.get(q as usize).cloned().unwrap_or_else(|| q.to_string()),
            multiset: self.format_multiset(p),
            message,
        }
    }

    pub fn format_multiset(&self, p: &BoundedMultiset) -> String {
        let parts: Vec<String> = p
            .iter()
            .map(|(s, k)| {
                let name = self.states.get(s as usize).cloned().unwrap_or_else(|| s.to_string());
                format!("{name}:{k}")
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn transition(&self) -> Arc<dyn Transition> {
        self.delta.clone()
    }

    /// Observation of node `v`: its neighbors' states saturated at β.
    pub fn observe(&self, c: &[StateId], v: usize, g: &LabeledGraph) -> BoundedMultiset {
        BoundedMultiset::from_states(self.beta, g.neighbors(v).iter().map(|&w| c[w]))
    }

    /// `δ(c(v), N_v^c)`.
    pub fn update(&self, c: &[StateId], v: usize, g: &LabeledGraph) -> Result<StateId> {
        self.delta(c[v], &self.observe(c, v, g))
    }

    /// `|Q|·(β+1)^|Q|`, saturating.
    pub fn table_size(&self) -> u64 {
        let per = (self.beta as u64 + 1).checked_pow(self.num_states() as u32).unwrap_or(u64::MAX);
        per.saturating_mul(self.num_states() as u64)
    }
}

/// `min(β, #neighbors of v in q)` for every state q.
pub fn bounded_multiset(c: &[StateId], v: usize, g: &LabeledGraph, beta: u8) -> Result<BoundedMultiset> {
    if v >= g.n() {
        return Err(Error::domain(format!("node index {v} not in graph")));
    }
    Ok(BoundedMultiset::from_states(beta, g.neighbors(v).iter().map(|&w| c[w])))
}

/// Selected nodes apply δ against the old configuration; others keep
/// their state.
pub fn successor(c: &[StateId], sel: &[usize], m: &Machine, g: &LabeledGraph) -> Result<Configuration> {
    let mut next = c.to_vec();
    for &v in sel {
        if v >= g.n() {
            return Err(Error::domain(format!("selected node {v} not in graph")));
        }
        next[v] = m.update(c, v, g)?;
    }
    Ok(next)
}

pub fn initial_configuration(m: &Machine, g: &LabeledGraph) -> Result<Configuration> {
    (0..g.n())
        .map(|v| {
            m.init_of(g.label(v)).ok_or_else(|| {
                Error::domain(format!("label {:?} of node {} not in machine alphabet", g.label(v), g.id(v)))
            })
        })
        .collect()
}

pub fn is_accepting_config(c: &[StateId], m: &Machine) -> bool {
    c.iter().all(|&q| m.is_accepting(q))
}

pub fn is_rejecting_config(c: &[StateId], m: &Machine) -> bool {
    c.iter().all(|&q| m.is_rejecting(q))
}

/// Calls `f` on every β-bounded multiset over `nq` states.
pub fn for_each_multiset(
    nq: usize,
    beta: u8,
    mut f: impl FnMut(&BoundedMultiset) -> Result<()>,
) -> Result<()> {
    let mut counts = vec![0u8; nq];
    loop {
        f(&BoundedMultiset::from_counts(beta, &counts))?;
        let mut i = 0;
        loop {
            if i == nq {
                return Ok(());
            }
            if counts[i] < beta {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// True iff no accepting or rejecting state can ever be left.
pub fn is_halting(m: &Machine) -> Result<bool> {
    is_halting_capped(m, TABLE_CAP)
}

pub fn is_halting_capped(m: &Machine, cap: u64) -> Result<bool> {
    if m.table_size() > cap {
        return Err(Error::too_large(format!(
            "halting check needs {} evaluations (cap {cap})",
            m.table_size()
        )));
    }
    let decided: Vec<StateId> = (0..m.num_states() as StateId)
        .filter(|&q| m.is_accepting(q) || m.is_rejecting(q))
        .collect();
    let mut halting = true;
    for_each_multiset(m.num_states(), m.beta(), |p| {
        for &q in &decided {
            if m.delta(q, p)? != q {
                halting = false;
            }
        }
        Ok(())
    })?;
    Ok(halting)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guard {
    pub state: String,
    pub op: GuardOp,
    pub n: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub from: String,
    #[serde(default)]
    pub guards: Vec<Guard>,
    pub to: String,
}

/// Serializable machine: header plus ordered guarded rules. The first rule
/// whose source state and guards match fires; otherwise the node stays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub beta: u8,
    pub init: BTreeMap<String, String>,
    #[serde(default)]
    pub accepting: Vec<String>,
    #[serde(default)]
    pub rejecting: Vec<String>,
    #[serde(default)]
    pub rules: Vec<Rule>,
}

struct CompiledRules {
    by_state: Vec<Vec<(Vec<(StateId, GuardOp, u8)>, StateId)>>,
}

impl Transition for CompiledRules {
    fn apply(&self, q: StateId, p: &BoundedMultiset) -> std::result::Result<StateId, String> {
        let rules = self
            .by_state
            .get(q as usize)
            .ok_or_else(|| format!("state {q} out of range"))?;
        for (guards, to) in rules {
            let ok = guards.iter().all(|&(s, op, n)| {
                let k = p.count(s);
                match op {
                    GuardOp::Eq => k == n,
                    GuardOp::Ge => k >= n,
                    GuardOp::Le => k <= n,
                }
            });
            if ok {
                return Ok(*to);
            }
        }
        Ok(q)
    }
}

pub fn compile_rule_table(rt: &RuleTable) -> Result<Machine> {
    let index: HashMap<&str, StateId> = rt
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i as StateId))
        .collect();
    if index.len() != rt.states.len() {
        return Err(Error::validation("duplicate state name"));
    }
    let lookup = |s: &str, what: &str| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| Error::validation(format!("{what} refers to unknown state {s:?}")))
    };
    if rt.beta == 0 {
        return Err(Error::validation("counting bound must be at least 1"));
    }
    let mut init = Vec::with_capacity(rt.alphabet.len());
    for a in &rt.alphabet {
        let s = rt
            .init
            .get(a)
            .ok_or_else(|| Error::validation(format!("no initial state for label {a:?}")))?;
        init.push(lookup(s, "init")?);
    }
    if let Some(extra) = rt.init.keys().find(|k| !rt.alphabet.contains(k)) {
        return Err(Error::validation(format!("init names label {extra:?} outside the alphabet")));
    }
    let accepting = rt.accepting.iter().map(|s| lookup(s, "accepting")).collect::<Result<Vec<_>>>()?;
    let rejecting = rt.rejecting.iter().map(|s| lookup(s, "rejecting")).collect::<Result<Vec<_>>>()?;
    let mut by_state = vec![Vec::new(); rt.states.len()];
    for (i, rule) in rt.rules.iter().enumerate() {
        let from = lookup(&rule.from, &format!("rule {i}"))?;
        let to = lookup(&rule.to, &format!("rule {i}"))?;
        let mut guards = Vec::with_capacity(rule.guards.len());
        for g in &rule.guards {
            if g.n > rt.beta {
                return Err(Error::validation(format!(
                    "rule {i}: threshold {} exceeds counting bound {}",
                    g.n, rt.beta
                )));
            }
            guards.push((lookup(&g.state, &format!("rule {i}"))?, g.op, g.n));
        }
        by_state[from as usize].push((guards, to));
    }
    let m = Machine::new(MachineParts {
        name: rt.name.clone().unwrap_or_else(|| "rules".to_string()),
        states: rt.states.clone(),
        alphabet: rt.alphabet.clone(),
        beta: rt.beta,
        init,
        accepting,
        rejecting,
        delta: Arc::new(CompiledRules { by_state }),
    })?;
    let doc = serde_json::to_value(rt).expect("rule table serializes");
    Ok(m.with_source(doc))
}

pub fn parse_rule_table(text: &str) -> Result<RuleTable> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

/// One explicit transition: dense neighbor counts over all states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub from: StateId,
    pub counts: Vec<u8>,
    pub to: StateId,
}

/// Full `(q, P) → q'` map of a machine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub states: Vec<String>,
    pub beta: u8,
    pub entries: Vec<TableEntry>,
}

pub fn export_table(m: &Machine) -> Result<TransitionTable> {
    export_table_capped(m, TABLE_CAP)
}

pub fn export_table_capped(m: &Machine, cap: u64) -> Result<TransitionTable> {
    if m.table_size() > cap {
        return Err(Error::too_large(format!("table has {} entries (cap {cap})", m.table_size())));
    }
    let nq = m.num_states();
    let mut entries = Vec::with_capacity(m.table_size() as usize);
    for_each_multiset(nq, m.beta(), |p| {
        let mut counts = vec![0u8; nq];
        for (s, k) in p.iter() {
            counts[s as usize] = k;
        }
        for q in 0..nq as StateId {
            entries.push(TableEntry {
                from: q,
                counts: counts.clone(),
                to: m.delta(q, p)?,
            });
        }
        Ok(())
    })?;
    entries.sort_by(|a, b| (a.from, &a.counts).cmp(&(b.from, &b.counts)));
    Ok(TransitionTable {
        states: m.states().to_vec(),
        beta: m.beta(),
        entries,
    })
}

/// Rule-table form of an explicit table: one exact-match rule per entry
/// that changes state.
pub fn table_to_rules(m: &Machine, table: &TransitionTable) -> RuleTable {
    let name = |q: StateId| table.states[q as usize].clone();
    let rules = table
        .entries
        .iter()
        .filter(|e| e.to != e.from)
        .map(|e| Rule {
            from: name(e.from),
            guards: e
                .counts
                .iter()
                .enumerate()
                .map(|(s, &n)| Guard {
                    state: name(s as StateId),
                    op: GuardOp::Eq,
                    n,
                })
                .collect(),
            to: name(e.to),
        })
        .collect();
    RuleTable {
        name: Some(m.name().to_string()),
        states: table.states.clone(),
        alphabet: m.alphabet().to_vec(),
        beta: m.beta(),
        init: m
            .alphabet()
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), name(m.init_state(i))))
            .collect(),
        accepting: m.accepting_states().into_iter().map(name).collect(),
        rejecting: m.rejecting_states().into_iter().map(name).collect(),
        rules,
    }
}

/// Dense explicit transition table indexed by `(q, P)` in mixed radix.
pub struct DenseTable {
    nq: usize,
    beta: u8,
    targets: Vec<StateId>,
}

impl DenseTable {
    pub fn new(nq: usize, beta: u8, targets: Vec<StateId>) -> Self {
        let per = (beta as usize + 1).pow(nq as u32);
        assert_eq!(targets.len(), nq * per, "dense table must be total");
        DenseTable { nq, beta, targets }
    }

    pub fn index(nq: usize, beta: u8, q: StateId, p: &BoundedMultiset) -> usize {
        let radix = beta as usize + 1;
        let mut idx = 0usize;
        let mut mul = 1usize;
        let mut entries = p.iter().peekable();
        for s in 0..nq as StateId {
            let k = match entries.peek() {
                Some(&(t, k)) if t == s => {
                    entries.next();
                    k
                }
                _ => 0,
            };
            idx += k as usize * mul;
            mul *= radix;
        }
        q as usize * mul + idx
    }
}

impl Transition for DenseTable {
    fn apply(&self, q: StateId, p: &BoundedMultiset) -> std::result::Result<StateId, String> {
        if q as usize >= self.nq {
            return Err(format!("state {q} out of range"));
        }
        if p.beta() != self.beta {
            return Err("counting bound mismatch".to_string());
        }
        if p.support().any(|s| s as usize >= self.nq) {
            return Err("neighbor state out of range".to_string());
        }
        Ok(self.targets[Self::index(self.nq, self.beta, q, p)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_star, LabeledGraph};

    fn black_white() -> Machine {
        let rt = RuleTable {
            name: Some("bw".into()),
            states: vec!["black".into(), "white".into()],
            alphabet: vec!["black".into(), "white".into()],
            beta: 1,
            init: [("black", "black"), ("white", "white")]
                .into_iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            accepting: vec!["black".into()],
            rejecting: vec!["white".into()],
            rules: vec![Rule {
                from: "white".into(),
                guards: vec![Guard {
                    state: "black".into(),
                    op: GuardOp::Ge,
                    n: 1,
                }],
                to: "black".into(),
            }],
        };
        compile_rule_table(&rt).unwrap()
    }

    #[test]
    fn multiset_saturates() {
        let star = generate_star(4).unwrap();
        let c = vec![1, 0, 0, 0, 0];
        let p = bounded_multiset(&c, 0, &star, 2).unwrap();
        assert_eq!(p.iter().collect::<Vec<_>>(), vec![(0, 2)]);
        let p1 = bounded_multiset(&c, 0, &star, 1).unwrap();
        assert_eq!(p1.iter().collect::<Vec<_>>(), vec![(0, 1)]);
        let mixed = vec![9, 1, 2, 2, 2];
        let mut leaf_view = bounded_multiset(&mixed, 1, &star, 2).unwrap();
        assert_eq!(leaf_view.count(9), 1);
        leaf_view.add(3, 1);
        assert_eq!(leaf_view.iter().collect::<Vec<_>>(), vec![(3, 1), (9, 1)]);
        assert!(bounded_multiset(&c, 7, &star, 1).is_err());
    }

    #[test]
    fn successor_examples() {
        let m = black_white();
        let g = LabeledGraph::with_labels(&["black", "white"], &[(0, 1)]);
        let c = initial_configuration(&m, &g).unwrap();
        assert_eq!(c, vec![0, 1]);
        assert_eq!(successor(&c, &[], &m, &g).unwrap(), c);
        assert_eq!(successor(&c, &[1], &m, &g).unwrap(), vec![0, 0]);
        let white = LabeledGraph::with_labels(&["white", "white"], &[(0, 1)]);
        let cw = initial_configuration(&m, &white).unwrap();
        assert_eq!(successor(&cw, &[0, 1], &m, &white).unwrap(), cw);
        let other = LabeledGraph::with_labels(&["red", "white"], &[(0, 1)]);
        assert!(matches!(initial_configuration(&m, &other), Err(Error::Domain(_))));
    }

    #[test]
    fn accepting_predicates() {
        let m = black_white();
        assert!(is_accepting_config(&[0, 0], &m));
        assert!(!is_accepting_config(&[0, 1], &m));
        assert!(!is_rejecting_config(&[0, 1], &m));
        assert!(is_rejecting_config(&[1, 1], &m));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let mut rt = serde_json::from_value::<RuleTable>(serde_json::json!({
            "states": ["a"], "alphabet": ["x"], "beta": 1, "init": {"x": "a"},
            "accepting": ["a"], "rejecting": ["a"], "rules": []
        }))
        .unwrap();
        assert!(matches!(compile_rule_table(&rt), Err(Error::Validation(_))));
        rt.rejecting.clear();
        assert!(compile_rule_table(&rt).is_ok());
    }

    #[test]
    fn export_counts_and_round_trip() {
        let m = black_white();
        let t = export_table(&m).unwrap();
        assert_eq!(t.entries.len(), 8);
        let back = compile_rule_table(&table_to_rules(&m, &t)).unwrap();
        assert_eq!(export_table(&back).unwrap(), t);
        assert!(!is_halting(&m).unwrap());
    }

    #[test]
    fn threshold_above_bound_rejected() {
        let rt: RuleTable = serde_json::from_value(serde_json::json!({
            "states": ["a", "b"], "alphabet": ["x"], "beta": 1, "init": {"x": "a"},
            "rules": [{"from": "a", "guards": [{"state": "b", "op": ">=", "n": 2}], "to": "b"}]
        }))
        .unwrap();
        assert!(matches!(compile_rule_table(&rt), Err(Error::Validation(_))));
        let dangling: RuleTable = serde_json::from_value(serde_json::json!({
            "states": ["a"], "alphabet": ["x"], "beta": 1, "init": {"x": "a"},
            "rules": [{"from": "a", "to": "zz"}]
        }))
        .unwrap();
        assert!(matches!(compile_rule_table(&dangling), Err(Error::Validation(_))));
    }

    #[test]
    fn dense_index_matches_enumeration() {
        let mut seen = Vec::new();
        for_each_multiset(3, 2, |p| {
            seen.push(DenseTable::index(3, 2, 0, p));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, (0..27).collect::<Vec<_>>());
    }

    #[test]
    fn table_cap_enforced() {
        let m = black_white();
        assert!(matches!(export_table_capped(&m, 4), Err(Error::TooLarge(_))));
        assert!(matches!(is_halting_capped(&m, 4), Err(Error::TooLarge(_))));
    }
}
