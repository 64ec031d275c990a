//! Selection constraints, model classes, and bounded simulation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::machine::{initial_configuration, is_accepting_config, is_halting, is_rejecting_config, Configuration, Machine, StateId};

/// Largest graph for which liberal selections are enumerated explicitly.
pub const LIBERAL_ENUM_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    Set,
    Multiset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceptance {
    Halting,
    Stabilizing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionConstraint {
    Liberal,
    Exclusive,
    Synchronous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fairness {
    Weak,
    Strong,
}

/// One of the scheduling/acceptance models, written
/// `detection.acceptance.selection.fairness`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelClass {
    pub detection: Detection,
    pub acceptance: Acceptance,
    pub selection: SelectionConstraint,
    pub fairness: Fairness,
}

pub const CLASS_GRAMMAR: &str =
    "{set|multiset}.{halting|stabilizing}.{liberal|exclusive|synchronous}.{weak|strong}";

impl ModelClass {
    pub fn new(d: Detection, a: Acceptance, s: SelectionConstraint, f: Fairness) -> Self {
        ModelClass {
            detection: d,
            acceptance: a,
            selection: s,
            fairness: f,
        }
    }

    /// All 24 quadruples, in grammar order.
    pub fn all() -> Vec<ModelClass> {
        let mut out = Vec::new();
        for d in [Detection::Set, Detection::Multiset] {
            for a in [Acceptance::Halting, Acceptance::Stabilizing] {
                for s in [SelectionConstraint::Liberal, SelectionConstraint::Exclusive, SelectionConstraint::Synchronous] {
                    for f in [Fairness::Weak, Fairness::Strong] {
                        out.push(ModelClass::new(d, a, s, f));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}.{}", self.detection, self.acceptance, self.selection, self.fairness)
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detection::Set => "set",
            Detection::Multiset => "multiset",
        })
    }
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Acceptance::Halting => "halting",
            Acceptance::Stabilizing => "stabilizing",
        })
    }
}

impl fmt::Display for Fairness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fairness::Weak => "weak",
            Fairness::Strong => "strong",
        })
    }
}

impl fmt::Display for SelectionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionConstraint::Liberal => "liberal",
            SelectionConstraint::Exclusive => "exclusive",
            SelectionConstraint::Synchronous => "synchronous",
        })
    }
}

impl FromStr for ModelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("class", format!("unknown class {s:?}; expected {CLASS_GRAMMAR}"));
        let parts: Vec<&str> = s.split('.').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let d = match parts[0] {
            "set" => Detection::Set,
            "multiset" => Detection::Multiset,
            _ => return Err(bad()),
        };
        let a = match parts[1] {
            "halting" => Acceptance::Halting,
            "stabilizing" => Acceptance::Stabilizing,
            _ => return Err(bad()),
        };
        let sel = match parts[2] {
            "liberal" => SelectionConstraint::Liberal,
            "exclusive" => SelectionConstraint::Exclusive,
            "synchronous" => SelectionConstraint::Synchronous,
            _ => return Err(bad()),
        };
        let f = match parts[3] {
            "weak" => Fairness::Weak,
            "strong" => Fairness::Strong,
            _ => return Err(bad()),
        };
        Ok(ModelClass::new(d, a, sel, f))
    }
}

/// The selections a constraint permits on a graph with `n` nodes.
/// Selections are sorted lists of node indices.
#[derive(Clone, Copy, Debug)]
pub struct Permitted {
    pub kind: SelectionConstraint,
    pub n: usize,
}

pub fn permitted(sc: SelectionConstraint, g: &LabeledGraph) -> Permitted {
    Permitted { kind: sc, n: g.n() }
}

impl Permitted {
    pub fn contains(&self, sel: &[usize]) -> bool {
        let in_range = sel.iter().all(|&v| v < self.n) && sel.windows(2).all(|w| w[0] < w[1]);
        in_range
            && match self.kind {
                SelectionConstraint::Liberal => true,
                SelectionConstraint::Exclusive => sel.len() == 1,
                SelectionConstraint::Synchronous => sel.len() == self.n,
            }
    }

    /// Uniform singleton, all nodes, or each node independently with
    /// probability `p` (liberal).
    pub fn sample_with(&self, rng: &mut impl Rng, p: f64) -> Vec<usize> {
        match self.kind {
            SelectionConstraint::Exclusive => vec![rng.gen_range(0..self.n)],
            SelectionConstraint::Synchronous => (0..self.n).collect(),
            SelectionConstraint::Liberal => (0..self.n).filter(|_| rng.gen_bool(p)).collect(),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<usize> {
        self.sample_with(rng, 0.5)
    }

    pub fn enumerate(&self) -> Result<Box<dyn Iterator<Item = Vec<usize>>>> {
        let n = self.n;
        Ok(match self.kind {
            SelectionConstraint::Exclusive => Box::new((0..n).map(|v| vec![v])),
            SelectionConstraint::Synchronous => Box::new(std::iter::once((0..n).collect())),
            SelectionConstraint::Liberal => {
                if n > LIBERAL_ENUM_CAP {
                    return Err(Error::too_large(format!(
                        "liberal enumeration above {LIBERAL_ENUM_CAP} nodes"
                    )));
                }
                Box::new((0u64..1 << n).map(move |mask| (0..n).filter(|&v| mask & (1 << v) != 0).collect()))
            }
        })
    }
}

/// Per-step classification of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Accepting,
    Rejecting,
    Neither,
}

pub fn status(c: &[StateId], m: &Machine) -> Status {
    if is_accepting_config(c, m) {
        Status::Accepting
    } else if is_rejecting_config(c, m) {
        Status::Rejecting
    } else {
        Status::Neither
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Terminal {
    BudgetExhausted,
    CycleDetected { period: usize },
    Fixpoint,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::BudgetExhausted => f.write_str("budget-exhausted"),
            Terminal::CycleDetected { period } => write!(f, "cycle-detected(period={period})"),
            Terminal::Fixpoint => f.write_str("fixpoint"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub configurations: Vec<Configuration>,
    pub selections: Vec<Vec<usize>>,
    pub statuses: Vec<Status>,
    pub terminal: Terminal,
}

impl RunTrace {
    pub fn steps(&self) -> usize {
        self.selections.len()
    }

    pub fn last(&self) -> &Configuration {
        self.configurations.last().expect("trace has an initial configuration")
    }
}

/// How a simulation picks selections.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Synchronous,
    ExclusiveUniform,
    LiberalBernoulli(f64),
    Schedule(Vec<Vec<usize>>),
}

impl Policy {
    /// The default random policy for a selection constraint.
    pub fn for_selection(sc: SelectionConstraint) -> Policy {
        match sc {
            SelectionConstraint::Liberal => Policy::LiberalBernoulli(0.5),
            SelectionConstraint::Exclusive => Policy::ExclusiveUniform,
            SelectionConstraint::Synchronous => Policy::Synchronous,
        }
    }

    pub fn selection(&self) -> SelectionConstraint {
        match self {
            Policy::Synchronous => SelectionConstraint::Synchronous,
            Policy::ExclusiveUniform => SelectionConstraint::Exclusive,
            Policy::LiberalBernoulli(_) | Policy::Schedule(_) => SelectionConstraint::Liberal,
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// Parses `sync`, `exclusive-uniform` and `liberal-bernoulli:p`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sync" | "synchronous" => Ok(Policy::Synchronous),
            "exclusive-uniform" => Ok(Policy::ExclusiveUniform),
            "liberal-bernoulli" => Ok(Policy::LiberalBernoulli(0.5)),
            _ => {
                if let Some(p) = s.strip_prefix("liberal-bernoulli:") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::parse("policy", format!("bad probability {p:?}")))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::parse("policy", "probability must lie in [0,1]"));
                    }
                    Ok(Policy::LiberalBernoulli(p))
                } else {
                    Err(Error::parse("policy", format!("unknown policy {s:?}")))
                }
            }
        }
    }
}

/// Node updates `δ(c(v), N_v^c)` for every node.
pub fn updates(m: &Machine, g: &LabeledGraph, c: &[StateId]) -> Result<Vec<StateId>> {
    (0..g.n()).map(|v| m.update(c, v, g)).collect()
}

fn apply_selection(c: &[StateId], upd: &[StateId], sel: &[usize]) -> Configuration {
    let mut next = c.to_vec();
    for &v in sel {
        next[v] = upd[v];
    }
    next
}

/// Runs at most `budget` steps from the initial configuration.
///
/// The synchronous policy stops at the first repeated configuration.
/// Every policy stops early at a configuration no selection can change.
pub fn simulate(m: &Machine, g: &LabeledGraph, policy: &Policy, budget: usize, seed: u64) -> Result<RunTrace> {
    let c0 = initial_configuration(m, g)?;
    simulate_from(m, g, c0, policy, budget, seed)
}

pub fn simulate_from(
    m: &Machine,
    g: &LabeledGraph,
    c0: Configuration,
    policy: &Policy,
    budget: usize,
    seed: u64,
) -> Result<RunTrace> {
    if budget == 0 {
        return Err(Error::domain("step budget must be positive"));
    }
    let n = g.n();
    if let Policy::Schedule(s) = policy {
        let p = Permitted {
            kind: SelectionConstraint::Liberal,
            n,
        };
        if let Some(bad) = s.iter().find(|sel| !p.contains(sel)) {
            return Err(Error::domain(format!("schedule entry {bad:?} is not a valid selection")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = RunTrace {
        statuses: vec![status(&c0, m)],
        configurations: vec![c0],
        selections: Vec::new(),
        terminal: Terminal::BudgetExhausted,
    };
    let mut seen: HashMap<Configuration, usize> = HashMap::new();
    let sync = matches!(policy, Policy::Synchronous);
    if sync {
        seen.insert(trace.configurations[0].clone(), 0);
    }
    for step in 0..budget {
        let c = trace.last().clone();
        let upd = updates(m, g, &c)?;
        if !sync && upd == c {
            trace.terminal = Terminal::Fixpoint;
            return Ok(trace);
        }
        let sel: Vec<usize> = match policy {
            Policy::Synchronous => (0..n).collect(),
            Policy::ExclusiveUniform => vec![rng.gen_range(0..n)],
            Policy::LiberalBernoulli(p) => (0..n).filter(|_| rng.gen_bool(*p)).collect(),
            Policy::Schedule(s) => match s.get(step) {
                Some(sel) => sel.clone(),
                None => return Ok(trace),
            },
        };
        let next = apply_selection(&c, &upd, &sel);
        trace.statuses.push(status(&next, m));
        trace.selections.push(sel);
        trace.configurations.push(next.clone());
        if sync {
            if let Some(&first) = seen.get(&next) {
                let period = trace.configurations.len() - 1 - first;
                trace.terminal = if period == 1 {
                    Terminal::Fixpoint
                } else {
                    Terminal::CycleDetected { period }
                };
                return Ok(trace);
            }
            seen.insert(next, trace.configurations.len() - 1);
        }
    }
    Ok(trace)
}

/// Re-checks every step of a trace against the successor semantics.
pub fn replay_check(trace: &RunTrace, m: &Machine, g: &LabeledGraph) -> Result<bool> {
    if trace.configurations.len() != trace.selections.len() + 1 {
        return Ok(false);
    }
    for (i, sel) in trace.selections.iter().enumerate() {
        let next = crate::machine::successor(&trace.configurations[i], sel, m, g)?;
        if next != trace.configurations[i + 1] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Steps at which some node left an accepting or rejecting state.
pub fn halting_violations(trace: &RunTrace, m: &Machine) -> Vec<usize> {
    let decided = |q: StateId| m.is_accepting(q) || m.is_rejecting(q);
    trace
        .configurations
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].iter().zip(&w[1]).any(|(&a, &b)| decided(a) && a != b))
        .map(|(i, _)| i + 1)
        .collect()
}

/// Violated class requirements. A halting check too large to enumerate is
/// not reported; deciders re-check it lazily during exploration.
pub fn check_model_class(m: &Machine, mc: &ModelClass) -> Vec<String> {
    let mut out = Vec::new();
    if mc.detection == Detection::Set && m.beta() != 1 {
        out.push("counting bound exceeds 1".to_string());
    }
    if mc.acceptance == Acceptance::Halting {
        if let Ok(false) = is_halting(m) {
            out.push("machine is not halting: an accepting or rejecting state can be left".to_string());
        }
    }
    out
}

/// For each node, the number of trailing steps in which it was not selected.
pub fn weakly_fair_prefix_deficit(trace: &RunTrace, g: &LabeledGraph) -> Vec<usize> {
    let k = trace.selections.len();
    let mut deficit = vec![k; g.n()];
    for (i, sel) in trace.selections.iter().enumerate() {
        for &v in sel {
            deficit[v] = k - 1 - i;
        }
    }
    deficit
}

pub fn config_to_json(c: &[StateId], m: &Machine, g: &LabeledGraph) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for v in 0..g.n() {
        map.insert(g.id(v).to_string(), json!(m.state_name(c[v])));
    }
    serde_json::Value::Object(map)
}

pub fn trace_to_json(trace: &RunTrace, m: &Machine, g: &LabeledGraph) -> serde_json::Value {
    let steps: Vec<_> = trace
        .configurations
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let sel = if i == 0 {
                serde_json::Value::Null
            } else {
                json!(trace.selections[i - 1].iter().map(|&v| g.id(v)).collect::<Vec<_>>())
            };
            json!({
                "step": i,
                "selection": sel,
                "configuration": config_to_json(c, m, g),
                "status": trace.statuses[i],
            })
        })
        .collect();
    json!({
        "machine": m.name(),
        "nodes": g.ids(),
        "steps": steps,
        "terminal": trace.terminal,
        "terminal_note": trace.terminal.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, path};

    #[test]
    fn class_names_round_trip() {
        for mc in ModelClass::all() {
            assert_eq!(mc.to_string().parse::<ModelClass>().unwrap(), mc);
        }
        assert_eq!(ModelClass::all().len(), 24);
        assert!("set.halting.liberal".parse::<ModelClass>().is_err());
        assert!("set.halting.lazy.weak".parse::<ModelClass>().is_err());
    }

    #[test]
    fn permitted_counts() {
        let g3 = path(3).unwrap();
        let ex = permitted(SelectionConstraint::Exclusive, &g3);
        assert_eq!(ex.enumerate().unwrap().count(), 3);
        let sy: Vec<_> = permitted(SelectionConstraint::Synchronous, &g3).enumerate().unwrap().collect();
        assert_eq!(sy, vec![vec![0, 1, 2]]);
        let lib: Vec<_> = permitted(SelectionConstraint::Liberal, &g3).enumerate().unwrap().collect();
        assert_eq!(lib.len(), 8);
        assert!(lib.contains(&vec![]));
        assert!(ex.contains(&[1]) && !ex.contains(&[0, 1]));
        let big = path(21).unwrap();
        assert!(permitted(SelectionConstraint::Liberal, &big).enumerate().is_err());
    }

    #[test]
    fn sampling_respects_constraint() {
        let g = cycle(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [SelectionConstraint::Liberal, SelectionConstraint::Exclusive, SelectionConstraint::Synchronous] {
            let p = permitted(kind, &g);
            for _ in 0..50 {
                assert!(p.contains(&p.sample(&mut rng)));
            }
        }
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("sync".parse::<Policy>().unwrap(), Policy::Synchronous);
        assert_eq!("liberal-bernoulli:0.25".parse::<Policy>().unwrap(), Policy::LiberalBernoulli(0.25));
        assert!("liberal-bernoulli:2".parse::<Policy>().is_err());
        assert!("random".parse::<Policy>().is_err());
    }

    #[test]
    fn deficits() {
        let g = path(2).unwrap();
        let mk = |sels: Vec<Vec<usize>>| RunTrace {
            configurations: vec![vec![0, 0]; sels.len() + 1],
            statuses: vec![Status::Neither; sels.len() + 1],
            selections: sels,
            terminal: Terminal::BudgetExhausted,
        };
        assert_eq!(weakly_fair_prefix_deficit(&mk(vec![vec![0, 1]; 4]), &g), vec![0, 0]);
        assert_eq!(weakly_fair_prefix_deficit(&mk(vec![vec![0]]), &g), vec![0, 1]);
        assert_eq!(weakly_fair_prefix_deficit(&mk(vec![vec![]; 5]), &g), vec![5, 5]);
    }
}
