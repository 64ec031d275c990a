//! Labeled undirected graphs, generators, and the two graph constructions
//! used by the indistinguishability arguments: the Kronecker (bipartite
//! double) cover and the chain construction.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label symbol of unlabeled graphs.
pub const UNLABELED: &str = "·";

/// Default node cap for [`isomorphic`].
pub const ISO_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    alphabet: Vec<String>,
    ids: Vec<String>,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

/// Two adjacent nodes of a host graph, named by id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePairAnchor {
    pub first: String,
    pub second: String,
}

impl NodePairAnchor {
    pub fn new(first: impl Into<String>, second: impl Into<String>) -> Self {
        NodePairAnchor {
            first: first.into(),
            second: second.into(),
        }
    }
}

impl LabeledGraph {
    /// Builds a graph from node `(id, label)` pairs and id edges.
    ///
    /// Unknown ids or labels are errors; structural problems such as
    /// self-loops or disconnection are left to [`validate`].
    pub fn new<S: AsRef<str>>(
        alphabet: &[S],
        nodes: &[(S, S)],
        edges: &[(S, S)],
    ) -> Result<Self> {
        let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        let mut ids = Vec::with_capacity(nodes.len());
        let mut labels = Vec::with_capacity(nodes.len());
        for (id, label) in nodes {
            let id = id.as_ref();
            if index.insert(id.to_string(), ids.len()).is_some() {
                return Err(Error::domain(format!("duplicate node id {id:?}")));
            }
            let l = alphabet
                .iter()
                .position(|a| a == label.as_ref())
                .ok_or_else(|| Error::domain(format!("label {:?} not in alphabet", label.as_ref())))?;
            ids.push(id.to_string());
            labels.push(l);
        }
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| Error::domain(format!("unknown node {:?}", a.as_ref())))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| Error::domain(format!("unknown node {:?}", b.as_ref())))?;
            idx_edges.push((ia, ib));
        }
        Ok(Self::from_indices(alphabet, ids, labels, idx_edges))
    }

    pub(crate) fn from_indices(
        alphabet: Vec<String>,
        ids: Vec<String>,
        labels: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Self {
        let mut adj = vec![Vec::new(); ids.len()];
        for &(a, b) in &edges {
            adj[a].push(b);
            if a != b {
                adj[b].push(a);
            }
        }
        LabeledGraph {
            alphabet,
            ids,
            labels,
            edges,
            adj,
        }
    }

    /// Unlabeled graph on nodes `v0..v{n-1}`.
    pub fn unlabeled(n: usize, edges: &[(usize, usize)]) -> Self {
        Self::from_indices(
            vec![UNLABELED.to_string()],
            (0..n).map(|i| format!("v{i}")).collect(),
            vec![0; n],
            edges.to_vec(),
        )
    }

    /// Graph on nodes `v0..v{n-1}` with the given labels; the alphabet is
    /// the set of labels in first-occurrence order.
    pub fn with_labels<S: AsRef<str>>(labels: &[S], edges: &[(usize, usize)]) -> Self {
        let mut alphabet: Vec<String> = Vec::new();
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let i = match alphabet.iter().position(|a| a == l) {
                Some(i) => i,
                None => {
                    alphabet.push(l.to_string());
                    alphabet.len() - 1
                }
            };
            idx.push(i);
        }
        Self::from_indices(
            alphabet,
            (0..labels.len()).map(|i| format!("v{i}")).collect(),
            idx,
            edges.to_vec(),
        )
    }

    /// Same structure and ids, new labels over a new alphabet.
    pub fn relabeled<S: AsRef<str>>(&self, alphabet: &[S], labels: &[usize]) -> Self {
        assert_eq!(labels.len(), self.n());
        Self::from_indices(
            alphabet.iter().map(|s| s.as_ref().to_string()).collect(),
            self.ids.clone(),
            labels.to_vec(),
            self.edges.clone(),
        )
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn label(&self, v: usize) -> &str {
        &self.alphabet[self.labels[v]]
    }

    pub fn label_index(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return false;
        }
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n()
    }

    fn anchor_indices(&self, anchor: &NodePairAnchor) -> Result<(usize, usize)> {
        let a = self
            .index_of(&anchor.first)
            .ok_or_else(|| Error::domain(format!("anchor node {:?} not in graph", anchor.first)))?;
        let b = self
            .index_of(&anchor.second)
            .ok_or_else(|| Error::domain(format!("anchor node {:?} not in graph", anchor.second)))?;
        if a == b || !self.adjacent(a, b) {
            return Err(Error::domain(format!(
                "anchor nodes {:?} and {:?} are not adjacent",
                anchor.first, anchor.second
            )));
        }
        Ok((a, b))
    }
}

/// Lists every violated graph invariant; empty iff the graph is a valid input.
pub fn validate(g: &LabeledGraph) -> Vec<String> {
    let mut out = Vec::new();
    if g.n() < 2 {
        out.push("fewer than 2 nodes".to_string());
    }
    let mut seen = HashSet::new();
    for &(a, b) in g.edges() {
        if a == b {
            out.push(format!("self-loop at {}", g.id(a)));
        } else if !seen.insert((a.min(b), a.max(b))) {
            out.push(format!("duplicate edge {} -- {}", g.id(a), g.id(b)));
        }
    }
    for v in 0..g.n() {
        if g.labels[v] >= g.alphabet.len() {
            out.push(format!("label of {} not in alphabet", g.id(v)));
        }
    }
    if g.n() >= 2 && !g.is_connected() {
        out.push("not connected".to_string());
    }
    out
}

fn unlabeled_graph(ids: Vec<String>, edges: Vec<(usize, usize)>) -> LabeledGraph {
    let n = ids.len();
    LabeledGraph::from_indices(vec![UNLABELED.to_string()], ids, vec![0; n], edges)
}

/// Unlabeled star with center `c` and leaves `l1..ln`.
pub fn generate_star(n_leaves: usize) -> Result<LabeledGraph> {
    if n_leaves < 2 {
        return Err(Error::domain("a star needs at least 2 leaves"));
    }
    let mut ids = vec!["c".to_string()];
    ids.extend((1..=n_leaves).map(|i| format!("l{i}")));
    let edges = (1..=n_leaves).map(|i| (0, i)).collect();
    Ok(unlabeled_graph(ids, edges))
}

/// Cycle whose nodes `v0..` carry `labels` in order.
pub fn generate_cycle<S: AsRef<str>>(labels: &[S]) -> Result<LabeledGraph> {
    let n = labels.len();
    if n < 3 {
        return Err(Error::domain("a cycle needs at least 3 nodes"));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Ok(LabeledGraph::with_labels(labels, &edges))
}

/// Unlabeled cycle on `n` nodes.
pub fn cycle(n: usize) -> Result<LabeledGraph> {
    generate_cycle(&vec![UNLABELED; n])
}

/// Path whose nodes `v0..` carry `labels` in order.
pub fn generate_path<S: AsRef<str>>(labels: &[S]) -> Result<LabeledGraph> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::domain("a path needs at least 2 nodes"));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Ok(LabeledGraph::with_labels(labels, &edges))
}

/// Unlabeled path on `n` nodes.
pub fn path(n: usize) -> Result<LabeledGraph> {
    generate_path(&vec![UNLABELED; n])
}

/// Complete graph whose nodes carry `labels`.
pub fn generate_complete<S: AsRef<str>>(labels: &[S]) -> Result<LabeledGraph> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::domain("a complete graph needs at least 2 nodes"));
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    Ok(LabeledGraph::with_labels(labels, &edges))
}

/// Unlabeled complete graph on `n` nodes.
pub fn complete(n: usize) -> Result<LabeledGraph> {
    generate_complete(&vec![UNLABELED; n])
}

/// Bipartite double cover: node `v` becomes `v/0` and `v/1`, and each edge
/// `{u,v}` becomes `{u/0,v/1}` and `{u/1,v/0}`. The result may be
/// disconnected and is not validated.
pub fn kronecker_cover(g: &LabeledGraph) -> LabeledGraph {
    let n = g.n();
    let mut ids = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for layer in 0..2 {
        for v in 0..n {
            ids.push(format!("{}/{}", g.id(v), layer));
            labels.push(g.label_index(v));
        }
    }
    let mut edges = Vec::with_capacity(2 * g.edges().len());
    for &(a, b) in g.edges() {
        edges.push((a, n + b));
        edges.push((n + a, b));
    }
    LabeledGraph::from_indices(g.alphabet.clone(), ids, labels, edges)
}

/// Two-coloring of every component; `None` if some component has an odd cycle.
pub fn two_coloring(g: &LabeledGraph) -> Option<Vec<u8>> {
    let mut color = vec![u8::MAX; g.n()];
    for s in 0..g.n() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return None;
                }
            }
        }
    }
    Some(color)
}

pub fn has_odd_cycle(g: &LabeledGraph) -> bool {
    two_coloring(g).is_none()
}

/// Joins `t` copies of `g` and of `h` into one chain: copy `i` of each
/// graph is linked to copy `i+1` by the edge from its anchor `first` to
/// the next copy's anchor `second`, and the last copies are bridged by
/// their anchor `first` nodes. Copies are named `<id>@G<i>` / `<id>@H<i>`.
pub fn chain_construction(
    g: &LabeledGraph,
    h: &LabeledGraph,
    t: usize,
    g_anchor: &NodePairAnchor,
    h_anchor: &NodePairAnchor,
) -> Result<LabeledGraph> {
    if t == 0 {
        return Err(Error::domain("t must be positive"));
    }
    let (gu, gv) = g.anchor_indices(g_anchor)?;
    let (hu, hv) = h.anchor_indices(h_anchor)?;

    let mut alphabet = g.alphabet.clone();
    for a in &h.alphabet {
        if !alphabet.contains(a) {
            alphabet.push(a.clone());
        }
    }
    let h_label: Vec<usize> = h
        .alphabet
        .iter()
        .map(|a| alphabet.iter().position(|b| b == a).unwrap())
        .collect();

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let g_base = |i: usize| (i - 1) * g.n();
    let h_offset = t * g.n();
    let h_base = |i: usize| h_offset + (i - 1) * h.n();

    for i in 1..=t {
        for v in 0..g.n() {
            ids.push(format!("{}@G{i}", g.id(v)));
            labels.push(g.label_index(v));
        }
        edges.extend(g.edges().iter().map(|&(a, b)| (g_base(i) + a, g_base(i) + b)));
    }
    for i in 1..=t {
        for v in 0..h.n() {
            ids.push(format!("{}@H{i}", h.id(v)));
            labels.push(h_label[h.label_index(v)]);
        }
        edges.extend(h.edges().iter().map(|&(a, b)| (h_base(i) + a, h_base(i) + b)));
    }
    for i in 1..t {
        edges.push((g_base(i) + gu, g_base(i + 1) + gv));
        edges.push((h_base(i) + hu, h_base(i + 1) + hv));
    }
    edges.push((g_base(t) + gu, h_base(t) + hu));
    Ok(LabeledGraph::from_indices(alphabet, ids, labels, edges))
}

/// Label-preserving isomorphism test by backtracking with degree and label
/// pruning. Fails with `TooLarge` above [`ISO_CAP`] nodes.
pub fn isomorphic(g: &LabeledGraph, h: &LabeledGraph) -> Result<bool> {
    isomorphic_capped(g, h, ISO_CAP)
}

pub fn isomorphic_capped(g: &LabeledGraph, h: &LabeledGraph, cap: usize) -> Result<bool> {
    if g.n().max(h.n()) > cap {
        return Err(Error::too_large(format!("isomorphism test above {cap} nodes")));
    }
    if g.n() != h.n() || g.edge_set().len() != h.edge_set().len() {
        return Ok(false);
    }
    let key = |x: &LabeledGraph, v: usize| (x.label(v).to_string(), x.neighbor_set(v).len());
    let mut gk: Vec<_> = (0..g.n()).map(|v| key(g, v)).collect();
    let mut hk: Vec<_> = (0..h.n()).map(|v| key(h, v)).collect();
    let gkeys = gk.clone();
    let hkeys = hk.clone();
    gk.sort();
    hk.sort();
    if gk != hk {
        return Ok(false);
    }
    let gadj = g.adjacency_matrix();
    let hadj = h.adjacency_matrix();
    let mut map = vec![usize::MAX; g.n()];
    let mut used = vec![false; h.n()];
    fn search(
        v: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        gkeys: &[(String, usize)],
        hkeys: &[(String, usize)],
        gadj: &[Vec<bool>],
        hadj: &[Vec<bool>],
    ) -> bool {
        if v == map.len() {
            return true;
        }
        for w in 0..hkeys.len() {
            if used[w] || gkeys[v] != hkeys[w] {
                continue;
            }
            if (0..v).any(|u| gadj[u][v] != hadj[map[u]][w]) {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if search(v + 1, map, used, gkeys, hkeys, gadj, hadj) {
                return true;
            }
            used[w] = false;
        }
        map[v] = usize::MAX;
        false
    }
    Ok(search(0, &mut map, &mut used, &gkeys, &hkeys, &gadj, &hadj))
}

impl LabeledGraph {
    fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
    }

    fn neighbor_set(&self, v: usize) -> HashSet<usize> {
        self.adj[v].iter().copied().collect()
    }

    fn adjacency_matrix(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.n()]; self.n()];
        for &(a, b) in &self.edges {
            m[a][b] = true;
            m[b][a] = true;
        }
        m
    }
}

/// Canonical form: the lexicographically least `(labels, adjacency bits)`
/// over all node orders that sort nodes by (label symbol, degree). Two
/// graphs are isomorphic iff their canonical forms are equal. Intended for
/// graphs of at most 11 nodes.
pub fn canonical_form(g: &LabeledGraph) -> (Vec<String>, u64) {
    let n = g.n();
    assert!(n <= 11, "canonical form supports at most 11 nodes");
    let adj = g.adjacency_matrix();
    let class = |v: usize| (g.label(v).to_string(), adj[v].iter().filter(|&&b| b).count());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| class(v));
    let classes: Vec<_> = order.iter().map(|&v| class(v)).collect();
    // Blocks of equal class; permutations only within blocks.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        if i > 0 && classes[i] == classes[i - 1] {
            blocks.last_mut().unwrap().push(v);
        } else {
            blocks.push(vec![v]);
        }
    }
    let labels: Vec<String> = classes.iter().map(|c| c.0.clone()).collect();
    let mut best = u64::MAX;
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(
        blocks: &[Vec<usize>],
        bi: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        adj: &[Vec<bool>],
        best: &mut u64,
        partial: u64,
    ) {
        let pos = perm.len();
        if bi == blocks.len() {
            *best = (*best).min(partial);
            return;
        }
        let block = &blocks[bi];
        let block_start: usize = blocks[..bi].iter().map(Vec::len).sum();
        let within = pos - block_start;
        if within == block.len() {
            rec(blocks, bi + 1, perm, used, adj, best, partial);
            return;
        }
        for &v in block {
            if used[v] {
                continue;
            }
            // Bits for pairs (j, pos) with j < pos, laid out row by row so
            // that earlier positions are more significant.
            let mut bits = partial;
            for (j, &u) in perm.iter().enumerate() {
                if adj[u][v] {
                    bits |= 1u64 << (63 - pair_index(j, pos));
                }
            }
            perm.push(v);
            used[v] = true;
            rec(blocks, bi, perm, used, adj, best, bits);
            used[v] = false;
            perm.pop();
        }
    }
    rec(&blocks, 0, &mut perm, &mut used, &adj, &mut best, 0);
    (labels, best)
}

fn pair_index(j: usize, k: usize) -> usize {
    // position of pair (j,k), j<k, in the order (0,1),(0,2),(1,2),(0,3),...
    k * (k - 1) / 2 + j
}

/// All pairwise non-isomorphic connected unlabeled graphs with
/// `2..=max_nodes` nodes, grouped by node count.
pub fn enumerate_connected(max_nodes: usize) -> Vec<LabeledGraph> {
    let mut out = Vec::new();
    if max_nodes < 2 {
        return out;
    }
    let mut layer: Vec<Vec<(usize, usize)>> = vec![vec![(0, 1)]];
    out.push(LabeledGraph::unlabeled(2, &[(0, 1)]));
    for n in 3..=max_nodes {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for edges in &layer {
            for mask in 1u32..(1 << (n - 1)) {
                let mut e = edges.clone();
                for u in 0..n - 1 {
                    if mask & (1 << u) != 0 {
                        e.push((u, n - 1));
                    }
                }
                let g = LabeledGraph::unlabeled(n, &e);
                if seen.insert(canonical_form(&g)) {
                    next.push(e);
                }
            }
        }
        out.extend(next.iter().map(|e| LabeledGraph::unlabeled(n, e)));
        layer = next;
    }
    out
}

/// All labelings of `g` over `alphabet`, one representative per
/// isomorphism class of labeled graphs.
pub fn labelings<S: AsRef<str>>(g: &LabeledGraph, alphabet: &[S]) -> Vec<LabeledGraph> {
    let k = alphabet.len();
    let n = g.n();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut labels = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            labels.push(c % k);
            c /= k;
        }
        let lg = g.relabeled(alphabet, &labels);
        if seen.insert(canonical_form(&lg)) {
            out.push(lg);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    alphabet: Vec<String>,
    nodes: Vec<NodeDoc>,
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: String,
    label: String,
}

pub fn serialize_graph(g: &LabeledGraph) -> String {
    let doc = GraphDoc {
        alphabet: g.alphabet.clone(),
        nodes: (0..g.n())
            .map(|v| NodeDoc {
                id: g.id(v).to_string(),
                label: g.label(v).to_string(),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|&(a, b)| (g.id(a).to_string(), g.id(b).to_string()))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}

pub fn graph_to_value(g: &LabeledGraph) -> serde_json::Value {
    serde_json::from_str(&serialize_graph(g)).expect("graph json")
}

/// Parses graph JSON. Rejects unknown ids and labels, self-loops and
/// duplicate edges; connectivity is checked by [`validate`].
pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    graph_from_doc(doc)
}

pub fn graph_from_value(v: &serde_json::Value) -> Result<LabeledGraph> {
    let doc: GraphDoc =
        serde_json::from_value(v.clone()).map_err(|e| Error::parse("graph", e.to_string()))?;
    graph_from_doc(doc)
}

fn graph_from_doc(doc: GraphDoc) -> Result<LabeledGraph> {
    let mut index = HashMap::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (i, node) in doc.nodes.iter().enumerate() {
        if index.insert(node.id.clone(), i).is_some() {
            return Err(Error::parse(format!("nodes[{i}]"), format!("duplicate node id {:?}", node.id)));
        }
        let l = doc
            .alphabet
            .iter()
            .position(|a| *a == node.label)
            .ok_or_else(|| Error::parse(format!("nodes[{i}]"), format!("label {:?} not in alphabet", node.label)))?;
        ids.push(node.id.clone());
        labels.push(l);
    }
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (i, (a, b)) in doc.edges.iter().enumerate() {
        let loc = format!("edges[{i}]");
        let ia = *index
            .get(a)
            .ok_or_else(|| Error::parse(loc.clone(), format!("unknown node {a:?}")))?;
        let ib = *index
            .get(b)
            .ok_or_else(|| Error::parse(loc.clone(), format!("unknown node {b:?}")))?;
        if ia == ib {
            return Err(Error::parse(loc, format!("self-loop at {a:?}")));
        }
        if !seen.insert((ia.min(ib), ia.max(ib))) {
            return Err(Error::parse(loc, format!("duplicate edge {a:?} -- {b:?}")));
        }
        edges.push((ia, ib));
    }
    Ok(LabeledGraph::from_indices(doc.alphabet, ids, labels, edges))
}

/// Graphviz rendering; nodes appear in declaration order.
pub fn export_dot(g: &LabeledGraph) -> String {
    let mut s = String::from("graph G {\n");
    for v in 0..g.n() {
        let _ = writeln!(s, "  \"{}\" [label=\"{}:{}\"];", g.id(v), g.id(v), g.label(v));
    }
    for &(a, b) in g.edges() {
        let _ = writeln!(s, "  \"{}\" -- \"{}\";", g.id(a), g.id(b));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> LabeledGraph {
        path(2).unwrap()
    }

    #[test]
    fn validate_examples() {
        let single = LabeledGraph::unlabeled(1, &[]);
        assert_eq!(validate(&single), vec!["fewer than 2 nodes".to_string()]);
        let two_edges = LabeledGraph::unlabeled(4, &[(0, 1), (2, 3)]);
        assert_eq!(validate(&two_edges), vec!["not connected".to_string()]);
        assert!(validate(&edge()).is_empty());
    }

    #[test]
    fn star_shapes() {
        let s2 = generate_star(2).unwrap();
        assert!(isomorphic(&s2, &path(3).unwrap()).unwrap());
        let s4 = generate_star(4).unwrap();
        assert_eq!((s4.n(), s4.edges().len(), s4.max_degree()), (5, 4, 4));
        assert!(matches!(generate_star(1), Err(Error::Domain(_))));
    }

    #[test]
    fn cycle_shapes() {
        let c3 = generate_cycle(&["0", "1", "2"]).unwrap();
        assert_eq!((c3.n(), c3.edges().len()), (3, 3));
        assert_eq!(c3.label(2), "2");
        let c6 = generate_cycle(&["0", "1", "2", "0", "1", "2"]).unwrap();
        assert_eq!(c6.n(), 6);
        assert!(validate(&c6).is_empty());
        let c4 = generate_cycle(&["a", "a", "a", "a"]).unwrap();
        assert_eq!(c4.alphabet(), &["a".to_string()]);
        assert!(generate_cycle(&["a", "b"]).is_err());
    }

    #[test]
    fn cover_examples() {
        let e = kronecker_cover(&edge());
        assert_eq!((e.n(), e.edges().len()), (4, 2));
        assert!(!e.is_connected());
        let c3 = generate_cycle(&["0", "1", "2"]).unwrap();
        let c6 = generate_cycle(&["0", "1", "2", "0", "1", "2"]).unwrap();
        assert!(isomorphic(&kronecker_cover(&c3), &c6).unwrap());
    }

    #[test]
    fn figure_five_graph() {
        let g = LabeledGraph::new(
            &[UNLABELED],
            &[("u", UNLABELED), ("v", UNLABELED), ("w", UNLABELED), ("x", UNLABELED)],
            &[("u", "v"), ("v", "w"), ("w", "u"), ("w", "x")],
        )
        .unwrap();
        assert!(has_odd_cycle(&g));
        let cover = kronecker_cover(&g);
        assert_eq!(cover.n(), 8);
        assert!(cover.is_connected());
        assert!(validate(&cover).is_empty());
    }

    #[test]
    fn odd_cycles() {
        assert!(has_odd_cycle(&cycle(3).unwrap()));
        assert!(!has_odd_cycle(&cycle(4).unwrap()));
    }

    #[test]
    fn chain_sizes() {
        let a = NodePairAnchor::new("v0", "v1");
        let k1 = chain_construction(&edge(), &edge(), 1, &a, &a).unwrap();
        assert_eq!((k1.n(), k1.edges().len()), (4, 3));
        assert!(validate(&k1).is_empty());
        let k2 = chain_construction(&edge(), &edge(), 2, &a, &a).unwrap();
        assert_eq!(k2.n(), 8);
        assert!(k2.is_connected());
        assert!(k2.index_of("v0@G2").is_some());
        let bad = NodePairAnchor::new("v0", "v2");
        assert!(chain_construction(&path(3).unwrap(), &edge(), 1, &bad, &a).is_err());
    }

    #[test]
    fn iso_examples() {
        let c3 = generate_cycle(&["0", "1", "2"]).unwrap();
        let rot = generate_cycle(&["1", "2", "0"]).unwrap();
        assert!(isomorphic(&c3, &rot).unwrap());
        let swapped = generate_cycle(&["0", "0", "2"]).unwrap();
        assert!(!isomorphic(&c3, &swapped).unwrap());
        assert!(!isomorphic(&generate_star(3).unwrap(), &path(4).unwrap()).unwrap());
        let big = path(11).unwrap();
        assert!(matches!(isomorphic(&big, &big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn enumeration_counts() {
        // Known counts of connected graphs on 2..=6 nodes.
        let all = enumerate_connected(6);
        let mut counts = [0usize; 7];
        for g in &all {
            counts[g.n()] += 1;
        }
        assert_eq!(&counts[2..], &[1, 2, 6, 21, 112]);
    }

    #[test]
    fn labeling_counts() {
        // Two-colorings of a path on 3 nodes up to reflection: 6.
        assert_eq!(labelings(&path(3).unwrap(), &["b", "w"]).len(), 6);
        // Two-colorings of the triangle up to symmetry: 4.
        assert_eq!(labelings(&cycle(3).unwrap(), &["b", "w"]).len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let s = generate_star(3).unwrap();
        let text = serialize_graph(&s);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn json_rejects_duplicate_edge() {
        let text = r#"{"alphabet":["a"],"nodes":[{"id":"x","label":"a"},{"id":"y","label":"a"}],
            "edges":[["x","y"],["y","x"]]}"#;
        match parse_graph(text) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "edges[1]"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_graph("{"), Err(Error::Parse { .. })));
    }

    #[test]
    fn dot_edge_graph() {
        let dot = export_dot(&edge());
        assert_eq!(dot.matches(" -- ").count(), 1);
        assert_eq!(dot, export_dot(&edge()));
    }
}
