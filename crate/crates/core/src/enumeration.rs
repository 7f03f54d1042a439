//! Exchange graphs of m-clusters, m-maximal green sequences, edge parity
//! and fan components.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mutation::{GradedVector, MutationContext, MutationError, MutationState, StateJson};

pub const DEFAULT_NODE_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("exchange graph exceeds the node cap of {0}")]
    NodeCapExceeded(usize),
    #[error("green edges contain a directed cycle")]
    GreenCycle,
    #[error("no terminal state is reachable")]
    NoTerminal,
    #[error(transparent)]
    Mutation(#[from] MutationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Horizontal,
    Vertical,
}

impl Parity {
    pub fn of_slope(s: u32) -> Self {
        if s % 2 == 0 {
            Parity::Horizontal
        } else {
            Parity::Vertical
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Horizontal => "horizontal",
            Parity::Vertical => "vertical",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "horizontal" | "h" => Ok(Parity::Horizontal),
            "vertical" | "v" => Ok(Parity::Vertical),
            other => Err(format!("unknown parity `{other}`")),
        }
    }
}

/// Horizontal iff the slope of the mutated column is even.
pub fn classify_edge(st: &MutationState, k: usize) -> Result<Parity, MutationError> {
    let s = *st.slopes().get(k).ok_or(MutationError::VertexOutOfRange { k, n: st.n() })?;
    if s >= st.m() {
        return Err(MutationError::SlopeAtMax(k));
    }
    Ok(Parity::of_slope(s))
}

/// Relabeling that sorts the columns by `(slope, |c_j|)` within each class
/// of positions sharing a symmetrizer entry.
///
/// Column `j` always carries a root of weight `f_j`, so only permutations
/// preserving the symmetrizer relate labeled seeds of the same m-cluster.
/// The pairs are pairwise distinct in a valid state, so this is the
/// lexicographically least representative over those permutations (all
/// `n!` of them in the simply-laced case).
pub fn canonical_permutation(st: &MutationState) -> Vec<usize> {
    let f = st.context().quiver().symmetrizer();
    let mut perm: Vec<usize> = (0..st.n()).collect();
    let mut weights: Vec<i64> = f.to_vec();
    weights.sort_unstable();
    weights.dedup();
    for w in weights {
        let positions: Vec<usize> = (0..st.n()).filter(|&j| f[j] == w).collect();
        let mut cols = positions.clone();
        cols.sort_by_key(|&j| (st.slopes()[j], st.abs_column(j)));
        for (p, c) in positions.into_iter().zip(cols) {
            perm[p] = c;
        }
    }
    perm
}

pub fn canonical_form(st: &MutationState) -> MutationState {
    st.relabel(&canonical_permutation(st))
}

fn key_of_canonical(st: &MutationState) -> String {
    let cols: Vec<String> = (0..st.n())
        .map(|j| {
            let c: Vec<String> = st.abs_column(j).iter().map(ToString::to_string).collect();
            format!("{}:{}", st.slopes()[j], c.join(","))
        })
        .collect();
    cols.join("|")
}

/// A string identifying the m-cluster of `st` independent of column order.
pub fn canonical_key(st: &MutationState) -> String {
    key_of_canonical(&canonical_form(st))
}

#[derive(Debug, Clone)]
pub struct GraphNode {
    pub key: String,
    /// Canonically labeled representative; edge directions refer to it.
    pub state: MutationState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    /// Direction (0-based) in the labeling of the source node's state.
    pub k: usize,
    pub parity: Parity,
}

/// Green exchange graph: nodes are m-clusters, edges are positive mutations.
#[derive(Debug, Clone)]
pub struct ExchangeGraph {
    ctx: Arc<MutationContext>,
    nodes: Vec<GraphNode>,
    index: HashMap<String, usize>,
    edges: Vec<GraphEdge>,
    initial: usize,
    terminals: Vec<usize>,
}

impl ExchangeGraph {
    /// Closure of the initial state under positive and negative mutations.
    pub fn build(ctx: &Arc<MutationContext>, node_cap: usize) -> Result<Self, EnumerationError> {
        let mut nodes: Vec<GraphNode> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let init = canonical_form(&MutationState::initial(ctx));
        let key = key_of_canonical(&init);
        index.insert(key.clone(), 0);
        nodes.push(GraphNode { key, state: init });
        queue.push_back(0);
        let mut edges = Vec::new();
        while let Some(u) = queue.pop_front() {
            let st = nodes[u].state.clone();
            let mut neighbours = Vec::new();
            for k in 0..st.n() {
                if st.slopes()[k] < st.m() {
                    let next = st.mu_plus(k)?;
                    neighbours.push((Some((k, Parity::of_slope(st.slopes()[k]))), next));
                }
            }
            for k in 0..st.n() {
                if st.slopes()[k] > 0 {
                    match st.mu_minus(k) {
                        Ok(prev) => neighbours.push((None, prev)),
                        Err(MutationError::NotInvertibleHere(_)) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            for (edge, next) in neighbours {
                let canon = canonical_form(&next);
                let key = key_of_canonical(&canon);
                let v = match index.get(&key) {
                    Some(&v) => v,
                    None => {
                        if nodes.len() >= node_cap {
                            return Err(EnumerationError::NodeCapExceeded(node_cap));
                        }
                        let v = nodes.len();
                        index.insert(key.clone(), v);
                        nodes.push(GraphNode { key, state: canon });
                        queue.push_back(v);
                        v
                    }
                };
                if let Some((k, parity)) = edge {
                    edges.push(GraphEdge { from: u, to: v, k, parity });
                }
            }
        }
        let terminals = nodes.iter().enumerate().filter(|(_, n)| n.state.is_terminal()).map(|(i, _)| i).collect();
        let graph = Self { ctx: Arc::clone(ctx), nodes, index, edges, initial: 0, terminals };
        graph.topological_order()?;
        Ok(graph)
    }

    pub fn context(&self) -> &Arc<MutationContext> {
        &self.ctx
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn node_of(&self, st: &MutationState) -> Option<usize> {
        self.index.get(&canonical_key(st)).copied()
    }

    /// Kahn order of the green edges; fails on a directed cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>, EnumerationError> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            indeg[e.to] += 1;
            out[e.from].push(e.to);
        }
        let mut ready: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_front() {
            order.push(u);
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push_back(v);
                }
            }
        }
        if order.len() != n {
            return Err(EnumerationError::GreenCycle);
        }
        Ok(order)
    }

    /// Undirected neighbour lists (each unordered pair once).
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if !adj[e.from].contains(&e.to) {
                adj[e.from].push(e.to);
                adj[e.to].push(e.from);
            }
        }
        adj
    }

    /// Length of the longest green path from the initial node to a terminal.
    pub fn longest_green_path(&self) -> Result<usize, EnumerationError> {
        let order = self.topological_order()?;
        let mut best: Vec<Option<usize>> = vec![None; self.nodes.len()];
        best[self.initial] = Some(0);
        for u in order {
            let Some(d) = best[u] else { continue };
            for e in self.edges.iter().filter(|e| e.from == u) {
                best[e.to] = Some(best[e.to].map_or(d + 1, |x| x.max(d + 1)));
            }
        }
        self.terminals.iter().filter_map(|&t| best[t]).max().ok_or(EnumerationError::NoTerminal)
    }

    /// Connected components of the subgraph keeping only `parity` edges.
    /// Each component is sorted; components are ordered by their least node.
    pub fn fan_components(&self, parity: Parity) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut x = x;
            while parent[x] != r {
                let next = parent[x];
                parent[x] = r;
                x = next;
            }
            r
        }
        for e in self.edges.iter().filter(|e| e.parity == parity) {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            count: self.nodes.len(),
            nodes: self.nodes.iter().map(|n| NodeJson { key: n.key.clone(), state: n.state.to_json() }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    from: self.nodes[e.from].key.clone(),
                    to: self.nodes[e.to].key.clone(),
                    k: e.k + 1,
                    parity: e.parity,
                })
                .collect(),
            initial: self.nodes[self.initial].key.clone(),
            terminals: self.terminals.iter().map(|&t| self.nodes[t].key.clone()).collect(),
        }
    }
}

/// Number of m-clusters in type `A_n`: `binom((m+1)(n+1), n+1) / (m(n+1)+1)`.
pub fn fuss_catalan(n: u64, m: u64) -> BigUint {
    let top = (m + 1) * (n + 1);
    let k = n + 1;
    let mut binom = BigUint::one();
    for i in 0..k {
        binom *= top - i;
        binom /= i + 1;
    }
    binom / (m * (n + 1) + 1)
}

/// One maximal sequence of positive mutations from the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgsRecord {
    /// Directions, 0-based in memory.
    pub mutations: Vec<usize>,
    /// `c~_k` of the mutated column just before each step.
    pub crossings: Vec<GradedVector>,
}

impl MgsRecord {
    pub fn len(&self) -> usize {
        self.mutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutations.is_empty()
    }

    pub fn crossing_dims(&self) -> Vec<Vec<i64>> {
        self.crossings.iter().map(|c| c.coords.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MgsEnumeration {
    pub records: Vec<MgsRecord>,
    /// Whether some branch was cut off by the depth cap.
    pub truncated: bool,
}

impl MgsEnumeration {
    pub fn to_json(&self) -> MgsJson {
        MgsJson {
            sequences: self
                .records
                .iter()
                .map(|r| MgsSequenceJson {
                    mutations: r.mutations.iter().map(|k| k + 1).collect(),
                    crossings: r.crossings.clone(),
                })
                .collect(),
            truncated: self.truncated,
        }
    }
}

/// Depth-first search over positive mutations, ascending direction at each
/// branch, keeping every path that reaches a terminal state within
/// `depth_cap` steps.
pub fn enumerate_mgs(ctx: &Arc<MutationContext>, depth_cap: usize) -> Result<MgsEnumeration, MutationError> {
    struct Search {
        cap: usize,
        records: Vec<MgsRecord>,
        truncated: bool,
        path: Vec<usize>,
        crossings: Vec<GradedVector>,
    }
    impl Search {
        fn go(&mut self, st: &MutationState) -> Result<(), MutationError> {
            if st.is_terminal() {
                self.records.push(MgsRecord { mutations: self.path.clone(), crossings: self.crossings.clone() });
                return Ok(());
            }
            if self.path.len() >= self.cap {
                self.truncated = true;
                return Ok(());
            }
            for k in 0..st.n() {
                if st.slopes()[k] >= st.m() {
                    continue;
                }
                let next = st.mu_plus(k)?;
                self.path.push(k);
                self.crossings.push(st.c_tilde(k));
                self.go(&next)?;
                self.path.pop();
                self.crossings.pop();
            }
            Ok(())
        }
    }
    let mut search = Search {
        cap: depth_cap.max(1),
        records: Vec::new(),
        truncated: false,
        path: Vec::new(),
        crossings: Vec::new(),
    };
    search.go(&MutationState::initial(ctx))?;
    Ok(MgsEnumeration { records: search.records, truncated: search.truncated })
}

/// Maximum length of an m-maximal green sequence (finite type).
pub fn longest_mgs(ctx: &Arc<MutationContext>, node_cap: usize) -> Result<usize, EnumerationError> {
    ExchangeGraph::build(ctx, node_cap)?.longest_green_path()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    pub key: String,
    pub state: StateJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub k: usize,
    pub parity: Parity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub count: usize,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
    pub initial: String,
    pub terminals: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MgsSequenceJson {
    pub mutations: Vec<usize>,
    pub crossings: Vec<GradedVector>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MgsJson {
    pub sequences: Vec<MgsSequenceJson>,
    pub truncated: bool,
}

pub fn fuss_catalan_usize(n: u64, m: u64) -> usize {
    fuss_catalan(n, m).to_usize().expect("small Fuss-Catalan number")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sizes(comps: &[Vec<usize>]) -> Vec<usize> {
        let mut s: Vec<usize> = comps.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    #[test]
    fn fuss_catalan_values() {
        assert_eq!(fuss_catalan_usize(2, 3), 22);
        assert_eq!(fuss_catalan_usize(3, 3), 140);
        assert_eq!(fuss_catalan_usize(2, 1), 5);
        assert_eq!(fuss_catalan_usize(4, 2), 273);
    }

    #[test]
    fn fuss_catalan_matches_product_form() {
        // prod_{e=1}^{n} (m(n+1)+e+1)/(e+1), evaluated with exact rationals
        use num_rational::BigRational;
        for n in 1..6u64 {
            for m in 1..5u64 {
                let mut p = BigRational::one();
                for e in 1..=n {
                    p *= BigRational::new((m * (n + 1) + e + 1).into(), (e + 1).into());
                }
                assert_eq!(p.to_integer().to_biguint().unwrap(), fuss_catalan(n, m));
            }
        }
    }

    #[test]
    fn canonical_keys() {
        let st1 = fixtures::st(1);
        assert_eq!(canonical_key(&st1), canonical_key(&st1.relabel(&[1, 0])));
        assert_ne!(canonical_key(&fixtures::st(2)), canonical_key(&fixtures::st(3)));
        assert_ne!(canonical_key(&fixtures::stx()), canonical_key(&fixtures::stz()));
    }

    #[test]
    fn canonical_form_is_least_over_permutations() {
        // brute force over all relabelings of every A3, m = 2 state
        let graph = ExchangeGraph::build(&fixtures::ctx("a3", 2), DEFAULT_NODE_CAP).unwrap();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for node in graph.nodes() {
            let reps: Vec<(Vec<u32>, Vec<Vec<i64>>)> = perms
                .iter()
                .map(|p| {
                    let r = node.state.relabel(p);
                    let pairs: Vec<(u32, Vec<i64>)> = (0..3).map(|j| (r.slopes()[j], r.abs_column(j))).collect();
                    (pairs.iter().map(|x| x.0).collect(), pairs.iter().map(|x| x.1.clone()).collect())
                })
                .collect();
            let min = reps.iter().min_by(|a, b| {
                let za: Vec<_> = a.0.iter().zip(&a.1).collect();
                let zb: Vec<_> = b.0.iter().zip(&b.1).collect();
                za.cmp(&zb)
            });
            let canon = &node.state;
            assert_eq!(min.unwrap().0, canon.slopes().to_vec());
            for p in &perms {
                assert_eq!(canonical_key(&node.state.relabel(p)), node.key);
            }
        }
    }

    #[test]
    fn a2_m1_pentagon() {
        let g = ExchangeGraph::build(&fixtures::ctx("a2", 1), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(g.node_count(), 5);
        let adj = g.undirected_adjacency();
        assert!(adj.iter().all(|a| a.len() == 2));
        assert_eq!(g.terminals().len(), 1);
    }

    #[test]
    fn m_cluster_counts() {
        for (name, n, m) in [("a2", 2, 1), ("a2", 2, 2), ("a2", 2, 3), ("a3", 3, 1), ("a3", 3, 2), ("a4", 4, 1)] {
            let g = ExchangeGraph::build(&fixtures::ctx(name, m), DEFAULT_NODE_CAP).unwrap();
            assert_eq!(g.node_count(), fuss_catalan_usize(n, u64::from(m)), "{name} m={m}");
        }
        let orient = ExchangeGraph::build(&fixtures::ctx("a_n:>", 2), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(orient.node_count(), 12);
    }

    #[test]
    fn valued_counts() {
        // type B2: binom((m+1)2, 2)
        let g = ExchangeGraph::build(&fixtures::ctx("b2", 1), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(g.node_count(), 6);
        let g = ExchangeGraph::build(&fixtures::ctx("b2", 2), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(g.node_count(), 15);
        // type G2 has 8 clusters
        let g = ExchangeGraph::build(&fixtures::ctx("g2", 1), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(g.node_count(), 8);
    }

    #[test]
    fn node_cap_guards_infinite_type() {
        let err = ExchangeGraph::build(&fixtures::ctx("a2tilde", 1), 500).unwrap_err();
        assert_eq!(err, EnumerationError::NodeCapExceeded(500));
    }

    #[test]
    fn a2_mgs() {
        let res = enumerate_mgs(&fixtures::ctx("a2", 1), 10).unwrap();
        assert!(!res.truncated);
        let mut lens: Vec<usize> = res.records.iter().map(MgsRecord::len).collect();
        lens.sort_unstable();
        assert_eq!(lens, vec![2, 3]);
    }

    #[test]
    fn a2_m3_chain_is_an_mgs() {
        let res = enumerate_mgs(&fixtures::ctx("a2", 3), 20).unwrap();
        assert!(res.records.iter().any(|r| r.mutations == fixtures::A2_CHAIN));
    }

    #[test]
    fn longest_sequences() {
        assert_eq!(longest_mgs(&fixtures::ctx("a2", 3), DEFAULT_NODE_CAP).unwrap(), 9);
        assert_eq!(longest_mgs(&fixtures::ctx("a2", 1), DEFAULT_NODE_CAP).unwrap(), 3);
        assert_eq!(longest_mgs(&fixtures::ctx("a3", 3), DEFAULT_NODE_CAP).unwrap(), 18);
    }

    #[test]
    fn edge_parity() {
        assert_eq!(classify_edge(&fixtures::st(1), 1).unwrap(), Parity::Horizontal);
        assert_eq!(classify_edge(&fixtures::st(2), 1).unwrap(), Parity::Vertical);
        assert_eq!(classify_edge(&fixtures::stx(), 2).unwrap(), Parity::Horizontal);
        assert_eq!(classify_edge(&fixtures::stx(), 1).unwrap(), Parity::Vertical);
        assert_eq!(classify_edge(&fixtures::st(8), 0), Err(MutationError::SlopeAtMax(0)));
    }

    #[test]
    fn a2_m3_fans() {
        let g = ExchangeGraph::build(&fixtures::ctx("a2", 3), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(sizes(&g.fan_components(Parity::Horizontal)), vec![5, 5, 4, 4, 4]);
        assert_eq!(sizes(&g.fan_components(Parity::Vertical)), vec![5, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn a3_m3_fans() {
        let g = ExchangeGraph::build(&fixtures::ctx("a3", 3), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(g.node_count(), 140);
        assert_eq!(g.fan_components(Parity::Horizontal).len(), 14);
        assert_eq!(g.fan_components(Parity::Vertical).len(), 55);
    }

    #[test]
    fn graph_json_is_deterministic() {
        let ctx = fixtures::ctx("a2", 2);
        let a = serde_json::to_string(&ExchangeGraph::build(&ctx, DEFAULT_NODE_CAP).unwrap().to_json()).unwrap();
        let b = serde_json::to_string(&ExchangeGraph::build(&ctx, DEFAULT_NODE_CAP).unwrap().to_json()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"count\":12"));
    }
}
