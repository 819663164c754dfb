//! Undirected simple graph with dense node ids and edge-toggle mutation.
//!
//! Graphs are immutable values: [`Graph::toggle_edge`] returns a new graph and
//! leaves the input untouched, so episodes over the same base graph can run in
//! parallel without synchronization.

use std::collections::BTreeSet;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = usize;

/// Whether a toggle inserts or deletes its edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum ToggleKind {
    Add,
    Remove,
}

/// A single undirected edge mutation.
///
/// `Add` requires the edge to be absent and `Remove` requires it present at
/// application time; endpoints must differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct EdgeToggle {
    pub u: NodeId,
    pub v: NodeId,
    pub kind: ToggleKind,
}

impl EdgeToggle {
    pub fn add(u: NodeId, v: NodeId) -> Self {
        EdgeToggle { u, v, kind: ToggleKind::Add }
    }

    pub fn remove(u: NodeId, v: NodeId) -> Self {
        EdgeToggle { u, v, kind: ToggleKind::Remove }
    }

    /// The toggle that undoes this one.
    pub fn inverse(&self) -> Self {
        EdgeToggle {
            u: self.u,
            v: self.v,
            kind: match self.kind {
                ToggleKind::Add => ToggleKind::Remove,
                ToggleKind::Remove => ToggleKind::Add,
            },
        }
    }
}

/// Undirected simple graph over nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<NodeId>>,
    m: usize,
}

impl Graph {
    /// Empty graph on `n` nodes.
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n], m: 0 }
    }

    /// Build from an edge iterator. Self-loops and duplicates are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.insert_edge(u, v)?;
        }
        Ok(g)
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if u >= self.adj.len() {
            return Err(Error::InvalidAction(format!(
                "node {u} out of range for graph with {} nodes",
                self.adj.len()
            )));
        }
        Ok(())
    }

    fn insert_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::InvalidAction(format!("self-loop at node {u}")));
        }
        if self.adj[u].contains(&v) {
            return Err(Error::InvalidAction(format!("edge ({u},{v}) already present")));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        self.m += 1;
        Ok(())
    }

    fn delete_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if !self.adj[u].contains(&v) {
            return Err(Error::InvalidAction(format!("edge ({u},{v}) not present")));
        }
        self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        self.m -= 1;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of undirected edges, each counted once.
    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(u).is_some_and(|s| s.contains(&v))
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    /// Neighbors of `u` in ascending order.
    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj[u].iter().copied()
    }

    /// All edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// Apply one edge toggle, returning the mutated copy.
    pub fn toggle_edge(&self, t: &EdgeToggle) -> Result<Graph> {
        if t.u == t.v {
            return Err(Error::InvalidAction(format!("self-loop toggle at node {}", t.u)));
        }
        let mut next = self.clone();
        match t.kind {
            ToggleKind::Add => next.insert_edge(t.u, t.v)?,
            ToggleKind::Remove => next.delete_edge(t.u, t.v)?,
        }
        Ok(next)
    }

    /// Number of undirected edges in the symmetric difference of two graphs.
    pub fn graph_edit_count(g0: &Graph, g1: &Graph) -> Result<usize> {
        if g0.node_count() != g1.node_count() {
            return Err(Error::DimensionMismatch { left: g0.node_count(), right: g1.node_count() });
        }
        let mut count = 0;
        for u in 0..g0.node_count() {
            count += g0.adj[u].symmetric_difference(&g1.adj[u]).count();
        }
        Ok(count / 2)
    }

    /// Serialize as an edge-list text block (one `u v` line per edge).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// A graph loaded from an edge list, with the original node labels and
/// ingestion statistics.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `labels[i]` is the label the input file used for dense node `i`.
    pub labels: Vec<i64>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl LoadedGraph {
    /// Dense id for an original label, if the label occurred in the input.
    pub fn node_for_label(&self, label: i64) -> Option<NodeId> {
        self.labels.binary_search(&label).ok()
    }
}

/// Parse an edge-list stream: one edge per line, two whitespace-separated
/// integer labels; lines starting with `#` or `%` (and blank lines) are
/// skipped. Labels are remapped to dense 0-based ids in ascending label
/// order; self-loops and duplicate edges are dropped and counted.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut raw_edges: Vec<(i64, i64)> = Vec::new();
    let mut self_loops = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let a = parse_token(tokens.next(), lineno, trimmed)?;
        let b = parse_token(tokens.next(), lineno, trimmed)?;
        // Extra columns (weights, timestamps) are tolerated if numeric.
        for extra in tokens {
            if extra.parse::<f64>().is_err() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unexpected token {extra:?}"),
                });
            }
        }
        if a == b {
            self_loops += 1;
            continue;
        }
        raw_edges.push((a.min(b), a.max(b)));
    }

    let mut labels: Vec<i64> = raw_edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    labels.sort_unstable();
    labels.dedup();

    let index_of = |label: i64| labels.binary_search(&label).expect("label collected above");

    let mut graph = Graph::new(labels.len());
    let mut duplicates = 0usize;
    for (a, b) in raw_edges {
        let u = index_of(a);
        let v = index_of(b);
        if graph.has_edge(u, v) {
            duplicates += 1;
        } else {
            graph.insert_edge(u, v)?;
        }
    }

    Ok(LoadedGraph { graph, labels, self_loops_dropped: self_loops, duplicates_dropped: duplicates })
}

fn parse_token(token: Option<&str>, line: usize, content: &str) -> Result<i64> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("expected two node ids, got {content:?}"),
    })?;
    token.parse::<i64>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid node id {token:?}"),
    })
}
