//! Weighted undirected graphs, the King's-graph benchmark family, and
//! DIMACS / JSON edge-list I/O.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Weighted undirected simple graph. Each edge is stored once with `u < v`.
///
/// Positive weights are anti-ferromagnetic: the dynamics push the two
/// endpoints apart and the coloring metrics count them as constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph from `(i, j, w)` triples, canonicalizing `i < j`.
    ///
    /// Self-loops, duplicate edges, out-of-range endpoints and non-finite
    /// weights are rejected.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut stored = Vec::new();
        for (i, j, weight) in edges {
            let edge = canonical_edge(node_count, i, j, weight)?;
            if !seen.insert((edge.u, edge.v)) {
                return Err(Error::DuplicateEdge { u: edge.u, v: edge.v });
            }
            stored.push(edge);
        }
        Ok(Self::from_canonical(node_count, stored))
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(node_count, edges.into_iter().map(|(i, j)| (i, j, 1.0)))
    }

    fn from_canonical(node_count: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, k));
            adjacency[e.v].push((e.u, k));
        }
        Graph {
            node_count,
            edges,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, edge index)` pairs incident to `node`.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest `Σ_j |J_ij|` over all nodes; equals `max_degree` for unit weights.
    pub fn max_weighted_degree(&self) -> f64 {
        let mut sums = vec![0.0f64; self.node_count];
        for e in &self.edges {
            sums[e.u] += e.weight.abs();
            sums[e.v] += e.weight.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Edge set as sorted `(u, v, weight bits)` for order-insensitive comparison.
    pub fn canonical_edge_set(&self) -> Vec<(usize, usize, u64)> {
        let mut set: Vec<_> = self.edges.iter().map(|e| (e.u, e.v, e.weight.to_bits())).collect();
        set.sort_unstable();
        set
    }

    /// True when both graphs have the same nodes and edge set, ignoring edge order.
    pub fn same_as(&self, other: &Graph) -> bool {
        self.node_count == other.node_count && self.canonical_edge_set() == other.canonical_edge_set()
    }

    /// Subgraph induced by `nodes`; node `nodes[k]` becomes node `k`.
    pub fn induced(&self, nodes: &[usize]) -> Result<Graph> {
        let mut index = vec![usize::MAX; self.node_count];
        for (k, &v) in nodes.iter().enumerate() {
            if v >= self.node_count {
                return Err(Error::NodeOutOfRange { node: v, node_count: self.node_count });
            }
            index[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
            .map(|e| (index[e.u], index[e.v], e.weight));
        Graph::new(nodes.len(), edges)
    }

    /// Side length if this graph is exactly `kings_graph(side)`.
    pub fn kings_side(&self) -> Option<usize> {
        let side = (self.node_count as f64).sqrt().round() as usize;
        if side == 0 || side * side != self.node_count {
            return None;
        }
        let expected = 2 * (side - 1) * (2 * side - 1);
        if self.edge_count() != expected {
            return None;
        }
        kings_graph(side).ok().filter(|k| k.same_as(self)).map(|_| side)
    }
}

fn canonical_edge(node_count: usize, i: usize, j: usize, weight: f64) -> Result<Edge> {
    for node in [i, j] {
        if node >= node_count {
            return Err(Error::NodeOutOfRange { node, node_count });
        }
    }
    if i == j {
        return Err(Error::SelfLoop { node: i });
    }
    if !weight.is_finite() {
        return Err(Error::NonFiniteWeight { u: i, v: j });
    }
    Ok(Edge {
        u: i.min(j),
        v: i.max(j),
        weight,
    })
}

/// The `side × side` King's graph with unit weights, nodes indexed row-major.
pub fn kings_graph(side: usize) -> Result<Graph> {
    if side == 0 {
        return Err(Error::InvalidArgument("King's graph side must be at least 1".into()));
    }
    let idx = |r: usize, c: usize| r * side + c;
    let mut edges = Vec::with_capacity(2 * (side - 1) * (2 * side - 1));
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                edges.push(Edge { u: idx(r, c), v: idx(r, c + 1), weight: 1.0 });
            }
            if r + 1 < side {
                edges.push(Edge { u: idx(r, c), v: idx(r + 1, c), weight: 1.0 });
                if c + 1 < side {
                    edges.push(Edge { u: idx(r, c), v: idx(r + 1, c + 1), weight: 1.0 });
                }
                if c > 0 {
                    edges.push(Edge { u: idx(r, c), v: idx(r + 1, c - 1), weight: 1.0 });
                }
            }
        }
    }
    Ok(Graph::from_canonical(side * side, edges))
}

/// Complete graph on `n` nodes with unit weights.
pub fn complete_graph(n: usize) -> Graph {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| Edge { u: i, v: j, weight: 1.0 }));
    Graph::from_canonical(n, edges.collect())
}

pub fn path_graph(n: usize) -> Graph {
    let edges = (1..n).map(|i| Edge { u: i - 1, v: i, weight: 1.0 });
    Graph::from_canonical(n, edges.collect())
}

/// Cycle on `n ≥ 3` nodes; smaller `n` degrades to a path.
pub fn cycle_graph(n: usize) -> Graph {
    if n < 3 {
        return path_graph(n);
    }
    let mut edges: Vec<Edge> = (1..n).map(|i| Edge { u: i - 1, v: i, weight: 1.0 }).collect();
    edges.push(Edge { u: 0, v: n - 1, weight: 1.0 });
    Graph::from_canonical(n, edges)
}

/// On-disk graph formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// DIMACS `.col`: `c` comments, one `p edge n m` line, `e i j` lines (1-indexed).
    DimacsCol,
    /// `{"n": int, "edges": [[i, j] | [i, j, w], ...]}` (0-indexed).
    JsonEdges,
}

impl GraphFormat {
    /// Guesses the format from a file extension (`.col`/`.dimacs` vs `.json`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "col" | "dimacs" => Some(GraphFormat::DimacsCol),
            "json" => Some(GraphFormat::JsonEdges),
            _ => None,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimacs" | "col" | "dimacs_col" => Ok(GraphFormat::DimacsCol),
            "json" | "json_edges" => Ok(GraphFormat::JsonEdges),
            other => Err(Error::InvalidArgument(format!("unknown graph format `{other}`"))),
        }
    }
}

pub fn load_graph(path: &Path, format: GraphFormat) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        GraphFormat::DimacsCol => parse_dimacs(&text),
        GraphFormat::JsonEdges => parse_json_edges(&text),
    }
}

pub fn save_graph(graph: &Graph, path: &Path, format: GraphFormat) -> Result<()> {
    let text = match format {
        GraphFormat::DimacsCol => to_dimacs(graph),
        GraphFormat::JsonEdges => to_json_edges(graph),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut node_count: Option<usize> = None;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let parse_err = |message: String| Error::Parse { line, message };
        let mut fields = raw.split_whitespace();
        match fields.next() {
            None | Some("c") => {}
            Some("p") => {
                if node_count.is_some() {
                    return Err(parse_err("second `p` line".into()));
                }
                if fields.next() != Some("edge") {
                    return Err(parse_err("expected `p edge <nodes> <edges>`".into()));
                }
                let n = parse_field::<usize>(fields.next(), line, "node count")?;
                parse_field::<usize>(fields.next(), line, "edge count")?;
                node_count = Some(n);
            }
            Some("e") => {
                let n = node_count.ok_or_else(|| parse_err("`e` line before `p` line".into()))?;
                let i = parse_field::<usize>(fields.next(), line, "edge endpoint")?;
                let j = parse_field::<usize>(fields.next(), line, "edge endpoint")?;
                let weight = match fields.next() {
                    Some(w) => parse_field::<f64>(Some(w), line, "edge weight")?,
                    None => 1.0,
                };
                for node in [i, j] {
                    if node == 0 || node > n {
                        return Err(Error::NodeOutOfRange { node: node.wrapping_sub(1), node_count: n });
                    }
                }
                let edge = canonical_edge(n, i - 1, j - 1, weight)?;
                if !seen.insert((edge.u, edge.v)) {
                    return Err(Error::DuplicateEdge { u: edge.u, v: edge.v });
                }
                edges.push(edge);
            }
            Some(tag) => return Err(parse_err(format!("unknown line type `{tag}`"))),
        }
    }
    let n = node_count.ok_or(Error::Parse { line: 0, message: "missing `p edge` line".into() })?;
    Ok(Graph::from_canonical(n, edges))
}

fn parse_field<T: FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let field = field.ok_or_else(|| Error::Parse { line, message: format!("missing {what}") })?;
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{field}`"),
    })
}

fn to_dimacs(graph: &Graph) -> String {
    let mut out = format!("p edge {} {}\n", graph.node_count(), graph.edge_count());
    let weighted = graph.edges().iter().any(|e| e.weight != 1.0);
    for e in graph.edges() {
        if weighted {
            writeln!(out, "e {} {} {:?}", e.u + 1, e.v + 1, e.weight).unwrap();
        } else {
            writeln!(out, "e {} {}", e.u + 1, e.v + 1).unwrap();
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    n: usize,
    edges: Vec<Vec<serde_json::Value>>,
}

pub fn parse_json_edges(text: &str) -> Result<Graph> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut triples = Vec::with_capacity(doc.edges.len());
    for (k, entry) in doc.edges.iter().enumerate() {
        let bad = || Error::Parse {
            line: 0,
            message: format!("edge #{k}: expected [i, j] or [i, j, w]"),
        };
        if entry.len() != 2 && entry.len() != 3 {
            return Err(bad());
        }
        let i = entry[0].as_u64().ok_or_else(bad)? as usize;
        let j = entry[1].as_u64().ok_or_else(bad)? as usize;
        let w = match entry.get(2) {
            Some(w) => w.as_f64().ok_or_else(bad)?,
            None => 1.0,
        };
        triples.push((i, j, w));
    }
    Graph::new(doc.n, triples)
}

fn to_json_edges(graph: &Graph) -> String {
    let edges = graph
        .edges()
        .iter()
        .map(|e| {
            let mut entry = vec![e.u.into(), e.v.into()];
            if e.weight != 1.0 {
                entry.push(e.weight.into());
            }
            entry
        })
        .collect();
    let doc = JsonGraph { n: graph.node_count(), edges };
    let mut text = serde_json::to_string(&doc).expect("graph serializes");
    text.push('\n');
    text
}
