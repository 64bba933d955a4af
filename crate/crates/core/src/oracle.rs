//! Exact and constructive baselines: k-coloring decision by DSATUR
//! backtracking, exhaustive max-cut, and closed forms for King's graphs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics;

pub const DEFAULT_NODE_LIMIT: usize = 10_000;
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;
pub const MAX_BRUTE_FORCE_NODES: usize = 24;

#[derive(Debug, Clone, Copy)]
pub struct ColoringSearch {
    pub node_limit: usize,
    /// Maximum number of color assignments tried before giving up.
    pub budget: u64,
}

impl Default for ColoringSearch {
    fn default() -> Self {
        ColoringSearch {
            node_limit: DEFAULT_NODE_LIMIT,
            budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

/// A proper `colors`-coloring of `graph`, or `None` if none exists.
pub fn exact_coloring(graph: &Graph, colors: usize) -> Result<Option<Vec<usize>>> {
    exact_coloring_with(graph, colors, ColoringSearch::default())
}

/// Backtracking search in DSATUR order: always branch on the uncolored node
/// with the most distinct neighbor colors (ties: most uncolored neighbors,
/// then lowest index). A node may open at most one new color, which removes
/// color-permutation symmetry.
pub fn exact_coloring_with(graph: &Graph, colors: usize, search: ColoringSearch) -> Result<Option<Vec<usize>>> {
    let n = graph.node_count();
    if n > search.node_limit {
        return Err(Error::TooLarge(format!("{n} nodes exceeds the limit of {}", search.node_limit)));
    }
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    if colors == 0 {
        return Ok(None);
    }
    if colors == 1 {
        return Ok((graph.edge_count() == 0).then(|| vec![0; n]));
    }

    let mut dsatur = Dsatur::new(graph, colors);
    // Each frame: (node, next color to try).
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut assignments: u64 = 0;
    let mut descend = true;
    loop {
        if descend {
            match dsatur.select() {
                None => return Ok(Some(dsatur.coloring.iter().map(|c| c.unwrap()).collect())),
                Some(v) => stack.push((v, 0)),
            }
        }
        let Some(&mut (v, ref mut next)) = stack.last_mut() else {
            return Ok(None);
        };
        if dsatur.coloring[v].is_some() {
            dsatur.unassign(v);
        }
        let limit = colors.min(dsatur.used_colors() + 1);
        let choice = (*next..limit).find(|&c| dsatur.conflicts[v * colors + c] == 0);
        match choice {
            Some(c) => {
                *next = c + 1;
                assignments += 1;
                if assignments > search.budget {
                    return Err(Error::BudgetExhausted { budget: search.budget });
                }
                dsatur.assign(v, c);
                descend = true;
            }
            None => {
                stack.pop();
                descend = false;
            }
        }
    }
}

struct Dsatur<'g> {
    graph: &'g Graph,
    colors: usize,
    coloring: Vec<Option<usize>>,
    /// `conflicts[v * colors + c]`: colored neighbors of `v` using `c`.
    conflicts: Vec<u32>,
    saturation: Vec<usize>,
    uncolored_degree: Vec<usize>,
    color_use: Vec<usize>,
}

impl<'g> Dsatur<'g> {
    fn new(graph: &'g Graph, colors: usize) -> Self {
        let n = graph.node_count();
        Dsatur {
            graph,
            colors,
            coloring: vec![None; n],
            conflicts: vec![0; n * colors],
            saturation: vec![0; n],
            uncolored_degree: (0..n).map(|v| graph.degree(v)).collect(),
            color_use: vec![0; colors],
        }
    }

    fn used_colors(&self) -> usize {
        self.color_use.iter().rposition(|&u| u > 0).map_or(0, |c| c + 1)
    }

    fn select(&self) -> Option<usize> {
        (0..self.coloring.len())
            .filter(|&v| self.coloring[v].is_none())
            .max_by(|&a, &b| {
                (self.saturation[a], self.uncolored_degree[a])
                    .cmp(&(self.saturation[b], self.uncolored_degree[b]))
                    .then(b.cmp(&a))
            })
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.coloring[v] = Some(c);
        self.color_use[c] += 1;
        for &(u, _) in self.graph.neighbors(v) {
            let slot = &mut self.conflicts[u * self.colors + c];
            if *slot == 0 {
                self.saturation[u] += 1;
            }
            *slot += 1;
            self.uncolored_degree[u] -= 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let c = self.coloring[v].take().expect("node is colored");
        self.color_use[c] -= 1;
        for &(u, _) in self.graph.neighbors(v) {
            let slot = &mut self.conflicts[u * self.colors + c];
            *slot -= 1;
            if *slot == 0 {
                self.saturation[u] -= 1;
            }
            self.uncolored_degree[u] += 1;
        }
    }
}

/// `color(row, col) = 2·(row mod 2) + (col mod 2)`: a proper 4-coloring of
/// every King's graph.
pub fn constructive_kings_coloring(side: usize) -> Result<Vec<usize>> {
    if side == 0 {
        return Err(Error::InvalidArgument("side must be at least 1".into()));
    }
    Ok((0..side * side)
        .map(|i| 2 * ((i / side) % 2) + (i % side) % 2)
        .collect())
}

/// Cut value of the row-parity partition of `kings_graph(side)`: all
/// vertical and diagonal edges cross it.
pub fn stripe_cut_value(side: usize) -> Result<f64> {
    if side < 2 {
        return Err(Error::InvalidArgument("stripe cut needs side ≥ 2".into()));
    }
    Ok((side * (side - 1) + 2 * (side - 1) * (side - 1)) as f64)
}

/// The row-parity partition itself.
pub fn stripe_partition(side: usize) -> Vec<u8> {
    (0..side * side).map(|i| ((i / side) % 2) as u8).collect()
}

/// High label bits enumerated as independent chunks.
const CHUNK_BITS: usize = 6;

/// Exhaustive maximum cut for `n ≤ 24`. Node 0 is fixed to side 0; the rest
/// are enumerated in Gray-code order with O(degree) incremental updates.
pub fn brute_force_maxcut(graph: &Graph) -> Result<(f64, Vec<u8>)> {
    let n = graph.node_count();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(Error::TooLarge(format!(
            "brute-force max-cut is limited to {MAX_BRUTE_FORCE_NODES} nodes, got {n}"
        )));
    }
    if n <= 1 {
        return Ok((0.0, vec![0; n]));
    }
    let free = n - 1;
    let chunk_bits = free.min(CHUNK_BITS);
    let inner_bits = free - chunk_bits;
    let chunks = 1u64 << chunk_bits;

    let search_chunk = |chunk: u64| -> (f64, Vec<u8>) {
        let mut labels = vec![0u8; n];
        // Inner bits drive nodes 1..=inner_bits, chunk bits the rest.
        for b in 0..chunk_bits {
            labels[1 + inner_bits + b] = (chunk >> b & 1) as u8;
        }
        let mut value = metrics::cut_value(graph, &labels).expect("length matches");
        let mut best = (value, labels.clone());
        for k in 1u64..(1u64 << inner_bits) {
            let v = 1 + k.trailing_zeros() as usize;
            let mut delta = 0.0;
            for &(u, e) in graph.neighbors(v) {
                let w = graph.edges()[e].weight;
                delta += if labels[u] == labels[v] { w } else { -w };
            }
            labels[v] ^= 1;
            value += delta;
            if value > best.0 + 1e-9 {
                best = (value, labels.clone());
            }
        }
        best
    };

    #[cfg(feature = "parallel")]
    let per_chunk: Vec<(f64, Vec<u8>)> = (0..chunks).into_par_iter().map(search_chunk).collect();
    #[cfg(not(feature = "parallel"))]
    let per_chunk: Vec<(f64, Vec<u8>)> = (0..chunks).map(search_chunk).collect();

    let mut best: Option<(f64, Vec<u8>)> = None;
    for candidate in per_chunk {
        if best.as_ref().is_none_or(|b| candidate.0 > b.0 + 1e-9) {
            best = Some(candidate);
        }
    }
    let (_, partition) = best.expect("at least one chunk");
    let value = metrics::cut_value(graph, &partition)?;
    Ok((value, partition))
}

/// The denominator used for stage-1 cut accuracy, tagged with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutBaseline {
    /// Proven optimum from exhaustive search.
    Exact { value: f64 },
    /// Row-stripe cut of a King's graph; best known, not proven optimal.
    BestKnown { value: f64 },
    /// Sum of positive edge weights, an upper bound on any cut.
    UpperBound { value: f64 },
}

impl CutBaseline {
    /// Exact for `n ≤ 24`, stripe cut for larger King's graphs, otherwise the
    /// positive-weight upper bound.
    pub fn for_graph(graph: &Graph) -> Result<Self> {
        if graph.node_count() <= MAX_BRUTE_FORCE_NODES {
            let (value, _) = brute_force_maxcut(graph)?;
            return Ok(CutBaseline::Exact { value });
        }
        if let Some(side) = graph.kings_side() {
            return Ok(CutBaseline::BestKnown { value: stripe_cut_value(side)? });
        }
        let value = graph.edges().iter().map(|e| e.weight.max(0.0)).sum();
        Ok(CutBaseline::UpperBound { value })
    }

    pub fn value(&self) -> f64 {
        match *self {
            CutBaseline::Exact { value } | CutBaseline::BestKnown { value } | CutBaseline::UpperBound { value } => value,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CutBaseline::Exact { .. } => "exact",
            CutBaseline::BestKnown { .. } => "best-known",
            CutBaseline::UpperBound { .. } => "upper-bound",
        }
    }

    /// Cut accuracy against this baseline; 1.0 when there is nothing to cut.
    pub fn accuracy(&self, graph: &Graph, partition: &[u8]) -> Result<f64> {
        if self.value() > 0.0 {
            metrics::cut_accuracy(graph, partition, self.value())
        } else {
            metrics::cut_value(graph, partition).map(|_| 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, cycle_graph, kings_graph, path_graph};
    use crate::hamiltonian::potts_energy;
    use proptest::prelude::*;

    /// Exhaustive K-coloring decision for tiny graphs.
    fn colorable_by_enumeration(g: &Graph, colors: usize) -> bool {
        let n = g.node_count();
        let total = colors.pow(n as u32);
        (0..total).any(|mut code| {
            let c: Vec<usize> = (0..n)
                .map(|_| {
                    let d = code % colors;
                    code /= colors;
                    d
                })
                .collect();
            g.edges().iter().all(|e| c[e.u] != c[e.v])
        })
    }

    #[test]
    fn exact_coloring_examples() {
        let k4 = kings_graph(2).unwrap();
        let c = exact_coloring(&k4, 4).unwrap().unwrap();
        let mut sorted = c.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);

        assert_eq!(exact_coloring(&complete_graph(5), 4).unwrap(), None);
        assert_eq!(exact_coloring(&k4, 1).unwrap(), None);
        assert_eq!(exact_coloring(&path_graph(3), 1).unwrap(), None);
        assert_eq!(exact_coloring(&path_graph(1), 1).unwrap(), Some(vec![0]));

        let g = kings_graph(7).unwrap();
        let c = exact_coloring(&g, 4).unwrap().unwrap();
        assert_eq!(potts_energy(&g, &c).unwrap(), 0.0);
        assert_eq!(exact_coloring(&g, 3).unwrap(), None);
    }

    #[test]
    fn exact_coloring_limits() {
        let g = kings_graph(4).unwrap();
        let tight = ColoringSearch { node_limit: 10, budget: 10 };
        assert!(matches!(exact_coloring_with(&g, 4, tight), Err(Error::TooLarge(_))));
        let tight = ColoringSearch { node_limit: 100, budget: 3 };
        assert!(matches!(exact_coloring_with(&g, 4, tight), Err(Error::BudgetExhausted { budget: 3 })));
    }

    #[test]
    fn exact_coloring_larger_kings() {
        let g = kings_graph(46).unwrap();
        let c = exact_coloring(&g, 4).unwrap().unwrap();
        assert_eq!(potts_energy(&g, &c).unwrap(), 0.0);
    }

    #[test]
    fn odd_cycles_need_three() {
        for n in 3..9 {
            let g = cycle_graph(n);
            assert_eq!(exact_coloring(&g, 2).unwrap().is_some(), n % 2 == 0, "C{n}");
            assert!(exact_coloring(&g, 3).unwrap().is_some());
        }
    }

    #[test]
    fn constructive_examples() {
        assert_eq!(constructive_kings_coloring(1).unwrap(), vec![0]);
        assert_eq!(constructive_kings_coloring(2).unwrap(), vec![0, 1, 2, 3]);
        for side in 1..=50 {
            let g = kings_graph(side).unwrap();
            let c = constructive_kings_coloring(side).unwrap();
            assert_eq!(metrics::coloring_accuracy(&g, &c).unwrap(), 1.0, "side {side}");
        }
        assert!(constructive_kings_coloring(0).is_err());
    }

    #[test]
    fn maxcut_examples() {
        assert_eq!(brute_force_maxcut(&path_graph(2)).unwrap().0, 1.0);
        assert_eq!(brute_force_maxcut(&complete_graph(3)).unwrap().0, 2.0);
        assert_eq!(brute_force_maxcut(&complete_graph(4)).unwrap().0, 4.0);
        assert_eq!(brute_force_maxcut(&path_graph(1)).unwrap(), (0.0, vec![0]));
        assert!(matches!(brute_force_maxcut(&path_graph(25)), Err(Error::TooLarge(_))));
    }

    #[test]
    fn stripe_matches_brute_force() {
        assert_eq!(stripe_cut_value(2).unwrap(), 4.0);
        assert_eq!(stripe_cut_value(3).unwrap(), 14.0);
        assert_eq!(stripe_cut_value(7).unwrap(), 114.0);
        assert!(stripe_cut_value(1).is_err());
        for side in [2, 3, 4] {
            let g = kings_graph(side).unwrap();
            let (best, partition) = brute_force_maxcut(&g).unwrap();
            assert_eq!(best, stripe_cut_value(side).unwrap(), "side {side}");
            assert_eq!(metrics::cut_value(&g, &partition).unwrap(), best);
            assert_eq!(metrics::cut_value(&g, &stripe_partition(side)).unwrap(), best);
        }
    }

    #[test]
    fn maxcut_at_size_limit() {
        let g = crate::graph::Graph::unweighted(24, (0..24).flat_map(|i| [(i, (i + 1) % 24), (i, (i + 5) % 24)])).unwrap();
        let (best, partition) = brute_force_maxcut(&g).unwrap();
        assert_eq!(partition[0], 0);
        assert_eq!(metrics::cut_value(&g, &partition).unwrap(), best);
    }

    #[test]
    fn baseline_selection() {
        let small = CutBaseline::for_graph(&kings_graph(3).unwrap()).unwrap();
        assert_eq!(small, CutBaseline::Exact { value: 14.0 });
        let big = CutBaseline::for_graph(&kings_graph(7).unwrap()).unwrap();
        assert_eq!(big, CutBaseline::BestKnown { value: 114.0 });
        let other = CutBaseline::for_graph(&cycle_graph(30)).unwrap();
        assert_eq!(other, CutBaseline::UpperBound { value: 30.0 });
        let empty = CutBaseline::for_graph(&path_graph(1)).unwrap();
        assert_eq!(empty.accuracy(&path_graph(1), &[0]).unwrap(), 1.0);
    }

    fn arb_small_graph() -> impl Strategy<Value = Graph> {
        (1usize..=6).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let m = pairs.len();
            proptest::collection::vec(any::<bool>(), m).prop_map(move |keep| {
                Graph::unweighted(n, pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn exact_coloring_agrees_with_enumeration(g in arb_small_graph(), colors in 1usize..=4) {
            let found = exact_coloring(&g, colors).unwrap();
            prop_assert_eq!(found.is_some(), colorable_by_enumeration(&g, colors));
            if let Some(c) = found {
                prop_assert_eq!(potts_energy(&g, &c).unwrap(), 0.0);
                prop_assert!(c.iter().all(|&x| x < colors));
            }
        }

        #[test]
        fn maxcut_is_flip_symmetric(g in arb_small_graph()) {
            let (best, partition) = brute_force_maxcut(&g).unwrap();
            let flipped: Vec<u8> = partition.iter().map(|b| b ^ 1).collect();
            prop_assert_eq!(metrics::cut_value(&g, &flipped).unwrap(), best);
            // no single-node move improves an optimum
            for v in 0..g.node_count() {
                let mut moved = partition.clone();
                moved[v] ^= 1;
                prop_assert!(metrics::cut_value(&g, &moved).unwrap() <= best);
            }
        }
    }
}
