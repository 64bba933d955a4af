//! Solution quality and multi-iteration statistics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::oracle::CutBaseline;
use crate::scheduler::SolveResult;

/// Fraction of edges whose endpoints received different colors; 1.0 for an
/// edgeless graph. Every edge counts once regardless of weight.
pub fn coloring_accuracy(graph: &Graph, coloring: &[usize]) -> Result<f64> {
    check_len("coloring", graph.node_count(), coloring.len())?;
    if graph.edge_count() == 0 {
        return Ok(1.0);
    }
    let satisfied = graph.edges().iter().filter(|e| coloring[e.u] != coloring[e.v]).count();
    Ok(satisfied as f64 / graph.edge_count() as f64)
}

/// Total weight of edges crossing the bipartition.
pub fn cut_value(graph: &Graph, partition: &[u8]) -> Result<f64> {
    check_len("partition", graph.node_count(), partition.len())?;
    Ok(graph
        .edges()
        .iter()
        .filter(|e| partition[e.u] != partition[e.v])
        .map(|e| e.weight)
        .sum())
}

/// Achieved cut over `baseline_cut`. Can exceed 1.0 when the baseline is
/// not optimal.
pub fn cut_accuracy(graph: &Graph, partition: &[u8], baseline_cut: f64) -> Result<f64> {
    if baseline_cut.is_nan() || baseline_cut <= 0.0 {
        return Err(Error::InvalidArgument(format!("cut baseline must be positive, got {baseline_cut}")));
    }
    Ok(cut_value(graph, partition)? / baseline_cut)
}

pub fn hamming(a: &[usize], b: &[usize]) -> Result<usize> {
    check_len("coloring", a.len(), b.len())?;
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Minimum Hamming distance over the `colors` cyclic relabelings `c ↦ (c + r) mod colors` of `b`.
pub fn hamming_min_rotation(a: &[usize], b: &[usize], colors: usize) -> Result<usize> {
    check_len("coloring", a.len(), b.len())?;
    if colors == 0 {
        return Err(Error::InvalidArgument("color count must be positive".into()));
    }
    Ok((0..colors)
        .map(|r| a.iter().zip(b).filter(|(&x, &y)| x != (y + r) % colors).count())
        .min()
        .unwrap_or(0))
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.is_empty() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub seed: u64,
    pub cut_accuracy: f64,
    pub coloring_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub schema: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub colors: usize,
    pub per_iteration: Vec<IterationRecord>,
    pub best_accuracy: f64,
    /// First iteration reaching `best_accuracy`.
    pub best_iteration: usize,
    pub mean_accuracy: f64,
    pub mean_cut_accuracy: f64,
    /// Raw pairwise Hamming distances between final colorings.
    pub hamming_matrix: Vec<Vec<usize>>,
    /// Same, minimized over cyclic color relabelings.
    pub hamming_rotation_matrix: Vec<Vec<usize>>,
    /// Pearson correlation of stage-1 cut accuracy against final coloring accuracy.
    pub stage_correlation: f64,
    pub stage_correlation_spearman: f64,
    /// Set when either series is constant and the correlation is undefined (reported as 0).
    pub correlation_degenerate: bool,
    pub cut_baseline: CutBaseline,
    pub distinct_colorings: usize,
}

pub const RUN_STATS_SCHEMA: &str = "phasepotts.run_stats/v1";

/// Aggregates a batch of runs on the same graph.
pub fn aggregate(results: &[SolveResult], graph: &Graph) -> Result<RunStats> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot aggregate an empty result set".into()))?;
    for r in results {
        check_len("coloring", graph.node_count(), r.coloring.len())?;
        check_len("partition", graph.node_count(), r.partition.len())?;
        if r.colors != first.colors {
            return Err(Error::InvalidArgument("results use different color counts".into()));
        }
    }
    let colors = first.colors;

    let mut per_iteration = Vec::with_capacity(results.len());
    let mut coloring_acc = Vec::with_capacity(results.len());
    for (iteration, r) in results.iter().enumerate() {
        let acc = coloring_accuracy(graph, &r.coloring)?;
        coloring_acc.push(acc);
        per_iteration.push(IterationRecord {
            iteration,
            seed: r.seed,
            cut_accuracy: r.cut_accuracy,
            coloring_accuracy: acc,
        });
    }
    let cut_acc: Vec<f64> = results.iter().map(|r| r.cut_accuracy).collect();

    let (best_iteration, best_accuracy) = coloring_acc
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, a)| if a > best.1 { (i, a) } else { best });
    let mean_accuracy = coloring_acc.iter().sum::<f64>() / results.len() as f64;
    let mean_cut_accuracy = cut_acc.iter().sum::<f64>() / results.len() as f64;

    let n = results.len();
    let mut hamming_matrix = vec![vec![0; n]; n];
    let mut hamming_rotation_matrix = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let raw = hamming(&results[i].coloring, &results[j].coloring)?;
            let rot = hamming_min_rotation(&results[i].coloring, &results[j].coloring, colors)?;
            hamming_matrix[i][j] = raw;
            hamming_matrix[j][i] = raw;
            hamming_rotation_matrix[i][j] = rot;
            hamming_rotation_matrix[j][i] = rot;
        }
    }
    let mut distinct: Vec<&[usize]> = results.iter().map(|r| r.coloring.as_slice()).collect();
    distinct.sort_unstable();
    distinct.dedup();

    let pearson_r = pearson(&cut_acc, &coloring_acc);
    let spearman_r = spearman(&cut_acc, &coloring_acc);

    Ok(RunStats {
        schema: RUN_STATS_SCHEMA.to_string(),
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        colors,
        per_iteration,
        best_accuracy,
        best_iteration,
        mean_accuracy,
        mean_cut_accuracy,
        hamming_matrix,
        hamming_rotation_matrix,
        stage_correlation: pearson_r.unwrap_or(0.0),
        stage_correlation_spearman: spearman_r.unwrap_or(0.0),
        correlation_degenerate: pearson_r.is_none(),
        cut_baseline: first.cut_baseline.clone(),
        distinct_colorings: distinct.len(),
    })
}

impl RunStats {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per iteration, then a `summary` row carrying best/mean and the correlation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,iteration,seed,cut_accuracy,coloring_accuracy,best_accuracy,mean_accuracy,stage_correlation\n");
        for rec in &self.per_iteration {
            writeln!(
                out,
                "iteration,{},{},{:.6},{:.6},,,",
                rec.iteration, rec.seed, rec.cut_accuracy, rec.coloring_accuracy
            )
            .unwrap();
        }
        writeln!(
            out,
            "summary,,,{:.6},,{:.6},{:.6},{:.6}",
            self.mean_cut_accuracy, self.best_accuracy, self.mean_accuracy, self.stage_correlation
        )
        .unwrap();
        out
    }

    /// Upper-triangle pairwise distances, suitable for a histogram.
    pub fn pairwise_hamming(&self, rotation_invariant: bool) -> Vec<usize> {
        let m = if rotation_invariant { &self.hamming_rotation_matrix } else { &self.hamming_matrix };
        (0..m.len()).flat_map(|i| (i + 1..m.len()).map(move |j| m[i][j])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, kings_graph, path_graph};
    use crate::hamiltonian::potts_energy;
    use proptest::prelude::*;

    fn result(seed: u64, coloring: Vec<usize>, cut_accuracy: f64) -> SolveResult {
        SolveResult {
            schema: crate::scheduler::SOLVE_RESULT_SCHEMA.into(),
            seed,
            colors: 4,
            partition: coloring.iter().map(|&c| (c % 2) as u8).collect(),
            coloring,
            cut_accuracy,
            coloring_accuracy: 0.0,
            cut_baseline: CutBaseline::Exact { value: 1.0 },
            stage_locked: vec![true, true],
            wall_time: None,
        }
    }

    #[test]
    fn coloring_accuracy_examples() {
        let g = kings_graph(7).unwrap();
        let proper = crate::oracle::constructive_kings_coloring(7).unwrap();
        assert_eq!(coloring_accuracy(&g, &proper).unwrap(), 1.0);
        assert_eq!(coloring_accuracy(&g, &vec![2; 49]).unwrap(), 0.0);
        let mut one_bad = proper.clone();
        // the corner (0,0) only touches colors 1, 2, 3; recoloring it 1 breaks just the edge to (0,1)
        one_bad[0] = 1;
        let bad_edges = g.edges().iter().filter(|e| one_bad[e.u] == one_bad[e.v]).count();
        assert_eq!(bad_edges, 1);
        assert_eq!(coloring_accuracy(&g, &one_bad).unwrap(), 155.0 / 156.0);
        assert_eq!(coloring_accuracy(&path_graph(3), &[0, 0, 0]).unwrap(), 0.0);
        assert_eq!(coloring_accuracy(&path_graph(1), &[0]).unwrap(), 1.0);
        assert!(coloring_accuracy(&g, &[0]).is_err());
    }

    #[test]
    fn cut_accuracy_examples() {
        assert_eq!(cut_accuracy(&path_graph(2), &[0, 1], 1.0).unwrap(), 1.0);
        let tri = complete_graph(3);
        assert_eq!(cut_accuracy(&tri, &[0, 0, 1], 2.0).unwrap(), 1.0);
        assert_eq!(cut_accuracy(&tri, &[0, 0, 0], 2.0).unwrap(), 0.0);
        let g = kings_graph(3).unwrap();
        let stripes: Vec<u8> = (0..9).map(|i| ((i / 3) % 2) as u8).collect();
        assert_eq!(cut_accuracy(&g, &stripes, 14.0).unwrap(), 1.0);
        assert!(cut_accuracy(&tri, &[0, 0, 1], 0.0).is_err());
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&[0, 1, 2], &[0, 1, 2]).unwrap(), 0);
        assert_eq!(hamming_min_rotation(&[0, 1, 2], &[0, 1, 2], 4).unwrap(), 0);
        let c1 = vec![0, 1, 2, 3, 3];
        let c2: Vec<usize> = c1.iter().map(|c| (c + 1) % 4).collect();
        assert_eq!(hamming(&c1, &c2).unwrap(), 5);
        assert_eq!(hamming_min_rotation(&c1, &c2, 4).unwrap(), 0);
        assert_eq!(hamming(&[0, 1], &[0, 2]).unwrap(), 1);
        assert!(hamming(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let g = path_graph(3);
        let stats = aggregate(&[result(1, vec![0, 1, 1], 0.5)], &g).unwrap();
        assert_eq!(stats.best_accuracy, 0.5);
        assert_eq!(stats.mean_accuracy, 0.5);
        assert_eq!(stats.hamming_matrix, vec![vec![0]]);
        assert!(stats.correlation_degenerate);
        assert_eq!(stats.stage_correlation, 0.0);

        let same = aggregate(&[result(1, vec![0, 1, 0], 1.0), result(2, vec![0, 1, 0], 1.0)], &g).unwrap();
        assert_eq!(same.hamming_matrix, vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(same.distinct_colorings, 1);

        // cut accuracy equal to coloring accuracy in every iteration
        let rs = vec![
            result(1, vec![0, 1, 0], 1.0),
            result(2, vec![0, 0, 1], 0.5),
            result(3, vec![2, 2, 2], 0.0),
        ];
        let stats = aggregate(&rs, &g).unwrap();
        assert!((stats.stage_correlation - 1.0).abs() < 1e-12);
        assert!(!stats.correlation_degenerate);
        assert_eq!(stats.best_iteration, 0);
        assert!(aggregate(&[], &g).is_err());
    }

    #[test]
    fn csv_shape() {
        let g = path_graph(3);
        let stats = aggregate(&[result(1, vec![0, 1, 0], 1.0), result(2, vec![0, 0, 1], 0.5)], &g).unwrap();
        let csv = stats.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("summary"));
        let back: RunStats = serde_json::from_str(&stats.to_json().unwrap()).unwrap();
        assert_eq!(back, stats);
    }

    #[test]
    fn spearman_handles_ties() {
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[10.0, 20.0, 20.0, 30.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        let neg = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((neg + 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn accuracy_one_iff_zero_potts_energy(colors in proptest::collection::vec(0usize..4, 9)) {
            let g = kings_graph(3).unwrap();
            let acc = coloring_accuracy(&g, &colors).unwrap();
            let energy = potts_energy(&g, &colors).unwrap();
            prop_assert_eq!(acc == 1.0, energy == 0.0);
        }

        #[test]
        fn rotation_never_exceeds_raw(
            a in proptest::collection::vec(0usize..4, 12),
            b in proptest::collection::vec(0usize..4, 12),
        ) {
            let raw = hamming(&a, &b).unwrap();
            let rot = hamming_min_rotation(&a, &b, 4).unwrap();
            prop_assert!(rot <= raw);
            prop_assert!(raw <= a.len());
        }

        #[test]
        fn aggregate_is_permutation_covariant(
            colorings in proptest::collection::vec(proptest::collection::vec(0usize..4, 6), 2..6),
            cuts in proptest::collection::vec(0.0f64..1.0, 6),
            rot in 0usize..6,
        ) {
            let g = complete_graph(6);
            let results: Vec<SolveResult> = colorings
                .iter()
                .enumerate()
                .map(|(i, c)| result(i as u64, c.clone(), cuts[i]))
                .collect();
            let k = results.len();
            let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
            let permuted: Vec<SolveResult> = perm.iter().map(|&p| results[p].clone()).collect();
            let a = aggregate(&results, &g).unwrap();
            let b = aggregate(&permuted, &g).unwrap();
            prop_assert_eq!(a.best_accuracy, b.best_accuracy);
            prop_assert!((a.mean_accuracy - b.mean_accuracy).abs() < 1e-12);
            prop_assert!((a.stage_correlation - b.stage_correlation).abs() < 1e-9);
            for i in 0..k {
                prop_assert_eq!(b.per_iteration[i].seed, a.per_iteration[perm[i]].seed);
                for j in 0..k {
                    prop_assert_eq!(b.hamming_matrix[i][j], a.hamming_matrix[perm[i]][perm[j]]);
                }
            }
        }
    }
}
