//! Staged divide-and-color solver.
//!
//! A 4-coloring run walks through five windows:
//!
//! 1. random initial phases drift freely, then every coupling is switched on
//!    and the network anneals without injection;
//! 2. SHIL_1 binarizes every phase to `{0, π}` while couplings stay on; the
//!    binarized phases are read out as the stage-1 max-cut partition;
//! 3. couplings and SHIL are switched off and elevated noise re-randomizes
//!    the phases;
//! 4. only couplings inside each stage-1 group are switched back on (P_EN)
//!    and the two groups anneal independently;
//! 5. group 0 receives SHIL_1 and group 1 receives SHIL_2, locking the
//!    phases to four equally spaced values that are read out as colors.
//!
//! [`Solver::solve_kcoloring`] generalizes this to `2^m` colors with `m`
//! binarization stages.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{random_init, CouplingGate, DynamicsParams, Integrator, PhaseNoise, PhaseState, ShilConfig, ShilSelect};
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::metrics;
use crate::oracle::CutBaseline;

pub const SOLVE_RESULT_SCHEMA: &str = "phasepotts.solve_result/v1";

/// Largest supported number of binarization stages (`2^4 = 16` colors).
pub const MAX_STAGES: u32 = 4;

/// Window durations (time units, 1 unit ≙ 1 ns) of a staged run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    pub t_init: f64,
    pub t_anneal1: f64,
    pub t_lock1: f64,
    pub t_relax: f64,
    pub t_anneal2: f64,
    pub t_lock2: f64,
    /// Noise amplitude during the re-randomization window.
    pub sigma_relax: f64,
    /// Maximum distance from a lock target for a phase to count as locked.
    pub lock_tolerance: f64,
}

impl Default for StagePlan {
    fn default() -> Self {
        StagePlan {
            t_init: 5.0,
            t_anneal1: 20.0,
            t_lock1: 5.0,
            t_relax: 5.0,
            t_anneal2: 20.0,
            t_lock2: 5.0,
            sigma_relax: 0.5,
            lock_tolerance: 0.15,
        }
    }
}

impl StagePlan {
    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("t_init", self.t_init),
            ("t_anneal1", self.t_anneal1),
            ("t_lock1", self.t_lock1),
            ("t_relax", self.t_relax),
            ("t_anneal2", self.t_anneal2),
            ("t_lock2", self.t_lock2),
            ("sigma_relax", self.sigma_relax),
        ];
        for (name, value) in durations {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and non-negative, got {value}")));
            }
        }
        if !(self.lock_tolerance > 0.0 && self.lock_tolerance < PI / 2.0) {
            return Err(Error::InvalidParams(format!(
                "lock_tolerance must lie in (0, π/2), got {}",
                self.lock_tolerance
            )));
        }
        Ok(())
    }

    /// Total simulated time of a run with `stages` binarization stages.
    pub fn total_time(&self, stages: u32) -> f64 {
        let first = self.t_init + self.t_anneal1 + self.t_lock1;
        let rest = self.t_relax + self.t_anneal2 + self.t_lock2;
        first + rest * stages.saturating_sub(1) as f64
    }
}

/// Outcome of one staged run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schema: String,
    pub seed: u64,
    /// Number of colors `K = 2^m`.
    pub colors: usize,
    /// Stage-1 max-cut labels.
    pub partition: Vec<u8>,
    pub coloring: Vec<usize>,
    pub cut_accuracy: f64,
    pub coloring_accuracy: f64,
    pub cut_baseline: CutBaseline,
    /// Whether every phase sat within tolerance of its target at the end of each lock window.
    pub stage_locked: Vec<bool>,
    /// Seconds of wall-clock time; left out of files unless timing is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl SolveResult {
    pub fn all_locked(&self) -> bool {
        self.stage_locked.iter().all(|&l| l)
    }

    /// Recomputes `coloring_accuracy` from the stored coloring.
    pub fn recompute_accuracy(&self, graph: &Graph) -> Result<f64> {
        metrics::coloring_accuracy(graph, &self.coloring)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Index of the nearest of `k` equally spaced phases `2πj/k`; exact ties go
/// to the smaller index.
pub fn quantize_phase(theta: f64, k: usize) -> usize {
    assert!(k >= 2, "quantize_phase needs at least two levels");
    let x = theta.rem_euclid(TAU) / (TAU / k as f64);
    let lo = (x.floor() as usize).min(k - 1);
    let hi = (lo + 1) % k;
    let frac = x - lo as f64;
    if frac < 0.5 {
        lo
    } else if frac > 0.5 {
        hi
    } else {
        lo.min(hi)
    }
}

/// Binary labels `quantize_phase(θ, 2)` and whether every phase is within
/// `tolerance` of its target `label·π`.
pub fn partition_from_phases(phases: &[f64], tolerance: f64) -> Result<(Vec<u8>, bool)> {
    if !(tolerance > 0.0 && tolerance < PI / 2.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, π/2), got {tolerance}")));
    }
    let labels: Vec<u8> = phases.iter().map(|&t| quantize_phase(t, 2) as u8).collect();
    let locked = phases
        .iter()
        .zip(&labels)
        .all(|(&t, &l)| circular_distance(t, l as f64 * PI) <= tolerance);
    Ok((labels, locked))
}

/// Couplings stay on only inside a label group.
pub fn gate_couplings(graph: &Graph, labels: &[u8]) -> Result<CouplingGate> {
    check_len("labels", graph.node_count(), labels.len())?;
    Ok(CouplingGate {
        active: graph.edges().iter().map(|e| labels[e.u] == labels[e.v]).collect(),
    })
}

/// SHIL_1 on label-0 nodes, SHIL_2 on label-1 nodes.
pub fn assign_shil(labels: &[u8]) -> Result<ShilConfig> {
    let selects = labels
        .iter()
        .map(|&l| match l {
            0 => Ok(ShilSelect::Shil1),
            1 => Ok(ShilSelect::Shil2),
            other => Err(Error::InvalidArgument(format!("label must be binary, got {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShilConfig::from_selects(&selects))
}

/// Runs staged solves on one graph with fixed parameters.
#[derive(Debug, Clone)]
pub struct Solver<'g> {
    graph: &'g Graph,
    params: DynamicsParams,
    plan: StagePlan,
    baseline: CutBaseline,
}

/// Receives the state at the end of every integration step and the name of
/// the current window.
pub trait StageObserver {
    fn observe(&mut self, window: Window, state: &PhaseState);
}

impl<F: FnMut(Window, &PhaseState)> StageObserver for F {
    fn observe(&mut self, window: Window, state: &PhaseState) {
        self(window, state)
    }
}

/// One window of the staged protocol. `stage` counts binarization stages from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Init,
    Relax { stage: u32 },
    Anneal { stage: u32 },
    Lock { stage: u32 },
}

struct NoObserver;

impl StageObserver for NoObserver {
    fn observe(&mut self, _: Window, _: &PhaseState) {}
}

impl<'g> Solver<'g> {
    /// Validates the inputs and computes the stage-1 cut baseline.
    pub fn new(graph: &'g Graph, params: DynamicsParams, plan: StagePlan) -> Result<Self> {
        let baseline = CutBaseline::for_graph(graph)?;
        Self::with_baseline(graph, params, plan, baseline)
    }

    pub fn with_baseline(graph: &'g Graph, params: DynamicsParams, plan: StagePlan, baseline: CutBaseline) -> Result<Self> {
        if graph.node_count() == 0 {
            return Err(Error::InvalidArgument("graph has no nodes".into()));
        }
        params.validate(graph)?;
        params.with_sigma(plan.sigma_relax).validate(graph)?;
        plan.validate()?;
        Ok(Solver {
            graph,
            params,
            plan,
            baseline,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    pub fn plan(&self) -> &StagePlan {
        &self.plan
    }

    pub fn baseline(&self) -> &CutBaseline {
        &self.baseline
    }

    /// The two-stage 4-coloring protocol, written out window by window.
    pub fn solve_4coloring(&self, seed: u64) -> Result<SolveResult> {
        self.solve_4coloring_observed(seed, &mut NoObserver)
    }

    pub fn solve_4coloring_observed(&self, seed: u64, observer: &mut dyn StageObserver) -> Result<SolveResult> {
        let started = Instant::now();
        let graph = self.graph;
        let n = graph.node_count();
        let plan = &self.plan;
        let noise = PhaseNoise::new(seed);
        let relax_params = self.params.with_sigma(plan.sigma_relax);
        let mut state = random_init(n, &mut ChaCha8Rng::seed_from_u64(seed));

        let all_on = CouplingGate::all_on(graph);
        let all_off = CouplingGate::all_off(graph);
        let no_shil = ShilConfig::off(n);

        // (a) free drift, then coupled annealing
        self.run(&mut state, Window::Init, plan.t_init, &all_off, &no_shil, self.params, &noise, observer)?;
        let anneal = Window::Anneal { stage: 0 };
        self.run(&mut state, anneal, plan.t_anneal1, &all_on, &no_shil, self.params, &noise, observer)?;

        // (b) SHIL_1 on the coupled network, then read out the partition
        let shil1 = ShilConfig::uniform(n, ShilSelect::Shil1.lock_phase());
        self.run(&mut state, Window::Lock { stage: 0 }, plan.t_lock1, &all_on, &shil1, self.params, &noise, observer)?;
        let (partition, locked1) = partition_from_phases(&state.phases, plan.lock_tolerance)?;

        // (c) everything off, jitter re-randomizes the phases
        self.run(&mut state, Window::Relax { stage: 1 }, plan.t_relax, &all_off, &no_shil, relax_params, &noise, observer)?;

        // (d) anneal the two groups independently
        let gate = gate_couplings(graph, &partition)?;
        self.run(&mut state, Window::Anneal { stage: 1 }, plan.t_anneal2, &gate, &no_shil, self.params, &noise, observer)?;

        // (e) SHIL_1 / SHIL_2 per group, read out four phases
        let shil = assign_shil(&partition)?;
        self.run(&mut state, Window::Lock { stage: 1 }, plan.t_lock2, &gate, &shil, self.params, &noise, observer)?;
        let coloring: Vec<usize> = state.phases.iter().map(|&t| quantize_phase(t, 4)).collect();
        let relative: Vec<f64> = state.phases.iter().zip(&shil.lock).map(|(t, o)| t - o).collect();
        let (_, locked2) = partition_from_phases(&relative, plan.lock_tolerance)?;

        self.finish(seed, 4, partition, coloring, vec![locked1, locked2], started)
    }

    /// `2^stages`-coloring by recursive binarization.
    ///
    /// Stage `t` (from 0) splits every current group with a SHIL whose lock
    /// phase is the group's running offset `π Σ_{s<t} b_s / 2^{s+1}`, where
    /// `b_s` are the node's earlier labels. Couplings are on only between
    /// nodes that agree on every earlier label. After the last stage the
    /// phases sit on `2^stages` equally spaced values, and the color is the
    /// nearest one. For `stages = 2` this is exactly [`Solver::solve_4coloring`].
    pub fn solve_kcoloring(&self, stages: u32, seed: u64) -> Result<SolveResult> {
        self.solve_kcoloring_observed(stages, seed, &mut NoObserver)
    }

    pub fn solve_kcoloring_observed(&self, stages: u32, seed: u64, observer: &mut dyn StageObserver) -> Result<SolveResult> {
        if stages == 0 || stages > MAX_STAGES {
            return Err(Error::InvalidArgument(format!("stages must be in 1..={MAX_STAGES}, got {stages}")));
        }
        let started = Instant::now();
        let graph = self.graph;
        let n = graph.node_count();
        let plan = &self.plan;
        let colors = 1usize << stages;
        let noise = PhaseNoise::new(seed);
        let relax_params = self.params.with_sigma(plan.sigma_relax);
        let mut state = random_init(n, &mut ChaCha8Rng::seed_from_u64(seed));

        let all_off = CouplingGate::all_off(graph);
        let no_shil = ShilConfig::off(n);
        // Running lock offset and group id per node.
        let mut offset = vec![0.0f64; n];
        let mut group = vec![0u64; n];
        let mut partition = Vec::new();
        let mut stage_locked = Vec::with_capacity(stages as usize);

        for stage in 0..stages {
            let gate = CouplingGate {
                active: graph.edges().iter().map(|e| group[e.u] == group[e.v]).collect(),
            };
            let (lead, lead_window, lead_params, anneal_time, lock_time) = if stage == 0 {
                (plan.t_init, Window::Init, self.params, plan.t_anneal1, plan.t_lock1)
            } else {
                (plan.t_relax, Window::Relax { stage }, relax_params, plan.t_anneal2, plan.t_lock2)
            };
            self.run(&mut state, lead_window, lead, &all_off, &no_shil, lead_params, &noise, observer)?;
            self.run(&mut state, Window::Anneal { stage }, anneal_time, &gate, &no_shil, self.params, &noise, observer)?;
            let shil = ShilConfig {
                enabled: vec![true; n],
                lock: offset.clone(),
            };
            self.run(&mut state, Window::Lock { stage }, lock_time, &gate, &shil, self.params, &noise, observer)?;

            let relative: Vec<f64> = state.phases.iter().zip(&offset).map(|(t, o)| t - o).collect();
            let (labels, locked) = partition_from_phases(&relative, plan.lock_tolerance)?;
            stage_locked.push(locked);
            let step = PI / (1u64 << (stage + 1)) as f64;
            for i in 0..n {
                offset[i] += labels[i] as f64 * step;
                group[i] = group[i] << 1 | labels[i] as u64;
            }
            if stage == 0 {
                partition = labels;
            }
        }

        let coloring: Vec<usize> = state.phases.iter().map(|&t| quantize_phase(t, colors)).collect();
        self.finish(seed, colors, partition, coloring, stage_locked, started)
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        state: &mut PhaseState,
        window: Window,
        duration: f64,
        gate: &CouplingGate,
        shil: &ShilConfig,
        params: DynamicsParams,
        noise: &PhaseNoise,
        observer: &mut dyn StageObserver,
    ) -> Result<()> {
        let mut integrator = Integrator::new(self.graph, gate, shil, params)?;
        integrator.evolve_observed(state, duration, noise, &mut |s| observer.observe(window, s))
    }

    fn finish(
        &self,
        seed: u64,
        colors: usize,
        partition: Vec<u8>,
        coloring: Vec<usize>,
        stage_locked: Vec<bool>,
        started: Instant,
    ) -> Result<SolveResult> {
        let cut_accuracy = self.baseline.accuracy(self.graph, &partition)?;
        let coloring_accuracy = metrics::coloring_accuracy(self.graph, &coloring)?;
        Ok(SolveResult {
            schema: SOLVE_RESULT_SCHEMA.to_string(),
            seed,
            colors,
            partition,
            coloring,
            cut_accuracy,
            coloring_accuracy,
            cut_baseline: self.baseline.clone(),
            stage_locked,
            wall_time: Some(started.elapsed().as_secs_f64()),
        })
    }
}

pub fn solve_4coloring(graph: &Graph, params: &DynamicsParams, plan: &StagePlan, seed: u64) -> Result<SolveResult> {
    Solver::new(graph, *params, *plan)?.solve_4coloring(seed)
}

pub fn solve_kcoloring(graph: &Graph, stages: u32, params: &DynamicsParams, plan: &StagePlan, seed: u64) -> Result<SolveResult> {
    Solver::new(graph, *params, *plan)?.solve_kcoloring(stages, seed)
}
