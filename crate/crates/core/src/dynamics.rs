//! Stochastic phase dynamics of coupled oscillators.
//!
//! The machine is modeled in the phase-reduced picture: every oscillator is a
//! phase `θ_i` relative to a shared carrier, and the circuit-level behavior is
//! replaced by the gradient flow of
//!
//! ```text
//! E(θ) = K_c Σ_{(i,j) gated on} J_ij cos(θ_i − θ_j) − (K_s/2) Σ_{i: SHIL on} cos(2(θ_i − φ_i))
//! ```
//!
//! plus white phase noise. The coupling term is the vector-Potts energy; the
//! second term is second-harmonic injection locking, whose minima sit at
//! `φ_i` and `φ_i + π`. Integration is Euler–Maruyama with a fixed step:
//!
//! ```text
//! θ_i ← wrap(θ_i + dt·[K_c Σ_j J_ij sin(θ_i − θ_j) − K_s sin(2(θ_i − φ_i))] + σ √dt ξ_i)
//! ```
//!
//! Noise is counter-based: `ξ_i` at step `k` is a pure function of
//! `(seed, node id, k)`, so trajectories do not depend on evaluation order and
//! a subsystem can be replayed with exactly the noise it saw inside the full
//! system.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;

/// Largest allowed `dt · max(K_c · weighted degree, 2 K_s)`.
pub const STABILITY_LIMIT: f64 = 0.5;

/// Maps a phase into `[0, 2π)`.
#[inline]
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub phases: Vec<f64>,
    pub time: f64,
    /// Number of integration steps taken; indexes the noise stream.
    pub tick: u64,
}

impl PhaseState {
    pub fn new(phases: Vec<f64>) -> Self {
        PhaseState {
            phases: phases.into_iter().map(wrap_phase).collect(),
            time: 0.0,
            tick: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Independent uniform phases in `[0, 2π)`.
pub fn random_init<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PhaseState {
    let phases = (0..n).map(|_| wrap_phase(rng.gen::<f64>() * TAU)).collect();
    PhaseState {
        phases,
        time: 0.0,
        tick: 0,
    }
}

/// Per-edge coupling enable (the P_EN signal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGate {
    pub active: Vec<bool>,
}

impl CouplingGate {
    pub fn all_on(graph: &Graph) -> Self {
        CouplingGate { active: vec![true; graph.edge_count()] }
    }

    pub fn all_off(graph: &Graph) -> Self {
        CouplingGate { active: vec![false; graph.edge_count()] }
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Which SHIL drives each oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShilSelect {
    /// Locks to `{0, π}`.
    Shil1,
    /// The double-frequency signal shifted by 180°; locks to `{π/2, 3π/2}`.
    Shil2,
}

impl ShilSelect {
    pub fn lock_phase(self) -> f64 {
        match self {
            ShilSelect::Shil1 => 0.0,
            ShilSelect::Shil2 => FRAC_PI_2,
        }
    }
}

/// Per-node SHIL enable and lock phase `φ_i`.
///
/// `lock` holds the phase offset directly so that staged solvers with more
/// than two SHILs can use arbitrary offsets; [`ShilSelect`] covers the
/// two-signal case.
#[derive(Debug, Clone, PartialEq)]
pub struct ShilConfig {
    pub enabled: Vec<bool>,
    pub lock: Vec<f64>,
}

impl ShilConfig {
    pub fn off(n: usize) -> Self {
        ShilConfig {
            enabled: vec![false; n],
            lock: vec![0.0; n],
        }
    }

    /// Every node enabled with the same lock phase.
    pub fn uniform(n: usize, lock: f64) -> Self {
        ShilConfig {
            enabled: vec![true; n],
            lock: vec![lock; n],
        }
    }

    pub fn from_selects(selects: &[ShilSelect]) -> Self {
        ShilConfig {
            enabled: vec![true; selects.len()],
            lock: selects.iter().map(|s| s.lock_phase()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.enabled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.enabled.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Coupling strength `K_c` (1/time).
    pub coupling: f64,
    /// SHIL strength `K_s` (1/time).
    pub shil: f64,
    /// Phase noise amplitude `σ` (rad/√time).
    pub sigma: f64,
    /// Integration step.
    pub dt: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            coupling: 1.0,
            shil: 2.5,
            sigma: 0.05,
            dt: 0.01,
        }
    }
}

impl DynamicsParams {
    /// Checks signs and the explicit-Euler stability guard for `graph`.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let fields = [
            ("coupling", self.coupling),
            ("shil", self.shil),
            ("sigma", self.sigma),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and non-negative, got {value}")));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        let stiffness = (self.coupling * graph.max_weighted_degree()).max(2.0 * self.shil);
        if self.dt * stiffness >= STABILITY_LIMIT {
            return Err(Error::InvalidParams(format!(
                "dt·max(K_c·degree, 2·K_s) = {:.4} must stay below {STABILITY_LIMIT}",
                self.dt * stiffness
            )));
        }
        Ok(())
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        DynamicsParams { sigma, ..self }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based Gaussian phase noise.
///
/// `gaussian(i, k)` depends only on the seed, the node's id and the step
/// index. Ids default to the node index; [`PhaseNoise::remapped`] lets a
/// subsystem reuse the ids of the nodes it was extracted from.
#[derive(Debug, Clone)]
pub struct PhaseNoise {
    key: u64,
    ids: Option<Arc<[u64]>>,
}

impl PhaseNoise {
    pub fn new(seed: u64) -> Self {
        PhaseNoise {
            key: splitmix64(seed ^ 0x6E6F_6973_6521_u64),
            ids: None,
        }
    }

    /// Same stream, with local node `k` drawing the samples of global node `ids[k]`.
    pub fn remapped(&self, ids: &[usize]) -> Self {
        PhaseNoise {
            key: self.key,
            ids: Some(ids.iter().map(|&i| i as u64).collect()),
        }
    }

    #[inline]
    fn id(&self, node: usize) -> u64 {
        match &self.ids {
            Some(ids) => ids[node],
            None => node as u64,
        }
    }

    /// Standard normal sample for `node` at step `tick` (Box–Muller).
    #[inline]
    pub fn gaussian(&self, node: usize, tick: u64) -> f64 {
        let h = splitmix64(self.key ^ splitmix64(self.id(node) ^ splitmix64(tick)));
        let h2 = splitmix64(h);
        let u1 = ((h >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = (h2 >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}

/// A validated integration setup: graph, gate, SHIL and parameters.
pub struct Integrator<'a> {
    graph: &'a Graph,
    couplings: Vec<(usize, usize, f64)>,
    shil_nodes: Vec<(usize, f64)>,
    params: DynamicsParams,
    drift: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(graph: &'a Graph, gate: &CouplingGate, shil: &ShilConfig, params: DynamicsParams) -> Result<Self> {
        check_len("coupling gate", graph.edge_count(), gate.active.len())?;
        check_len("SHIL enable", graph.node_count(), shil.enabled.len())?;
        check_len("SHIL lock phase", graph.node_count(), shil.lock.len())?;
        params.validate(graph)?;
        let couplings = graph
            .edges()
            .iter()
            .zip(&gate.active)
            .filter(|(_, &on)| on)
            .map(|(e, _)| (e.u, e.v, params.coupling * e.weight))
            .filter(|&(_, _, k)| k != 0.0)
            .collect();
        let shil_nodes = if params.shil > 0.0 {
            (0..graph.node_count())
                .filter(|&i| shil.enabled[i])
                .map(|i| (i, shil.lock[i]))
                .collect()
        } else {
            Vec::new()
        };
        Ok(Integrator {
            graph,
            couplings,
            shil_nodes,
            params,
            drift: vec![0.0; graph.node_count()],
        })
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    /// Advances `state` by one Euler–Maruyama step.
    pub fn step(&mut self, state: &mut PhaseState, noise: &PhaseNoise) -> Result<()> {
        check_len("phase state", self.graph.node_count(), state.len())?;
        self.step_unchecked(state, noise);
        Ok(())
    }

    fn step_unchecked(&mut self, state: &mut PhaseState, noise: &PhaseNoise) {
        let theta = &state.phases;
        let drift = &mut self.drift;
        drift.iter_mut().for_each(|d| *d = 0.0);
        for &(u, v, k) in &self.couplings {
            let s = k * (theta[u] - theta[v]).sin();
            drift[u] += s;
            drift[v] -= s;
        }
        let ks = self.params.shil;
        for &(i, lock) in &self.shil_nodes {
            drift[i] -= ks * (2.0 * (theta[i] - lock)).sin();
        }

        let dt = self.params.dt;
        let diffusion = self.params.sigma * dt.sqrt();
        let tick = state.tick;
        for (i, (theta_i, d)) in state.phases.iter_mut().zip(drift.iter()).enumerate() {
            let mut next = *theta_i + dt * d;
            if diffusion > 0.0 {
                next += diffusion * noise.gaussian(i, tick);
            }
            *theta_i = wrap_phase(next);
        }
        state.time += dt;
        state.tick += 1;
    }

    /// Runs [`steps_for`] steps, calling `observe` after each one.
    pub fn evolve_observed(
        &mut self,
        state: &mut PhaseState,
        duration: f64,
        noise: &PhaseNoise,
        observe: &mut dyn FnMut(&PhaseState),
    ) -> Result<()> {
        check_len("phase state", self.graph.node_count(), state.len())?;
        for _ in 0..steps_for(duration, self.params.dt)? {
            self.step_unchecked(state, noise);
            observe(state);
        }
        Ok(())
    }

    pub fn evolve(&mut self, state: &mut PhaseState, duration: f64, noise: &PhaseNoise) -> Result<()> {
        self.evolve_observed(state, duration, noise, &mut |_| {})
    }
}

/// `⌈duration / dt⌉`, treating ratios within 1e-9 of an integer as exact.
pub fn steps_for(duration: f64, dt: f64) -> Result<u64> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be non-negative, got {duration}")));
    }
    let ratio = duration / dt;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() < 1e-9 { nearest } else { ratio.ceil() };
    Ok(steps as u64)
}

/// One integration step.
pub fn step(
    state: &mut PhaseState,
    graph: &Graph,
    gate: &CouplingGate,
    shil: &ShilConfig,
    params: &DynamicsParams,
    noise: &PhaseNoise,
) -> Result<()> {
    Integrator::new(graph, gate, shil, *params)?.step(state, noise)
}

/// Integrates for `⌈duration / dt⌉` steps.
pub fn evolve(
    state: &mut PhaseState,
    duration: f64,
    graph: &Graph,
    gate: &CouplingGate,
    shil: &ShilConfig,
    params: &DynamicsParams,
    noise: &PhaseNoise,
) -> Result<()> {
    Integrator::new(graph, gate, shil, *params)?.evolve(state, duration, noise)
}

/// Samples a trajectory every `every` steps for CSV export.
#[derive(Debug, Clone)]
pub struct TrajectoryRecorder {
    every: u64,
    rows: Vec<(f64, Vec<f64>)>,
}

impl TrajectoryRecorder {
    pub fn new(every: u64) -> Self {
        TrajectoryRecorder {
            every: every.max(1),
            rows: Vec::new(),
        }
    }

    pub fn record(&mut self, state: &PhaseState) {
        if state.tick.is_multiple_of(self.every) {
            self.rows.push((state.time, state.phases.clone()));
        }
    }

    pub fn rows(&self) -> &[(f64, Vec<f64>)] {
        &self.rows
    }

    /// CSV with header `time,theta_0,...,theta_{n-1}`.
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |(_, p)| p.len());
        let mut out = String::from("time");
        for i in 0..n {
            write!(out, ",theta_{i}").unwrap();
        }
        out.push('\n');
        for (time, phases) in &self.rows {
            write!(out, "{time:.6}").unwrap();
            for p in phases {
                write!(out, ",{p:.9}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}
