//! Energy functions: Ising, oscillator phase (XY / vector Potts), standard
//! Potts, the one-hot Ising encoding of N-coloring, and the composite energy
//! descended by the phase dynamics.

use crate::dynamics::{CouplingGate, DynamicsParams, PhaseState, ShilConfig};
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;

/// N-valued spins, `values[i] ∈ {0..arity-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinAssignment {
    values: Vec<usize>,
    arity: usize,
}

impl SpinAssignment {
    pub fn new(values: Vec<usize>, arity: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidArgument(format!("spin arity must be at least 2, got {arity}")));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= arity) {
            return Err(Error::InvalidArgument(format!("spin value {bad} outside 0..{arity}")));
        }
        Ok(SpinAssignment { values, arity })
    }

    /// Ising spins: `+1 ↦ 0`, `−1 ↦ 1`.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let values = signs
            .iter()
            .map(|&s| match s {
                1 => Ok(0),
                -1 => Ok(1),
                other => Err(Error::InvalidArgument(format!("Ising spin must be ±1, got {other}"))),
            })
            .collect::<Result<_>>()?;
        Ok(SpinAssignment { values, arity: 2 })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `σ_i ∈ {+1, −1}` for a two-valued assignment.
    pub fn sign(&self, i: usize) -> f64 {
        if self.values[i] == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `n × N` matrix of `{0,1}` bits, row-major. Rows need not be one-hot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotAssignment {
    bits: Vec<u8>,
    nodes: usize,
    colors: usize,
}

impl OneHotAssignment {
    pub fn new(nodes: usize, colors: usize, bits: Vec<u8>) -> Result<Self> {
        check_len("one-hot matrix", nodes * colors, bits.len())?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("one-hot entries must be 0 or 1".into()));
        }
        Ok(OneHotAssignment { bits, nodes, colors })
    }

    /// Proper one-hot encoding of a coloring.
    pub fn from_coloring(coloring: &[usize], colors: usize) -> Result<Self> {
        let mut bits = vec![0u8; coloring.len() * colors];
        for (i, &c) in coloring.iter().enumerate() {
            if c >= colors {
                return Err(Error::InvalidArgument(format!("color {c} outside 0..{colors}")));
            }
            bits[i * colors + c] = 1;
        }
        Ok(OneHotAssignment { bits, nodes: coloring.len(), colors })
    }

    pub fn get(&self, node: usize, color: usize) -> u8 {
        self.bits[node * self.colors + color]
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn colors(&self) -> usize {
        self.colors
    }
}

/// `Σ J_ij σ_i σ_j` with no external field.
pub fn ising_energy(graph: &Graph, spins: &SpinAssignment) -> Result<f64> {
    check_len("spins", graph.node_count(), spins.len())?;
    if spins.arity() != 2 {
        return Err(Error::InvalidArgument("Ising energy needs two-valued spins".into()));
    }
    Ok(graph.edges().iter().map(|e| e.weight * spins.sign(e.u) * spins.sign(e.v)).sum())
}

/// `Σ J_ij cos(θ_i − θ_j)`; covers both the two-phase Ising and the N-phase
/// vector-Potts readings.
pub fn phase_energy(graph: &Graph, phases: &[f64]) -> Result<f64> {
    check_len("phases", graph.node_count(), phases.len())?;
    Ok(graph
        .edges()
        .iter()
        .map(|e| e.weight * (phases[e.u] - phases[e.v]).cos())
        .sum())
}

/// `Σ J_ij δ(s_i, s_j)`.
pub fn potts_energy(graph: &Graph, spins: &[usize]) -> Result<f64> {
    check_len("spins", graph.node_count(), spins.len())?;
    Ok(graph
        .edges()
        .iter()
        .filter(|e| spins[e.u] == spins[e.v])
        .map(|e| e.weight)
        .sum())
}

/// `J Σ_i (1 − Σ_k s_ik)² + J Σ_{(i,j)∈E} Σ_k s_ik s_jk`.
///
/// Both terms share the same scale, so the minimum 0 is reached exactly by
/// proper one-hot colorings.
pub fn ising_coloring_energy(graph: &Graph, onehot: &OneHotAssignment, scale: f64) -> Result<f64> {
    ising_coloring_energy_weighted(graph, onehot, scale, scale)
}

/// [`ising_coloring_energy`] with separate weights for the one-color
/// constraint and the edge-conflict term.
pub fn ising_coloring_energy_weighted(
    graph: &Graph,
    onehot: &OneHotAssignment,
    assignment_weight: f64,
    conflict_weight: f64,
) -> Result<f64> {
    check_len("one-hot rows", graph.node_count(), onehot.nodes())?;
    let colors = onehot.colors();
    let assignment: f64 = (0..onehot.nodes())
        .map(|i| {
            let row: i64 = (0..colors).map(|k| onehot.get(i, k) as i64).sum();
            ((1 - row) * (1 - row)) as f64
        })
        .sum();
    let conflicts: f64 = graph
        .edges()
        .iter()
        .map(|e| (0..colors).map(|k| (onehot.get(e.u, k) * onehot.get(e.v, k)) as f64).sum::<f64>())
        .sum();
    Ok(assignment_weight * assignment + conflict_weight * conflicts)
}

/// The energy whose negative gradient is the deterministic part of the
/// phase dynamics:
/// `K_c Σ_{gated on} J_ij cos(θ_i − θ_j) − (K_s/2) Σ_{SHIL on} cos(2(θ_i − φ_i))`.
pub fn lyapunov_energy(
    graph: &Graph,
    state: &PhaseState,
    gate: &CouplingGate,
    shil: &ShilConfig,
    params: &DynamicsParams,
) -> Result<f64> {
    let theta = &state.phases;
    check_len("phases", graph.node_count(), theta.len())?;
    check_len("coupling gate", graph.edge_count(), gate.active.len())?;
    check_len("SHIL enable", graph.node_count(), shil.enabled.len())?;
    check_len("SHIL lock phase", graph.node_count(), shil.lock.len())?;
    let coupling: f64 = graph
        .edges()
        .iter()
        .zip(&gate.active)
        .filter(|(_, &on)| on)
        .map(|(e, _)| e.weight * (theta[e.u] - theta[e.v]).cos())
        .sum();
    let locking: f64 = (0..graph.node_count())
        .filter(|&i| shil.enabled[i])
        .map(|i| (2.0 * (theta[i] - shil.lock[i])).cos())
        .sum();
    Ok(params.coupling * coupling - 0.5 * params.shil * locking)
}
