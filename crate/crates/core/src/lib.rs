//! Phase-domain simulator of a multi-stage coupled-oscillator Potts machine.
//!
//! Graph coloring with `2^m` colors is solved as a sequence of max-cut
//! problems on a network of coupled phase oscillators. Each stage anneals
//! the coupled phases, binarizes them with second-harmonic injection locking
//! (SHIL), and uses the readout to cut the couplings between the two groups
//! before the next stage. Phase-shifted SHIL signals place every group on
//! its own pair of phases, so the final phases encode the colors directly.
//!
//! The oscillators are modeled in the phase-reduced (Kuramoto + SHIL)
//! picture rather than at circuit level; see [`dynamics`].
//!
//! Modules:
//! - [`graph`]: graphs, King's-graph benchmarks, DIMACS/JSON I/O
//! - [`hamiltonian`]: Ising, phase, Potts and one-hot coloring energies
//! - [`dynamics`]: stochastic phase integrator
//! - [`scheduler`]: the staged divide-and-color solver
//! - [`oracle`]: exact coloring, brute-force max-cut, King's-graph baselines
//! - [`metrics`]: accuracy, Hamming distance, batch statistics
//! - [`batch`]: seed derivation and (optionally parallel) batches of runs
//!
//! ```
//! use phasepotts::{aggregate, kings_graph, solve_batch, BatchSpec, DynamicsParams, Solver, StagePlan};
//!
//! let g = kings_graph(4)?;
//! let solver = Solver::new(&g, DynamicsParams::default(), StagePlan::default())?;
//! let runs = solve_batch(&solver, &BatchSpec { iterations: 4, ..Default::default() })?;
//! let stats = aggregate(&runs, &g)?;
//! assert!(stats.best_accuracy > 0.9);
//! # Ok::<(), phasepotts::Error>(())
//! ```

pub mod batch;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod hamiltonian;
pub mod metrics;
pub mod oracle;
pub mod scheduler;

pub use batch::{derive_seed, solve_batch, BatchSpec, Execution};
pub use dynamics::{CouplingGate, DynamicsParams, PhaseNoise, PhaseState, ShilConfig, ShilSelect};
pub use error::{Error, Result};
pub use graph::{kings_graph, load_graph, save_graph, Graph, GraphFormat};
pub use metrics::{aggregate, RunStats};
pub use oracle::CutBaseline;
pub use scheduler::{solve_4coloring, solve_kcoloring, SolveResult, Solver, StagePlan};
