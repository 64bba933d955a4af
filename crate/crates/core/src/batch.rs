//! Batches of independent runs.
//!
//! Every iteration gets its own seed derived from the master seed and its
//! index, so results do not depend on scheduling. With the `parallel`
//! feature the iterations are spread over the rayon pool; without it (or
//! with [`Execution::Sequential`]) they run in order on the calling thread.
//! Output is ordered by iteration index either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scheduler::{SolveResult, Solver};

/// Seed of iteration `index` under `master`: a SplitMix64 step of
/// `master + (index + 1)·γ`, γ = 0x9E3779B97F4A7C15.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy)]
pub struct BatchSpec {
    /// Binarization stages; `2^stages` colors.
    pub stages: u32,
    pub iterations: usize,
    pub master_seed: u64,
    pub execution: Execution,
}

impl Default for BatchSpec {
    fn default() -> Self {
        BatchSpec {
            stages: 2,
            iterations: 40,
            master_seed: 0,
            execution: Execution::default(),
        }
    }
}

fn run_one(solver: &Solver<'_>, spec: &BatchSpec, index: usize) -> Result<SolveResult> {
    let seed = derive_seed(spec.master_seed, index as u64);
    if spec.stages == 2 {
        solver.solve_4coloring(seed)
    } else {
        solver.solve_kcoloring(spec.stages, seed)
    }
}

/// Runs `spec.iterations` independent solves, returned in iteration order.
pub fn solve_batch(solver: &Solver<'_>, spec: &BatchSpec) -> Result<Vec<SolveResult>> {
    if spec.iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    match spec.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..spec.iterations)
            .into_par_iter()
            .map(|i| run_one(solver, spec, i))
            .collect(),
        _ => (0..spec.iterations).map(|i| run_one(solver, spec, i)).collect(),
    }
}
