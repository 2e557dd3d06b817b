//! Multi-threaded sweep evaluation.

use epitrigger_core::{CellOutcome, SweepPlan, SweepResult};
use rayon::prelude::*;
use rayon::ThreadPoolBuildError;

/// Evaluates every cell of `plan` on `workers` threads. Cells are written
/// back by index, so the result does not depend on the worker count.
pub fn run_sweep_parallel(
    plan: &SweepPlan,
    workers: usize,
) -> Result<SweepResult, ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let cells: Vec<CellOutcome> = pool.install(|| {
        (0..plan.cell_count())
            .into_par_iter()
            .map(|i| plan.evaluate(i))
            .collect()
    });
    Ok(plan.assemble(cells))
}
