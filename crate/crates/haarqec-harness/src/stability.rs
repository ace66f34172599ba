//! Stability of the shifted basis under isometrization.
//!
//! For a Gaussian draw `G`, write `delta_X` for the isometry defect of the
//! shifted matrix built from `G` and `delta_Y` for the defect built from
//! `isometrize(G)`. Whenever `delta_X < 1`, the second is bounded by
//! `2 delta_X / (1 - delta_X)`; trials with `delta_X >= 0.9` are skipped
//! (the bound degenerates as `delta_X` approaches 1) and counted. Any
//! violation indicates an implementation bug, not statistical bad luck.

use haarqec::codes::{sample_gaussian, shifted_basis_from_matrix};
use haarqec::errorset::UnitaryErrorSet;
use haarqec::linalg::{approx_isometry_report, isometrize};
use haarqec::seeding::task_seed;
use haarqec::Result;
use serde::Serialize;

const SKIP_THRESHOLD: f64 = 0.9;
const SLACK: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub n_dim: usize,
    pub code_dim: usize,
    pub set_size: usize,
    pub trials: usize,
    pub checked: usize,
    pub skipped_high_delta: usize,
    pub violations: usize,
    pub max_delta_x: f64,
    /// Worst observed `delta_Y - bound`; negative means margin to spare.
    pub worst_gap: f64,
}

pub fn isometrize_stability_run(
    set: &UnitaryErrorSet,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let n = set.dim();
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut violations = 0usize;
    let mut max_delta_x = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;

    for t in 0..trials {
        let g = sample_gaussian(n, k, task_seed(seed, t as u64))?;
        let x = shifted_basis_from_matrix(&g, set)?;
        let delta_x = approx_isometry_report(&x)?.delta;
        max_delta_x = max_delta_x.max(delta_x);
        if delta_x >= SKIP_THRESHOLD {
            skipped += 1;
            continue;
        }
        let v = isometrize(&g)?;
        let y = shifted_basis_from_matrix(&v, set)?;
        let delta_y = approx_isometry_report(&y)?.delta;
        let bound = 2.0 * delta_x / (1.0 - delta_x) + SLACK;
        let gap = delta_y - bound;
        worst_gap = worst_gap.max(gap);
        if gap > 0.0 {
            violations += 1;
        }
        checked += 1;
    }

    Ok(StabilityReport {
        n_dim: n,
        code_dim: k,
        set_size: set.len(),
        trials,
        checked,
        skipped_high_delta: skipped,
        violations,
        max_delta_x,
        worst_gap,
    })
}
