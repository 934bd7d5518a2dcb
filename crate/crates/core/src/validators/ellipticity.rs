//! Rank-one convexity over a log-stretch grid and two direction sets.
//!
//! For each state the contraction `B_a = Σ a_i a_k A_i·k·` is formed once
//! per direction `a`, so every pair costs a 3×3 quadratic form `bᵀ B_a b`.
//! States are scanned in fixed-size chunks evaluated in parallel; the first
//! negative value in sample order `(state, a, b)` is the witness, so the
//! verdict does not depend on the thread count.

use rayon::prelude::*;

use super::{ConstraintId, ConstraintVerdict, ToleranceConfig, Witness};
use crate::mechanics::{
    ellipticity_grid, fibonacci_hemisphere, fibonacci_hemisphere_with_phase,
    ELLIPTICITY_DIRECTION_PHASE_B,
};
use crate::model::ConstitutiveModel;
use crate::DeformationGradient;

/// Grid states evaluated per parallel batch.
pub const ELLIPTICITY_CHUNK: usize = 64;

struct StateScan {
    min: f64,
    /// `(a index, b index, value)` of the first non-positive-definite pair.
    first_negative: Option<(usize, usize, f64)>,
}

fn scan_state(
    model: &ConstitutiveModel<f64>,
    f: &DeformationGradient,
    a_dirs: &[[f64; 3]],
    b_dirs: &[[f64; 3]],
) -> StateScan {
    let tensor = model.elasticity_tensor(f);
    let mut min = f64::INFINITY;
    for (ai, a) in a_dirs.iter().enumerate() {
        let m = tensor.contract_left(a);
        for (bi, b) in b_dirs.iter().enumerate() {
            let mut v = 0.0;
            for j in 0..3 {
                v += b[j] * (m[j][0] * b[0] + m[j][1] * b[1] + m[j][2] * b[2]);
            }
            if !(v >= 0.0) {
                return StateScan {
                    min: v,
                    first_negative: Some((ai, bi, v)),
                };
            }
            min = min.min(v);
        }
    }
    StateScan {
        min,
        first_negative: None,
    }
}

/// Passes when `(a⊗b) : A : (a⊗b) ≥ 0` on every sample; `worst` and the
/// `min_form` metric hold the smallest value seen.
pub fn check_ellipticity(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let id = ConstraintId::Ellipticity;
    let grid = ellipticity_grid(tol.half_width, tol.grid_n);
    let a_set = fibonacci_hemisphere::<f64>(tol.n_dirs).directions;
    let b_set = fibonacci_hemisphere_with_phase::<f64>(tol.n_dirs, ELLIPTICITY_DIRECTION_PHASE_B).directions;
    let per_state = a_set.len() * b_set.len();
    let mut min = f64::INFINITY;
    let mut samples = 0;
    for chunk in grid.chunks(ELLIPTICITY_CHUNK) {
        let scans: Vec<StateScan> = chunk
            .par_iter()
            .map(|f| scan_state(model, f, &a_set, &b_set))
            .collect();
        for (f, scan) in chunk.iter().zip(scans) {
            if let Some((ai, bi, value)) = scan.first_negative {
                samples += ai * b_set.len() + bi + 1;
                return ConstraintVerdict::fail(
                    id,
                    value,
                    Witness::RankOne {
                        f: *f.tensor(),
                        a: a_set[ai],
                        b: b_set[bi],
                        value,
                    },
                    samples,
                )
                .with_metric("min_form", value);
            }
            samples += per_state;
            min = min.min(scan.min);
        }
    }
    ConstraintVerdict::pass(id, min, samples)
        .with_metric("min_form", min)
        .with_metric("grid_states", grid.len() as f64)
}
