//! Work-based consistency of stress with a potential.
//!
//! Paths are piecewise linear in the in-plane block `(F11, F12, F21, F22)`;
//! `F33` is recomputed at every step so the work increment uses the full
//! `ΔF`. Four metrics are checked:
//!
//! 1. loop residual `η = |W_N| / Σ|δW_k| ≤ τ_loop` on both closed loops,
//! 2. `P(start) ≈ P(end)` on both loops,
//! 3. `W_A ≈ W_B` at the common end of the two open paths,
//! 4. `|W_k − (Ψ_k − Ψ_0)| ≤ τ_pw·max(|W_k|, |Ψ_k − Ψ_0|)` along both open paths.

use serde::{Deserialize, Serialize};

use super::{approx_eq, ConstraintId, ConstraintVerdict, ToleranceConfig, Witness};
use crate::mechanics::{in_plane_rotation, MechanicsError, Tensor2};
use crate::model::{ConstitutiveModel, ModelError};
use crate::DeformationGradient;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationPath {
    pub name: String,
    /// In-plane blocks `(F11, F12, F21, F22)`.
    pub waypoints: Vec<[f64; 4]>,
    pub steps_per_segment: usize,
    pub closed: bool,
}

impl DeformationPath {
    /// Every discretized state, waypoints included once.
    pub fn states(&self) -> Result<Vec<DeformationGradient>, MechanicsError> {
        let n = self.steps_per_segment;
        let mut out = Vec::with_capacity(n * self.waypoints.len() + 1);
        let [a, b, c, d] = self.waypoints[0];
        out.push(DeformationGradient::plane_strain(a, b, c, d)?);
        for w in self.waypoints.windows(2) {
            for k in 1..=n {
                let t = k as f64 / n as f64;
                let p: [f64; 4] = std::array::from_fn(|i| w[0][i] + t * (w[1][i] - w[0][i]));
                out.push(DeformationGradient::plane_strain(p[0], p[1], p[2], p[3])?);
            }
        }
        Ok(out)
    }
}

fn path(name: &str, waypoints: Vec<[f64; 4]>, n_seg: usize) -> DeformationPath {
    let closed = waypoints.first() == waypoints.last();
    DeformationPath {
        name: name.into(),
        waypoints,
        steps_per_segment: n_seg,
        closed,
    }
}

/// Uniaxial stretch, transverse relaxation to pure shear, then equibiaxial.
pub fn loop_one(n_seg: usize) -> DeformationPath {
    path(
        "loop_1",
        vec![
            [1.0, 0.0, 0.0, 1.0],
            [1.5, 0.0, 0.0, 1.5f64.powf(-0.5)],
            [1.5, 0.0, 0.0, 1.0],
            [1.3, 0.0, 0.0, 1.3],
            [1.0, 0.0, 0.0, 1.0],
        ],
        n_seg,
    )
}

/// Shear, stretch, then an in-plane rotation of the sheared state.
pub fn loop_two(n_seg: usize) -> DeformationPath {
    let sheared = Tensor2::from_rows([[1.4, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let r = in_plane_rotation(std::f64::consts::FRAC_PI_4) * sheared;
    path(
        "loop_2",
        vec![
            [1.0, 0.0, 0.0, 1.0],
            [1.0, 0.5, 0.0, 1.0],
            [1.4, 0.5, 0.0, 1.0],
            [r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]],
            [1.0, 0.0, 0.0, 1.0],
        ],
        n_seg,
    )
}

/// Direct uniaxial stretch to `λ = 2`.
pub fn path_a(n_seg: usize) -> DeformationPath {
    path(
        "path_a",
        vec![[1.0, 0.0, 0.0, 1.0], [2.0, 0.0, 0.0, 0.5f64.sqrt()]],
        n_seg,
    )
}

/// Pure shear to `λ = 2`, then transverse relaxation to the end of path A.
pub fn path_b(n_seg: usize) -> DeformationPath {
    path(
        "path_b",
        vec![
            [1.0, 0.0, 0.0, 1.0],
            [2.0, 0.0, 0.0, 1.0],
            [2.0, 0.0, 0.0, 0.5f64.sqrt()],
        ],
        n_seg,
    )
}

/// Stress, energy and trapezoidal work along a discretized path.
#[derive(Clone, Debug)]
pub struct PathWork {
    pub states: Vec<DeformationGradient>,
    pub stress: Vec<Tensor2<f64>>,
    pub psi: Vec<f64>,
    /// Cumulative work, `work[0] = 0`.
    pub work: Vec<f64>,
    /// `Σ|δW_k|`.
    pub abs_work: f64,
}

impl PathWork {
    /// `|W_N| / Σ|δW_k|` (0 when no work is done at all).
    pub fn loop_residual(&self) -> f64 {
        let w = self.work.last().copied().unwrap_or(0.0).abs();
        if self.abs_work == 0.0 {
            w
        } else {
            w / self.abs_work
        }
    }
}

#[derive(Debug)]
pub(super) enum PathError {
    Mechanics(MechanicsError),
    Model(DeformationGradient, ModelError),
}

pub fn path_work(model: &ConstitutiveModel<f64>, path: &DeformationPath) -> Result<PathWork, String> {
    path_work_inner(model, path).map_err(|e| match e {
        PathError::Mechanics(m) => m.to_string(),
        PathError::Model(_, m) => m.to_string(),
    })
}

fn path_work_inner(model: &ConstitutiveModel<f64>, path: &DeformationPath) -> Result<PathWork, PathError> {
    let states = path.states().map_err(PathError::Mechanics)?;
    let mut stress = Vec::with_capacity(states.len());
    let mut psi = Vec::with_capacity(states.len());
    for f in &states {
        let r = model.stress_response(f).map_err(|e| PathError::Model(*f, e))?;
        stress.push(r.piola);
        psi.push(r.psi);
    }
    let mut work = vec![0.0];
    let mut abs_work = 0.0;
    for k in 0..states.len() - 1 {
        let df = *states[k + 1].tensor() - *states[k].tensor();
        let dw = 0.5 * (stress[k] + stress[k + 1]).double_dot(&df);
        work.push(work[k] + dw);
        abs_work += dw.abs();
    }
    Ok(PathWork {
        states,
        stress,
        psi,
        work,
        abs_work,
    })
}

pub fn check_thermodynamic_consistency(
    model: &ConstitutiveModel<f64>,
    tol: &ToleranceConfig,
) -> ConstraintVerdict {
    let id = ConstraintId::ThermodynamicConsistency;
    let n = tol.n_seg;
    let paths = [loop_one(n), loop_two(n), path_a(n), path_b(n)];
    let mut evals = Vec::with_capacity(4);
    let mut samples = 0;
    for p in &paths {
        match path_work_inner(model, p) {
            Ok(w) => {
                samples += w.states.len();
                evals.push(w);
            }
            Err(PathError::Model(f, e)) => return ConstraintVerdict::errored(id, &f, e, samples),
            Err(PathError::Mechanics(e)) => {
                return ConstraintVerdict::errored(id, &DeformationGradient::identity(), e, samples)
            }
        }
    }
    let eta = [evals[0].loop_residual(), evals[1].loop_residual()];
    let worst = eta[0].max(eta[1]);
    let fail = |metric: u8, p: usize, step: Option<usize>, value: f64| {
        ConstraintVerdict::fail(
            id,
            value,
            Witness::Path {
                path: paths[p].name.clone(),
                metric,
                step,
            },
            samples,
        )
        .with_metric("eta_loop_1", eta[0])
        .with_metric("eta_loop_2", eta[1])
    };

    for (p, &e) in eta.iter().enumerate() {
        if !(e <= tol.tau_loop) {
            return fail(1, p, None, e);
        }
    }

    let mut closure_gap = 0.0f64;
    for (p, w) in evals[..2].iter().enumerate() {
        let (s, e) = (w.stress[0], w.stress[w.stress.len() - 1]);
        for i in 0..3 {
            for j in 0..3 {
                closure_gap = closure_gap.max((s[(i, j)] - e[(i, j)]).abs());
                if !approx_eq(s[(i, j)], e[(i, j)], tol) {
                    return fail(2, p, None, (s[(i, j)] - e[(i, j)]).abs());
                }
            }
        }
    }

    let (wa, wb) = (*evals[2].work.last().unwrap(), *evals[3].work.last().unwrap());
    if !approx_eq(wa, wb, tol) {
        return fail(3, 3, None, (wa - wb).abs());
    }

    let mut pointwise = 0.0f64;
    for p in 2..4 {
        let w = &evals[p];
        for k in 0..w.work.len() {
            let dpsi = w.psi[k] - w.psi[0];
            let gap = (w.work[k] - dpsi).abs();
            let scale = w.work[k].abs().max(dpsi.abs());
            if scale > 0.0 {
                pointwise = pointwise.max(gap / scale);
            }
            if !(gap <= tol.tau_pointwise * scale) {
                return fail(4, p, Some(k), gap);
            }
        }
    }

    ConstraintVerdict::pass(id, worst, samples)
        .with_metric("eta_loop_1", eta[0])
        .with_metric("eta_loop_2", eta[1])
        .with_metric("loop_closure_stress_gap", closure_gap)
        .with_metric("two_path_work_gap", (wa - wb).abs())
        .with_metric("pointwise_relative_gap", pointwise)
}
