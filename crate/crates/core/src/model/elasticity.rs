use serde::{Deserialize, Serialize};

use super::{ConstitutiveModel, FeatureKind, Kinematics};
use crate::mechanics::Tensor2;
use crate::scalar::Scalar;

/// Fourth-order tensor `A_ijkl`, stored as a row-major 9×9 matrix with
/// row index `3i + j` and column index `3k + l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticityTensor<T> {
    entries: Vec<T>,
}

#[inline]
fn at(i: usize, j: usize, k: usize, l: usize) -> usize {
    (3 * i + j) * 9 + 3 * k + l
}

impl<T: Scalar> ElasticityTensor<T> {
    pub fn zeros() -> Self {
        Self {
            entries: vec![T::zero(); 81],
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.entries[at(i, j, k, l)]
    }

    pub fn as_matrix(&self) -> [[T; 9]; 9] {
        let mut m = [[T::zero(); 9]; 9];
        for (r, row) in m.iter_mut().enumerate() {
            row.copy_from_slice(&self.entries[9 * r..9 * r + 9]);
        }
        m
    }

    /// Largest `|A_ijkl − A_klij|`.
    pub fn major_symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..9 {
            for c in 0..9 {
                worst = worst.max((self.entries[9 * r + c] - self.entries[9 * c + r]).abs());
            }
        }
        worst
    }

    /// `B_jl = Σ_ik a_i a_k A_ijkl`, so that the rank-one form is `bᵀ B b`.
    pub fn contract_left(&self, a: &[T; 3]) -> [[T; 3]; 3] {
        let mut b = [[T::zero(); 3]; 3];
        for (j, row) in b.iter_mut().enumerate() {
            for (l, out) in row.iter_mut().enumerate() {
                let mut s = T::zero();
                for i in 0..3 {
                    for k in 0..3 {
                        s = s + a[i] * a[k] * self.entries[at(i, j, k, l)];
                    }
                }
                *out = s;
            }
        }
        b
    }

    fn add_outer(&mut self, s: T, g: &Tensor2<T>, h: &Tensor2<T>) {
        let g = g.to_flat();
        let h = h.to_flat();
        for r in 0..9 {
            for c in 0..9 {
                self.entries[9 * r + c] = self.entries[9 * r + c] + s * g[r] * h[c];
            }
        }
    }
}

/// `(a ⊗ b) : A : (a ⊗ b)`, i.e. `hᵀ A h` with `h = vec(a ⊗ b)`.
///
/// Intended for unit vectors; the form is homogeneous of degree two in each.
pub fn rank_one_form<T: Scalar>(a_tensor: &ElasticityTensor<T>, a: &[T; 3], b: &[T; 3]) -> T {
    let h = Tensor2::outer(a, b).to_flat();
    let mut s = T::zero();
    for r in 0..9 {
        let mut row = T::zero();
        for c in 0..9 {
            row = row + a_tensor.entries[9 * r + c] * h[c];
        }
        s = s + h[r] * row;
    }
    s
}

pub(super) fn assemble<T: Scalar>(
    model: &ConstitutiveModel<T>,
    k: &Kinematics<T>,
) -> ElasticityTensor<T> {
    let mut a = ElasticityTensor::zeros();
    let (mut c1, mut c2) = (T::zero(), T::zero());
    for (t, spec) in model.descriptor.terms.iter().enumerate() {
        let feat = k.feature(spec.feature);
        if !feat.active {
            continue;
        }
        let b = model.block(t, feat.x);
        let g = k.feature_gradient(spec.feature);
        a.add_outer(b.d2e, &g, &g);
        match spec.feature {
            FeatureKind::I1m3 => c1 = c1 + b.de,
            FeatureKind::I2m3 => c2 = c2 + b.de,
            FeatureKind::RawF { .. } => {}
        }
    }
    if c1 == T::zero() && c2 == T::zero() {
        return a;
    }

    let two = T::lit(2.0);
    let f = k.f;
    let c = k.c;
    let bl = f * f.transpose();
    let i1 = k.inv.i1;
    let delta = |p: usize, q: usize| if p == q { T::one() } else { T::zero() };
    for i in 0..3 {
        for j in 0..3 {
            for kk in 0..3 {
                for l in 0..3 {
                    let dd = delta(i, kk) * delta(j, l);
                    // ∂²I1/∂F∂F = 2 δ_ik δ_jl
                    let h1 = two * dd;
                    // ∂²I2/∂F∂F = 2(2 F_kl F_ij + I1 δ_ik δ_jl − δ_ik C_lj − F_il F_kj − B_ik δ_jl)
                    let h2 = two
                        * (two * f[(kk, l)] * f[(i, j)] + i1 * dd
                            - delta(i, kk) * c[(l, j)]
                            - f[(i, l)] * f[(kk, j)]
                            - bl[(i, kk)] * delta(j, l));
                    let idx = at(i, j, kk, l);
                    a.entries[idx] = a.entries[idx] + c1 * h1 + c2 * h2;
                }
            }
        }
    }
    a
}
