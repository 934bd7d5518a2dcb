use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major 3×3 second-order tensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tensor2<T> {
    rows: [[T; 3]; 3],
}

impl<T: Scalar> Tensor2<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self { rows }
    }

    /// Checked constructor: rejects NaN or infinite entries.
    pub fn try_from_rows(rows: [[T; 3]; 3]) -> Option<Self> {
        let t = Self { rows };
        t.is_finite().then_some(t)
    }

    pub fn zeros() -> Self {
        Self {
            rows: [[T::zero(); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let mut t = Self::zeros();
        t.rows[0][0] = a;
        t.rows[1][1] = b;
        t.rows[2][2] = c;
        t
    }

    /// Unit dyad `e_i ⊗ e_j`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut t = Self::zeros();
        t.rows[i][j] = T::one();
        t
    }

    /// Dyadic product `a ⊗ b`.
    pub fn outer(a: &[T; 3], b: &[T; 3]) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.rows[i][j] = a[i] * b[j];
            }
        }
        t
    }

    pub fn rows(&self) -> &[[T; 3]; 3] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.rows[i][j] = self.rows[j][i];
            }
        }
        t
    }

    pub fn trace(&self) -> T {
        self.rows[0][0] + self.rows[1][1] + self.rows[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.rows;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by cofactors; `None` for an exactly singular tensor.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let m = &self.rows;
        let c = |a: usize, b: usize, c: usize, e: usize| m[a][b] * m[c][e] - m[a][e] * m[c][b];
        let inv = [
            [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
            [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
            [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
        ];
        let mut t = Self::from_rows(inv);
        for row in t.rows.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / d;
            }
        }
        Some(t)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let mut t = *self;
        for row in t.rows.iter_mut() {
            for v in row.iter_mut() {
                *v = f(*v);
            }
        }
        t
    }

    /// Full contraction `A : B = A_ij B_ij`.
    pub fn double_dot(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + self.rows[i][j] * other.rows[i][j];
            }
        }
        s
    }

    pub fn max_abs(&self) -> T {
        self.rows
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    pub fn apply(&self, v: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.rows[i][0] * v[0] + self.rows[i][1] * v[1] + self.rows[i][2] * v[2];
        }
        out
    }

    /// Row-major flattening, index `3i + j`.
    pub fn to_flat(&self) -> [T; 9] {
        let mut out = [T::zero(); 9];
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = self.rows[i][j];
            }
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> Tensor2<U> {
        let mut t = Tensor2::<U>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.rows[i][j] = U::lit(self.rows[i][j].to_f64_lossy());
            }
        }
        t
    }
}

impl<T: Scalar> Default for Tensor2<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T> Index<(usize, usize)> for Tensor2<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.rows[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Tensor2<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.rows[i][j]
    }
}

impl<T: Scalar> Add for Tensor2<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut t = self;
        for i in 0..3 {
            for j in 0..3 {
                t.rows[i][j] = t.rows[i][j] + rhs.rows[i][j];
            }
        }
        t
    }
}

impl<T: Scalar> Sub for Tensor2<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        let mut t = self;
        for i in 0..3 {
            for j in 0..3 {
                t.rows[i][j] = t.rows[i][j] - rhs.rows[i][j];
            }
        }
        t
    }
}

impl<T: Scalar> Neg for Tensor2<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl<T: Scalar> Mul for Tensor2<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s = s + self.rows[i][k] * rhs.rows[k][j];
                }
                t.rows[i][j] = s;
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_general_tensor() {
        let a = Tensor2::from_rows([[2.0, 1.0, 0.5], [0.3, 1.5, -0.2], [0.1, 0.4, 3.0]]);
        let prod = a * a.inverse().unwrap();
        assert!((prod - Tensor2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn try_from_rows_rejects_nan() {
        let mut rows = [[0.0f64; 3]; 3];
        rows[1][2] = f64::NAN;
        assert!(Tensor2::try_from_rows(rows).is_none());
        rows[1][2] = f64::INFINITY;
        assert!(Tensor2::try_from_rows(rows).is_none());
        rows[1][2] = 1.0;
        assert!(Tensor2::try_from_rows(rows).is_some());
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = Tensor2::from_rows([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]);
        assert!(a.inverse().is_none());
    }
}
