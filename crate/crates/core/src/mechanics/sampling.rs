//! Deterministic sampling spaces used by the constraint validators.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{DeformationGradient, LoadingMode, Tensor2};
use crate::scalar::Scalar;

const UNIAXIAL_STRETCHES: [f64; 8] = [0.5, 0.7, 0.9, 1.1, 1.3, 1.5, 2.0, 3.0];
const EQUIBIAXIAL_STRETCHES: [f64; 6] = [0.7, 0.9, 1.1, 1.3, 1.5, 2.0];
const PURE_SHEAR_STRETCHES: [f64; 7] = [0.5, 0.7, 0.9, 1.1, 1.5, 2.0, 3.0];
const SIMPLE_SHEARS: [f64; 6] = [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0];
const OFF_BIAXIAL: [(f64, f64); 4] = [(1.3, 1.1), (1.5, 0.9), (2.0, 1.2), (0.8, 1.4)];
const STRETCH_SHEAR: [[f64; 4]; 3] = [[1.3, 0.3, 0.0, 1.0], [1.1, 0.2, 0.1, 0.9], [1.5, 0.5, 0.0, 0.8]];

/// Angle triples `(φ1, φ2, φ3)` for `Q = Rx(φ1) Ry(φ2) Rz(φ3)`.
pub const ANGLE_TRIPLES: [[f64; 3]; 9] = {
    use std::f64::consts::PI;
    [
        [PI / 2.0, 0.0, 0.0],
        [0.0, PI / 3.0, 0.0],
        [0.0, 0.0, PI / 4.0],
        [PI / 6.0, PI / 4.0, PI / 3.0],
        [PI / 2.0, PI / 2.0, PI / 2.0],
        [PI / 4.0, PI / 6.0, 0.0],
        [1.0, 0.5, 0.25],
        [0.7, 1.3, 2.1],
        [2.0, 0.0, 1.0],
    ]
};

/// Azimuthal phase of the second ellipticity direction set; the first uses 0.
pub const ELLIPTICITY_DIRECTION_PHASE_B: f64 = 1.0;

/// The 35 representative plane-strain states, identity first.
pub fn base_sample_set<T: Scalar>() -> Vec<DeformationGradient<T>> {
    let mut out = vec![DeformationGradient::identity()];
    let mode = |m: LoadingMode, p: f64| {
        DeformationGradient::from_mode(m, T::lit(p)).expect("pinned sample states are valid")
    };
    let plane = |b: [f64; 4]| {
        DeformationGradient::plane_strain(T::lit(b[0]), T::lit(b[1]), T::lit(b[2]), T::lit(b[3]))
            .expect("pinned sample states are valid")
    };
    out.extend(UNIAXIAL_STRETCHES.iter().map(|&l| mode(LoadingMode::UniaxialTension, l)));
    out.extend(EQUIBIAXIAL_STRETCHES.iter().map(|&l| mode(LoadingMode::Equibiaxial, l)));
    out.extend(PURE_SHEAR_STRETCHES.iter().map(|&l| mode(LoadingMode::PureShear, l)));
    out.extend(SIMPLE_SHEARS.iter().map(|&g| mode(LoadingMode::SimpleShear, g)));
    out.extend(OFF_BIAXIAL.iter().map(|&(a, b)| plane([a, 0.0, 0.0, b])));
    out.extend(STRETCH_SHEAR.iter().map(|&b| plane(b)));
    out
}

/// Proper rotations and their reflected counterparts `Q diag(1, 1, −1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSet<T> {
    pub triples: Vec<[f64; 3]>,
    pub proper: Vec<Tensor2<T>>,
    pub improper: Vec<Tensor2<T>>,
}

impl<T: Scalar> RotationSet<T> {
    /// Proper rotations followed by reflections.
    pub fn all(&self) -> impl Iterator<Item = &Tensor2<T>> {
        self.proper.iter().chain(self.improper.iter())
    }
}

pub fn rotation_xyz<T: Scalar>(phi1: T, phi2: T, phi3: T) -> Tensor2<T> {
    let (o, z) = (T::one(), T::zero());
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    let (s3, c3) = phi3.sin_cos();
    let rx = Tensor2::from_rows([[o, z, z], [z, c1, -s1], [z, s1, c1]]);
    let ry = Tensor2::from_rows([[c2, z, s2], [z, o, z], [-s2, z, c2]]);
    let rz = Tensor2::from_rows([[c3, -s3, z], [s3, c3, z], [z, z, o]]);
    rx * ry * rz
}

pub fn rotation_sets<T: Scalar>() -> RotationSet<T> {
    let reflect = Tensor2::diag(T::one(), T::one(), -T::one());
    let proper: Vec<Tensor2<T>> = ANGLE_TRIPLES
        .iter()
        .map(|t| rotation_xyz(T::lit(t[0]), T::lit(t[1]), T::lit(t[2])))
        .collect();
    let improper = proper.iter().map(|q| *q * reflect).collect();
    RotationSet {
        triples: ANGLE_TRIPLES.to_vec(),
        proper,
        improper,
    }
}

/// Rotation about the z-axis.
pub fn in_plane_rotation<T: Scalar>(theta: T) -> Tensor2<T> {
    rotation_xyz(T::zero(), T::zero(), theta)
}

/// Unit vectors covering the upper hemisphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet<T> {
    pub directions: Vec<[T; 3]>,
}

impl<T> DirectionSet<T> {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

pub fn fibonacci_hemisphere<T: Scalar>(n: usize) -> DirectionSet<T> {
    fibonacci_hemisphere_with_phase(n, T::zero())
}

/// Golden-angle spiral: `z_i = 1 − i/n` in (0, 1], azimuth `i·g + phase`.
pub fn fibonacci_hemisphere_with_phase<T: Scalar>(n: usize, phase: T) -> DirectionSet<T> {
    assert!(n >= 1, "direction count must be positive");
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let nf = T::from_usize(n).expect("count representable");
    let directions = (0..n)
        .map(|i| {
            let fi = T::from_usize(i).expect("index representable");
            let z = T::one() - fi / nf;
            let r = (T::one() - z * z).max(T::zero()).sqrt();
            let (s, c) = (fi * golden + phase).sin_cos();
            let v = [r * c, r * s, z];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / norm, v[1] / norm, v[2] / norm]
        })
        .collect();
    DirectionSet { directions }
}

/// Principal-stretch states on the ordered sector λ1 ≥ λ2 ≥ λ3, λ1λ2λ3 = 1.
///
/// Log-stretches `log λ1, log λ2` run over a regular `n × n` grid on
/// `[−L, L]`. The identity is always part of the returned set.
pub fn ellipticity_grid<T: Scalar>(half_width: T, n_per_axis: usize) -> Vec<DeformationGradient<T>> {
    assert!(half_width > T::zero(), "grid half-width must be positive");
    assert!(n_per_axis >= 2, "grid needs at least two points per axis");
    let span = T::from_usize(n_per_axis - 1).expect("count representable");
    let logs: Vec<T> = (0..n_per_axis)
        .map(|i| {
            let t = T::from_usize(i).expect("index representable") / span;
            -half_width + (half_width + half_width) * t
        })
        .collect();
    let floor = -T::lit(3.0) * half_width;
    let quantum = T::lit(1e9);

    let mut seen = HashSet::new();
    let mut triples = Vec::new();
    let mut push = |mut t: [T; 3]| {
        t.sort_by(|a, b| b.partial_cmp(a).expect("finite log-stretches"));
        if t[2] <= floor {
            return;
        }
        let key: [i64; 3] = t.map(|v| (v * quantum).round().to_i64().expect("bounded key"));
        if seen.insert(key) {
            triples.push(t);
        }
    };
    for &x in &logs {
        for &y in &logs {
            push([x, y, -x - y]);
        }
    }
    push([T::zero(); 3]);

    triples
        .into_iter()
        .map(|[l1, l2, _]| {
            let (a, b) = (l1.exp(), l2.exp());
            // Near-ties in log space can come out unordered by an ulp.
            let mut l = [a, b, T::one() / (a * b)];
            l.sort_by(|x, y| y.partial_cmp(x).expect("finite stretches"));
            DeformationGradient::from_tensor(Tensor2::diag(l[0], l[1], l[2]))
        })
        .collect()
}
