use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Scalar activation applied to `w_in · feature` inside a network block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    /// `f(y) = y`
    Linear,
    /// `f(y) = y²`
    Square,
    /// `f(y) = softplus(y) − log 2`
    SoftplusShifted,
    /// `f(y) = (softplus(y) − log 2)²`
    SoftplusSq,
    /// `f(y) = eʸ − 1 − y`
    ExpM1my,
    /// `f(y) = softplus(y)`; not zero at the origin.
    SoftplusRaw,
    /// `f(y) = sin y`; non-convex.
    Sine,
}

/// Value and first two derivatives of an activation at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActivationValue<T> {
    pub f: T,
    pub df: T,
    pub d2f: T,
}

fn softplus<T: Scalar>(y: T) -> T {
    if y > T::zero() {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

fn sigmoid<T: Scalar>(y: T) -> T {
    if y >= T::zero() {
        T::one() / (T::one() + (-y).exp())
    } else {
        let e = y.exp();
        e / (T::one() + e)
    }
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 7] = [
        ActivationKind::Linear,
        ActivationKind::Square,
        ActivationKind::SoftplusShifted,
        ActivationKind::SoftplusSq,
        ActivationKind::ExpM1my,
        ActivationKind::SoftplusRaw,
        ActivationKind::Sine,
    ];

    /// Upper clip bound on the pre-activation; clipped kinds are also
    /// clipped below at zero.
    pub fn clip_bound(self) -> Option<f64> {
        match self {
            ActivationKind::SoftplusShifted
            | ActivationKind::SoftplusSq
            | ActivationKind::SoftplusRaw => Some(30.0),
            ActivationKind::ExpM1my => Some(10.0),
            ActivationKind::Linear | ActivationKind::Square | ActivationKind::Sine => None,
        }
    }

    /// Convex, non-decreasing on `y ≥ 0` and zero at the origin.
    pub fn is_normalizing_convex(self) -> bool {
        !matches!(self, ActivationKind::SoftplusRaw | ActivationKind::Sine)
    }

    /// Applies the clip, returning the clipped argument and whether the
    /// original argument lay inside the clip interval (derivatives vanish
    /// outside it).
    pub fn clip<T: Scalar>(self, y: T) -> (T, bool) {
        match self.clip_bound() {
            None => (y, true),
            Some(b) => {
                let b = T::lit(b);
                if y < T::zero() {
                    (T::zero(), false)
                } else if y > b {
                    (b, false)
                } else {
                    (y, true)
                }
            }
        }
    }

    /// Closed-form `f`, `f′`, `f″` at an unclipped argument.
    pub fn eval_raw<T: Scalar>(self, y: T) -> ActivationValue<T> {
        let two = T::lit(2.0);
        let ln2 = T::LN_2();
        match self {
            ActivationKind::Linear => ActivationValue {
                f: y,
                df: T::one(),
                d2f: T::zero(),
            },
            ActivationKind::Square => ActivationValue {
                f: y * y,
                df: two * y,
                d2f: two,
            },
            ActivationKind::SoftplusShifted | ActivationKind::SoftplusRaw => {
                let s = sigmoid(y);
                let shift = if self == ActivationKind::SoftplusShifted {
                    ln2
                } else {
                    T::zero()
                };
                ActivationValue {
                    f: softplus(y) - shift,
                    df: s,
                    d2f: s * (T::one() - s),
                }
            }
            ActivationKind::SoftplusSq => {
                let g = softplus(y) - ln2;
                let s = sigmoid(y);
                ActivationValue {
                    f: g * g,
                    df: two * g * s,
                    d2f: two * s * s + two * g * s * (T::one() - s),
                }
            }
            ActivationKind::ExpM1my => {
                let e = y.exp();
                ActivationValue {
                    f: e - T::one() - y,
                    df: e - T::one(),
                    d2f: e,
                }
            }
            ActivationKind::Sine => {
                let (s, c) = y.sin_cos();
                ActivationValue { f: s, df: c, d2f: -s }
            }
        }
    }

    /// Value and derivatives with respect to the unclipped argument.
    pub fn eval<T: Scalar>(self, y: T) -> ActivationValue<T> {
        let (yc, inside) = self.clip(y);
        let v = self.eval_raw(yc);
        if inside {
            v
        } else {
            ActivationValue {
                f: v.f,
                df: T::zero(),
                d2f: T::zero(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        for kind in ActivationKind::ALL {
            let v = kind.eval(0.0f64);
            let (f0, df0) = match kind {
                ActivationKind::Linear => (0.0, 1.0),
                ActivationKind::Square => (0.0, 0.0),
                ActivationKind::SoftplusShifted => (0.0, 0.5),
                ActivationKind::SoftplusSq => (0.0, 0.0),
                ActivationKind::ExpM1my => (0.0, 0.0),
                ActivationKind::SoftplusRaw => (std::f64::consts::LN_2, 0.5),
                ActivationKind::Sine => (0.0, 1.0),
            };
            assert!((v.f - f0).abs() < 1e-15, "{kind:?}");
            assert!((v.df - df0).abs() < 1e-15, "{kind:?}");
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for kind in ActivationKind::ALL {
            for y in [0.05f64, 0.3, 1.7, 4.0, 9.5] {
                let v = kind.eval(y);
                let fp = kind.eval(y + h);
                let fm = kind.eval(y - h);
                let df_fd = (fp.f - fm.f) / (2.0 * h);
                let d2f_fd = (fp.df - fm.df) / (2.0 * h);
                let scale = 1.0 + v.df.abs();
                assert!((v.df - df_fd).abs() / scale < 1e-8, "{kind:?} f' at {y}");
                let scale = 1.0 + v.d2f.abs();
                assert!((v.d2f - d2f_fd).abs() / scale < 1e-7, "{kind:?} f'' at {y}");
            }
        }
    }

    #[test]
    fn clipping_freezes_derivatives() {
        let v = ActivationKind::ExpM1my.eval(12.0f64);
        assert_eq!(v.f, 10.0f64.exp() - 11.0);
        assert_eq!((v.df, v.d2f), (0.0, 0.0));
        let v = ActivationKind::SoftplusShifted.eval(-1.0f64);
        assert_eq!((v.f, v.df, v.d2f), (0.0, 0.0, 0.0));
        let v = ActivationKind::Linear.eval(-1.0f64);
        assert_eq!(v.f, -1.0);
    }

    #[test]
    fn softplus_stable_for_large_arguments() {
        let v = ActivationKind::SoftplusRaw.eval_raw(700.0f64);
        assert!(v.f.is_finite() && (v.f - 700.0).abs() < 1e-12);
        let v = ActivationKind::SoftplusRaw.eval_raw(-700.0f64);
        assert!(v.f >= 0.0 && v.f < 1e-300);
    }

    #[test]
    fn names_are_stable() {
        let names: Vec<String> = ActivationKind::ALL
            .iter()
            .map(|k| serde_json::to_string(k).unwrap())
            .collect();
        assert_eq!(
            names,
            [
                "\"linear\"",
                "\"square\"",
                "\"softplus_shifted\"",
                "\"softplus_sq\"",
                "\"exp_m1my\"",
                "\"softplus_raw\"",
                "\"sine\""
            ]
        );
    }
}
