//! Planar test systems with known Lyapunov functions.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::lyapunov::LyapunovFunction;
use crate::ode::VectorField;
use crate::{Error, Matrix, Result, State};

/// A field paired with a Lyapunov function and its closed-form Lie
/// derivative.
#[derive(Clone)]
pub struct PlanarSystem {
    pub name: &'static str,
    pub field: VectorField,
    pub lyapunov: LyapunovFunction,
    pub lie_derivative: Arc<dyn Fn(&State) -> f64 + Send + Sync>,
}

impl core::fmt::Debug for PlanarSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PlanarSystem")
            .field("name", &self.name)
            .finish()
    }
}

fn v2(a: f64, b: f64) -> State {
    State::from_vec(alloc::vec![a, b])
}

fn sq(x: &State) -> f64 {
    x[0] * x[0] + x[1] * x[1]
}

/// `x' = (-x1 + x2, -x1 - x2)`, `V = |x|^2`.
pub fn f1() -> PlanarSystem {
    PlanarSystem {
        name: "f1",
        field: VectorField::linear(Matrix::from_row_slice(2, 2, &[-1.0, 1.0, -1.0, -1.0])),
        lyapunov: LyapunovFunction::scaled_norm_squared(2, 1.0),
        lie_derivative: Arc::new(|x| -2.0 * sq(x)),
    }
}

/// `x' = (-|x|^2 x1 + x2, -x1 - |x|^2 x2)`, `V = |x|^2`.
pub fn f2() -> PlanarSystem {
    let field = VectorField::new(2, |x| {
        let s = sq(x);
        v2(-s * x[0] + x[1], -x[0] - s * x[1])
    })
    .with_jacobian(|x| {
        let s = sq(x);
        Matrix::from_row_slice(
            2,
            2,
            &[
                -s - 2.0 * x[0] * x[0],
                1.0 - 2.0 * x[0] * x[1],
                -1.0 - 2.0 * x[0] * x[1],
                -s - 2.0 * x[1] * x[1],
            ],
        )
    })
    .with_gamma(|s| (1.0 + s.powi(4)).sqrt())
    .with_local_lipschitz(|x, lam| {
        let r = (1.0 + lam) * x.norm();
        1.0 + 3.0 * r * r
    });
    PlanarSystem {
        name: "f2",
        field,
        lyapunov: LyapunovFunction::scaled_norm_squared(2, 1.0),
        lie_derivative: Arc::new(|x| -2.0 * sq(x) * sq(x)),
    }
}

/// `x' = |x|^2 (-x1 + x2, -x1 - x2)`, `V = |x|^2`.
pub fn f3() -> PlanarSystem {
    let field = VectorField::new(2, |x| {
        let s = sq(x);
        v2(s * (-x[0] + x[1]), s * (-x[0] - x[1]))
    })
    .with_jacobian(|x| {
        let s = sq(x);
        let (u, w) = (-x[0] + x[1], -x[0] - x[1]);
        Matrix::from_row_slice(
            2,
            2,
            &[
                -s + 2.0 * x[0] * u,
                s + 2.0 * x[1] * u,
                -s + 2.0 * x[0] * w,
                -s + 2.0 * x[1] * w,
            ],
        )
    })
    .with_gamma(|s| 2.0_f64.sqrt() * s * s)
    .with_local_lipschitz(|x, lam| {
        let r = (1.0 + lam) * x.norm();
        3.0 * 2.0_f64.sqrt() * r * r
    });
    PlanarSystem {
        name: "f3",
        field,
        lyapunov: LyapunovFunction::scaled_norm_squared(2, 1.0),
        lie_derivative: Arc::new(|x| -2.0 * sq(x) * sq(x)),
    }
}

/// `x1' = -x1 + x2^2`, `x2' = -x2 - x1 x2`, `V = |x|^2 / 2`.
pub fn f4() -> PlanarSystem {
    let field = VectorField::new(2, |x| v2(-x[0] + x[1] * x[1], -x[1] - x[0] * x[1]))
        .with_jacobian(|x| Matrix::from_row_slice(2, 2, &[-1.0, 2.0 * x[1], -x[1], -1.0 - x[0]]))
        .with_gamma(|s| 1.0 + s)
        .with_local_lipschitz(|x, lam| {
            let r = (1.0 + lam) * x.norm();
            (1.0 + 5.0 * r * r + (1.0 + r) * (1.0 + r)).sqrt()
        });
    PlanarSystem {
        name: "f4",
        field,
        lyapunov: LyapunovFunction::scaled_norm_squared(2, 0.5),
        lie_derivative: Arc::new(|x| -sq(x)),
    }
}

pub fn example_fields() -> Vec<PlanarSystem> {
    alloc::vec![f1(), f2(), f3(), f4()]
}

pub fn by_name(name: &str) -> Option<PlanarSystem> {
    example_fields().into_iter().find(|s| s.name == name)
}

/// Radius of the invariant circle of explicit Euler on `f2`:
/// the small root `rho^2 = (1 - sqrt(1 - h^2)) / h` of
/// `h rho^4 - 2 rho^2 + h = 0`.
pub fn euler_f2_limit_radius(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter("limit radius needs 0 < h < 1"));
    }
    // 1 - sqrt(1 - h^2) = h^2 / (1 + sqrt(1 - h^2)) avoids cancellation
    Ok((h / (1.0 + (1.0 - h * h).sqrt())).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ball_points;

    #[test]
    fn field_values() {
        let x = v2(1.0, 0.0);
        assert_eq!(f2().field.eval(&x), v2(-1.0, -1.0));
        assert_eq!(f3().field.eval(&x), v2(-1.0, -1.0));
        for s in example_fields() {
            assert_eq!(
                s.field.eval(&State::zeros(2)),
                State::zeros(2),
                "{}",
                s.name
            );
        }
    }

    #[test]
    fn lie_derivatives_and_estimators() {
        let c = State::zeros(2);
        for s in example_fields() {
            for x in ball_points(&c, 3.0, 100) {
                let lf = s.lyapunov.lie_derivative(&s.field, &x);
                assert!(
                    (lf - (s.lie_derivative)(&x)).abs() <= 1e-12 * (1.0 + lf.abs()),
                    "{}",
                    s.name
                );
                let nx = x.norm();
                let g = s.field.gamma(nx).unwrap().value;
                assert!(
                    s.field.eval(&x).norm() <= nx * g * (1.0 + 1e-12),
                    "{}",
                    s.name
                );
                let l = s.field.local_lipschitz(&x, 0.5).unwrap().value;
                let sampled = s.field.sampled_lipschitz(&x, 0.5 * nx, 32);
                assert!(sampled <= l * (1.0 + 1e-9), "{}: {sampled} > {l}", s.name);
            }
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let x = v2(0.7, -0.4);
        for s in example_fields() {
            let j = s.field.jacobian(&x).unwrap();
            for k in 0..2 {
                let mut e = State::zeros(2);
                e[k] = 1e-6;
                let col = (s.field.eval(&(&x + &e)) - s.field.eval(&(&x - &e))) / 2e-6;
                assert!((col - j.column(k)).norm() < 1e-8, "{}", s.name);
            }
        }
    }

    #[test]
    fn limit_radius() {
        assert!((euler_f2_limit_radius(0.2).unwrap() - 0.317837).abs() < 1e-6);
        assert!((euler_f2_limit_radius(0.6).unwrap() - (0.2_f64 / 0.6).sqrt()).abs() < 1e-15);
        let h = 1e-8;
        assert!((euler_f2_limit_radius(h).unwrap() / (h / 2.0).sqrt() - 1.0).abs() < 1e-8);
        assert!(euler_f2_limit_radius(1.0).is_err());
        assert!(euler_f2_limit_radius(0.0).is_err());
    }
}
