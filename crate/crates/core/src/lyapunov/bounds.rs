use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::function::LyapunovFunction;
use crate::linalg::{check_dim, quadratic_form};
use crate::ode::{reference_flow, rk_increment, ButcherTableau, StepBound, VectorField};
use crate::sampling::{ball_points, sphere_points};
use crate::{Error, Matrix, Result, State};

/// Grid size for maxima over `h`.
pub const DEFAULT_H_SAMPLES: usize = 33;
/// Inflation applied to sampled maxima.
pub const GRID_INFLATION: f64 = 1.05;

/// `max { f' Hess V(x + h f) f : h in [0, h_max] }`, sampled on a uniform
/// grid and inflated, or exact for a constant Hessian.
fn curvature_along_euler(
    lyap: &LyapunovFunction,
    field: &VectorField,
    x: &State,
    h_max: f64,
    h_samples: usize,
) -> Result<f64> {
    if !lyap.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let f = field.eval(x);
    let curv = |h: f64| {
        let mut y = x.clone();
        y.axpy(h, &f, 1.0);
        quadratic_form(&lyap.hess(&y).expect("hessian"), &f, &f)
    };
    if lyap.has_constant_hessian() {
        return Ok(curv(0.0));
    }
    let n = h_samples.max(2);
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        let h = h_max * k as f64 / (n - 1) as f64;
        best = best.max(curv(h));
    }
    Ok(if best > 0.0 {
        best * GRID_INFLATION
    } else {
        best
    })
}

/// Explicit-Euler step bound `min(-2 (1 - lambda) L_f V(x) / q(x), r)` with
/// `q(x) = max { f' Hess V(x + h f) f : h in [0, r] }`.
pub fn euler_q_phi(
    lyap: &LyapunovFunction,
    field: &VectorField,
    x: &State,
    lambda: f64,
    r: f64,
) -> Result<f64> {
    euler_q_phi_with(lyap, field, x, lambda, r, DEFAULT_H_SAMPLES)
}

pub fn euler_q_phi_with(
    lyap: &LyapunovFunction,
    field: &VectorField,
    x: &State,
    lambda: f64,
    r: f64,
    h_samples: usize,
) -> Result<f64> {
    check_dim(field.dim(), x.len())?;
    let q = curvature_along_euler(lyap, field, x, r, h_samples)?;
    let lf = lyap.lie_derivative(field, x);
    if q > 0.0 {
        Ok((-2.0 * (1.0 - lambda) * lf / q).min(r))
    } else {
        Ok(r)
    }
}

/// Explicit-Euler bound for `x' = A x`, `V = x' P x`:
/// `min(-(1 - lambda) x'(A'P + PA)x / (x'A'PAx), r)`.
pub fn linear_phi(a: &Matrix, p: &Matrix, x: &State, lambda: f64, r: f64) -> Result<f64> {
    check_dim(a.nrows(), x.len())?;
    check_dim(p.nrows(), x.len())?;
    let ax = a * x;
    let pax = p * &ax;
    // x'(A'P + PA)x = 2 (Ax)'P x
    let num = x.dot(&pax) + ax.dot(&(p * x));
    let den = ax.dot(&pax);
    if den > 0.0 {
        Ok((-(1.0 - lambda) * num / den).min(r))
    } else {
        Ok(r)
    }
}

/// `K_1(x) = 1/2 max { f' Hess V(x + h f) f : h in [0, h_max] }`.
pub fn k1_bound_euler(
    lyap: &LyapunovFunction,
    field: &VectorField,
    x: &State,
    h_max: f64,
    h_samples: usize,
) -> Result<f64> {
    check_dim(field.dim(), x.len())?;
    Ok(0.5 * curvature_along_euler(lyap, field, x, h_max, h_samples)?)
}

/// Step bound from `phi K_1 <= (lambda - 1) L_f V`, capped at `r`.
pub fn k1_phi(
    lyap: &LyapunovFunction,
    field: &VectorField,
    x: &State,
    lambda: f64,
    r: f64,
    h_samples: usize,
) -> Result<f64> {
    let k1 = k1_bound_euler(lyap, field, x, r, h_samples)?;
    let lf = lyap.lie_derivative(field, x);
    if k1 > 0.0 {
        Ok(((lambda - 1.0) * lf / k1).min(r))
    } else {
        Ok(r)
    }
}

/// Sampling settings for [`order_p_phi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPOptions {
    /// Number of positive steps in the grid `(0, r]`.
    pub h_samples: usize,
    /// Points used for the gradient maximum.
    pub gradient_samples: usize,
    /// Oracle tolerance relative to `1 + |x|`.
    pub oracle_tol: f64,
}

impl Default for OrderPOptions {
    fn default() -> Self {
        Self {
            h_samples: 8,
            gradient_samples: 64,
            oracle_tol: 1e-12,
        }
    }
}

/// Pieces of the order-`p` bound at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPBound {
    pub step: f64,
    /// Sampled defect constant `C(x)`.
    pub defect_constant: f64,
    /// Growth exponent `b`.
    pub b: f64,
    /// `l_V^b(x)`.
    pub gradient_bound: f64,
    /// Decrease rate used for `W~(x)`.
    pub rate: f64,
}

/// Order-`p` step bound `min(((1 - lambda) W~(x) / (l_V^b(x) C(x)))^(1/p), r)`.
///
/// `C(x)` is the largest `|z(h, x) - x - h F(h, x)| / h^(p+1)` over a step
/// grid, with `z` from the reference oracle; `b` is the smallest exponent
/// with `|z|, |x + h F| <= e^b |x|` on that grid; `l_V^b` is the sampled
/// maximum of `|grad V|` over `|z| <= e^b |x|`. `W~` is the user decrease
/// rate when set, else `-L_f V`. The result is always non-certified.
pub fn order_p_phi(
    lyap: &LyapunovFunction,
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    lambda: f64,
    r: f64,
    opts: &OrderPOptions,
) -> Result<OrderPBound> {
    check_dim(field.dim(), x.len())?;
    let nx = x.norm();
    let rate = lyap
        .decrease_rate(x)
        .unwrap_or_else(|| -lyap.lie_derivative(field, x));
    if nx == 0.0 || rate <= 0.0 {
        return Ok(OrderPBound {
            step: r,
            defect_constant: 0.0,
            b: 0.0,
            gradient_bound: 0.0,
            rate,
        });
    }
    let p = tableau.order() as i32;
    let tol = opts.oracle_tol * (1.0 + nx);
    let mut c: f64 = 0.0;
    let mut growth: f64 = 1.0;
    let n = opts.h_samples.max(1);
    for k in 1..=n {
        let h = r * k as f64 / n as f64;
        let inc = rk_increment(tableau, field, x, h)?;
        let mut num = x.clone();
        num.axpy(h, &inc, 1.0);
        let z = reference_flow(field, x, h, tol)?;
        c = c.max((&z - &num).norm() / h.powi(p + 1));
        growth = growth.max(z.norm() / nx).max(num.norm() / nx);
    }
    let b = growth.ln().max(0.0);
    let radius = b.exp() * nx;
    let origin = State::zeros(x.len());
    let pts: Vec<State> = ball_points(&origin, radius, opts.gradient_samples)
        .chain(sphere_points(x.len(), radius, opts.gradient_samples))
        .collect();
    let lv = pts
        .iter()
        .map(|z| lyap.grad(z).norm())
        .fold(lyap.grad(x).norm(), f64::max);
    let step = if c > 0.0 && lv > 0.0 {
        ((1.0 - lambda) * rate / (lv * c))
            .powf(1.0 / p as f64)
            .min(r)
    } else {
        r
    };
    Ok(OrderPBound {
        step,
        defect_constant: c,
        b,
        gradient_bound: lv,
        rate,
    })
}

impl From<OrderPBound> for StepBound {
    fn from(b: OrderPBound) -> Self {
        StepBound {
            step: b.step,
            certified: false,
        }
    }
}
