//! Equality-constrained convex minimization as a gradient flow.
//!
//! For `min f(x)` subject to `A x = b` the flow
//!
//! ```text
//! x' = -(Hess f(x) g + A'(A x - b)),   z' = -A g,   g = grad f(x) + A' z
//! ```
//!
//! is the negative gradient of `V(x, z) = |g|^2 / 2 + |A x - b|^2 / 2`, so
//! `V' = -|x'|^2 - |z'|^2` and the KKT point is globally attracting.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::linalg::{check_dim, symmetric_norm};
use crate::lyapunov::{decrease_test, LyapunovFunction};
use crate::ode::{ButcherTableau, HybridTrajectory, Step, VectorField};
use crate::sampling::ball_points;
use crate::{Error, Matrix, Result, State};

type ValueFn = Arc<dyn Fn(&State) -> f64 + Send + Sync>;
type VecFn = Arc<dyn Fn(&State) -> State + Send + Sync>;
type MatFn = Arc<dyn Fn(&State) -> Matrix + Send + Sync>;
type DirFn = Arc<dyn Fn(&State, &State) -> Matrix + Send + Sync>;

/// A smooth strictly convex objective with gradient and Hessian.
#[derive(Clone)]
pub struct Objective {
    pub dim: usize,
    pub value: ValueFn,
    pub grad: VecFn,
    pub hess: MatFn,
    /// Directional derivative of the Hessian, `D Hess f(x)[g]`. A central
    /// difference of `hess` is used when absent.
    pub hess_derivative: Option<DirFn>,
}

impl Objective {
    /// `f(x) = x'Qx / 2 + c'x`.
    pub fn quadratic(q: Matrix, c: State) -> Self {
        let n = c.len();
        let (qv, cv) = (q.clone(), c.clone());
        let (qg, cg) = (q.clone(), c);
        Self {
            dim: n,
            value: Arc::new(move |x| 0.5 * x.dot(&(&qv * x)) + cv.dot(x)),
            grad: Arc::new(move |x| &qg * x + &cg),
            hess: Arc::new(move |_| q.clone()),
            hess_derivative: Some(Arc::new(move |_, _| Matrix::zeros(n, n))),
        }
    }

    fn hess_derivative(&self, x: &State, g: &State) -> Matrix {
        if let Some(d) = &self.hess_derivative {
            return d(x, g);
        }
        let ng = g.norm();
        if ng == 0.0 {
            return Matrix::zeros(self.dim, self.dim);
        }
        let eps = 1e-5 * (1.0 + x.norm()) / ng;
        ((self.hess)(&(x + g * eps)) - (self.hess)(&(x - g * eps))) / (2.0 * eps)
    }
}

/// The joint `(x, z)` flow with its Lyapunov function.
#[derive(Clone)]
pub struct NlpFlow {
    pub objective: Objective,
    pub a: Matrix,
    pub b: State,
    pub field: VectorField,
    pub lyapunov: LyapunovFunction,
}

impl core::fmt::Debug for NlpFlow {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NlpFlow")
            .field("n", &self.n())
            .field("m", &self.m())
            .finish()
    }
}

struct Parts {
    n: usize,
    obj: Objective,
    a: Matrix,
    b: State,
}

impl Parts {
    fn split(&self, w: &State) -> (State, State) {
        (
            w.rows(0, self.n).into_owned(),
            w.rows(self.n, w.len() - self.n).into_owned(),
        )
    }

    /// `(g, A x - b)` at `w = (x, z)`.
    fn residuals(&self, w: &State) -> (State, State, State) {
        let (x, z) = self.split(w);
        let g = (self.obj.grad)(&x) + self.a.transpose() * z;
        let c = &self.a * &x - &self.b;
        (x, g, c)
    }

    fn grad_v(&self, w: &State) -> State {
        let (x, g, c) = self.residuals(w);
        let gx = (self.obj.hess)(&x) * &g + self.a.transpose() * c;
        let gz = &self.a * &g;
        let mut out = State::zeros(w.len());
        out.rows_mut(0, self.n).copy_from(&gx);
        out.rows_mut(self.n, gz.len()).copy_from(&gz);
        out
    }

    fn hess_v(&self, w: &State) -> Matrix {
        let (x, g, _) = self.residuals(w);
        let n = self.n;
        let m = self.a.nrows();
        let h = (self.obj.hess)(&x);
        let mut j = Matrix::zeros(n + m, n + m);
        j.view_mut((0, 0), (n, n)).copy_from(&h);
        j.view_mut((0, n), (n, m)).copy_from(&self.a.transpose());
        j.view_mut((n, 0), (m, n)).copy_from(&self.a);
        let mut out = j.transpose() * &j;
        let t = self.obj.hess_derivative(&x, &g);
        let mut blk = out.view_mut((0, 0), (n, n));
        blk += t;
        out
    }
}

/// Builds the flow; refuses constraint matrices with dependent rows.
pub fn nlp_flow(objective: Objective, a: Matrix, b: State) -> Result<NlpFlow> {
    let n = objective.dim;
    let m = a.nrows();
    check_dim(n, a.ncols())?;
    check_dim(m, b.len())?;
    if m >= n {
        return Err(Error::InvalidParameter(
            "need fewer constraints than variables",
        ));
    }
    let aat = &a * a.transpose();
    let eig = aat.clone().symmetric_eigenvalues();
    let top = eig.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    if m > 0 && eig.iter().any(|&v| v <= 1e-12 * top.max(1e-300)) {
        return Err(Error::RankDeficient);
    }
    let parts = Arc::new(Parts {
        n,
        obj: objective.clone(),
        a: a.clone(),
        b: b.clone(),
    });
    let pf = parts.clone();
    let field = VectorField::new(n + m, move |w| -pf.grad_v(w));
    let pv = parts.clone();
    let pg = parts.clone();
    let ph = parts;
    let lyapunov = LyapunovFunction::new(
        move |w| {
            let (_, g, c) = pv.residuals(w);
            0.5 * g.norm_squared() + 0.5 * c.norm_squared()
        },
        move |w| pg.grad_v(w),
    )
    .with_hessian(move |w| ph.hess_v(w));
    Ok(NlpFlow {
        objective,
        a,
        b,
        field,
        lyapunov,
    })
}

impl NlpFlow {
    pub fn n(&self) -> usize {
        self.objective.dim
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Sampled `p(w) = max |Hess V|` over the ball of radius `r |F(w)|`
    /// around `w` (128 points plus the center), inflated by 1.5.
    pub fn hessian_bound(&self, w: &State, r: f64) -> f64 {
        let radius = r * self.field.eval(w).norm();
        let center = symmetric_norm(&self.lyapunov.hess(w).expect("hessian"));
        let sampled = ball_points(w, radius, 128)
            .map(|y| symmetric_norm(&self.lyapunov.hess(&y).expect("hessian")))
            .fold(center, f64::max);
        1.5 * sampled
    }

    /// `min(2 (1 - lambda) / p(w), r)`.
    pub fn step(&self, w: &State, lambda: f64, r: f64) -> f64 {
        let p = self.hessian_bound(w, r);
        if p > 0.0 {
            (2.0 * (1.0 - lambda) / p).min(r)
        } else {
            r
        }
    }
}

/// KKT point of a quadratic objective: solves
/// `[[Q, A'], [A, 0]] (x, z) = (-c, b)`.
pub fn quadratic_kkt(q: &Matrix, c: &State, a: &Matrix, b: &State) -> Result<State> {
    let n = q.nrows();
    let m = a.nrows();
    let mut k = Matrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(q);
    k.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    k.view_mut((n, 0), (m, n)).copy_from(a);
    let mut rhs = State::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-c));
    rhs.rows_mut(n, m).copy_from(b);
    k.lu().solve(&rhs).ok_or(Error::Singular)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlpResult {
    pub w: State,
    pub iterations: usize,
    pub v_history: Vec<f64>,
    pub trajectory: HybridTrajectory,
    /// Every step passed the decrease test without halving.
    pub all_certified: bool,
}

/// Explicit Euler iteration of the flow with the sampled step rule until
/// `|F(w)| < tol`. A step failing the decrease test is halved until it
/// passes.
pub fn nlp_solve(
    flow: &NlpFlow,
    w0: State,
    lambda: f64,
    r: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<NlpResult> {
    check_dim(flow.n() + flow.m(), w0.len())?;
    let euler = ButcherTableau::explicit_euler();
    let mut w = w0;
    let mut v_history = alloc::vec![flow.lyapunov.eval(&w)];
    let mut trajectory = HybridTrajectory::start(w.clone());
    let mut all_certified = true;
    for it in 0..max_iterations {
        let f = flow.field.eval(&w);
        if f.norm() < tol {
            return Ok(NlpResult {
                w,
                iterations: it,
                v_history,
                trajectory,
                all_certified,
            });
        }
        let mut h = flow.step(&w, lambda, r);
        let mut cert = decrease_test(&flow.lyapunov, &euler, &flow.field, &w, h, lambda);
        while !cert.accepted {
            all_certified = false;
            h *= 0.5;
            if h < 1e-300 {
                return Err(Error::Stall {
                    iterations: it,
                    residual: f.norm(),
                });
            }
            cert = decrease_test(&flow.lyapunov, &euler, &flow.field, &w, h, lambda);
        }
        w.axpy(h, &f, 1.0);
        v_history.push(cert.lhs);
        trajectory.push(Step {
            h,
            certificate: Some(cert.step_certificate()),
            increment: f,
            certified_bound: false,
        });
    }
    Err(Error::Stall {
        iterations: max_iterations,
        residual: flow.field.eval(&w).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn simple_qp() -> NlpFlow {
        nlp_flow(
            Objective::quadratic(Matrix::identity(2, 2), State::zeros(2)),
            Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
            State::from_element(1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_and_values() {
        let flow = simple_qp();
        let star = State::from_vec(vec![0.5, 0.5, -0.5]);
        assert!(flow.field.eval(&star).norm() < 1e-15);
        assert!(flow.lyapunov.eval(&star).abs() < 1e-30);
        assert_eq!(flow.lyapunov.eval(&State::zeros(3)), 0.5);
        let kkt =
            quadratic_kkt(&Matrix::identity(2, 2), &State::zeros(2), &flow.a, &flow.b).unwrap();
        assert!((kkt - star).norm() < 1e-15);
    }

    #[test]
    fn lie_derivative_is_minus_speed_squared() {
        let flow = simple_qp();
        for w in ball_points(&State::zeros(3), 2.0, 50) {
            let f = flow.field.eval(&w);
            let lf = flow.lyapunov.lie_derivative(&flow.field, &w);
            assert!((lf + f.norm_squared()).abs() <= 1e-8 * f.norm_squared().max(1e-300));
        }
    }

    #[test]
    fn hessian_matches_finite_differences_for_nonquadratic() {
        // f(x) = sum exp(x_i) + |x|^2 / 2, Hessian derivative by central differences
        let obj = Objective {
            dim: 2,
            value: Arc::new(|x: &State| {
                x.iter().map(|v| v.exp()).sum::<f64>() + 0.5 * x.norm_squared()
            }),
            grad: Arc::new(|x: &State| x.map(|v| v.exp()) + x),
            hess: Arc::new(|x: &State| Matrix::from_diagonal(&x.map(|v| v.exp() + 1.0))),
            hess_derivative: None,
        };
        let flow = nlp_flow(
            obj,
            Matrix::from_row_slice(1, 2, &[1.0, -2.0]),
            State::from_element(1, 0.3),
        )
        .unwrap();
        let w = State::from_vec(vec![0.2, -0.4, 0.7]);
        let h = flow.lyapunov.hess(&w).unwrap();
        for k in 0..3 {
            let mut e = State::zeros(3);
            e[k] = 1e-6;
            let col = (flow.lyapunov.grad(&(&w + &e)) - flow.lyapunov.grad(&(&w - &e))) / 2e-6;
            assert!((col - h.column(k)).norm() < 1e-6);
        }
    }

    #[test]
    fn solves_simple_qp() {
        let flow = simple_qp();
        let res = nlp_solve(&flow, State::zeros(3), 0.5, 1.0, 1e-9, 100_000).unwrap();
        assert!((res.w - State::from_vec(vec![0.5, 0.5, -0.5])).norm() < 1e-6);
        assert!(res.v_history.windows(2).all(|p| p[1] < p[0]));
        assert!(res.all_certified);
        let res = nlp_solve(
            &flow,
            State::from_vec(vec![0.5, 0.5, -0.5]),
            0.5,
            1.0,
            1e-9,
            10,
        )
        .unwrap();
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn rank_deficient_constraints() {
        let r = nlp_flow(
            Objective::quadratic(Matrix::identity(3, 3), State::zeros(3)),
            Matrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]),
            State::zeros(2),
        );
        assert!(matches!(r, Err(Error::RankDeficient)));
    }
}
