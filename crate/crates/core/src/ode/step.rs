use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::field::{require, VectorField};
use super::tableau::ButcherTableau;
use crate::linalg::check_dim;
use crate::{Error, Matrix, Result, State};

type InputFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step-size bounds shared by every controller: the hard cap `r`, the
/// stage-ball fraction `lambda` and an optional perturbation input `u`
/// that shrinks every step by `exp(-u(tau))`.
#[derive(Clone)]
pub struct StepBoundConfig {
    r: f64,
    lambda_ball: f64,
    u_input: Option<InputFn>,
}

impl core::fmt::Debug for StepBoundConfig {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("StepBoundConfig")
            .field("r", &self.r)
            .field("lambda_ball", &self.lambda_ball)
            .field("u_input", &self.u_input.is_some())
            .finish()
    }
}

impl StepBoundConfig {
    pub fn new(r: f64, lambda_ball: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter("r must be positive and finite"));
        }
        if !(lambda_ball > 0.0 && lambda_ball < 1.0) {
            return Err(Error::InvalidParameter("lambda must lie in (0, 1)"));
        }
        Ok(Self {
            r,
            lambda_ball,
            u_input: None,
        })
    }

    /// Perturbation input `u(t) >= 0`.
    pub fn with_input(mut self, u: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.u_input = Some(Arc::new(u));
        self
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda_ball(&self) -> f64 {
        self.lambda_ball
    }

    pub fn has_input(&self) -> bool {
        self.u_input.is_some()
    }

    /// `exp(-u(tau))`, or 1 without input.
    pub fn input_scale(&self, tau: f64) -> f64 {
        match &self.u_input {
            Some(u) => (-u(tau).max(0.0)).exp(),
            None => 1.0,
        }
    }
}

/// Settings for the implicit stage equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSolve {
    pub max_iterations: usize,
    /// Residual tolerance relative to `1 + |x|`.
    pub rel_tol: f64,
    /// Relaxation factor of the fixed-point iteration, in `(0, 1]`.
    pub damping: f64,
    /// Use Newton's method when the field has a Jacobian.
    pub newton: bool,
}

impl Default for StageSolve {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            rel_tol: 1e-12,
            damping: 1.0,
            newton: true,
        }
    }
}

/// Solved stage values of one Runge-Kutta step.
#[derive(Debug, Clone)]
pub struct Stages {
    pub y: Vec<State>,
    pub fy: Vec<State>,
    pub iterations: usize,
    pub residual: f64,
}

impl Stages {
    /// `F(h, x) = sum_i b_i f(Y_i)`.
    pub fn increment(&self, tableau: &ButcherTableau) -> State {
        let mut out = State::zeros(self.fy[0].len());
        for (bi, fi) in tableau.b().iter().zip(&self.fy) {
            if *bi != 0.0 {
                out.axpy(*bi, fi, 1.0);
            }
        }
        out
    }
}

fn stage_residual(tableau: &ButcherTableau, x: &State, h: f64, y: &[State], fy: &[State]) -> f64 {
    let a = tableau.a();
    let mut worst = 0.0_f64;
    for i in 0..y.len() {
        let mut r = &y[i] - x;
        for j in 0..y.len() {
            if a[(i, j)] != 0.0 {
                r.axpy(-h * a[(i, j)], &fy[j], 1.0);
            }
        }
        worst = worst.max(r.norm());
    }
    worst
}

/// Solves the stage equations `Y_i = x + h sum_j a_ij f(Y_j)`.
pub fn solve_stages(
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    h: f64,
    solve: &StageSolve,
) -> Result<Stages> {
    check_dim(field.dim(), x.len())?;
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(
            "step must be non-negative and finite",
        ));
    }
    let s = tableau.stages();
    let a = tableau.a();

    if tableau.is_explicit() || h == 0.0 {
        let mut y: Vec<State> = Vec::with_capacity(s);
        let mut fy: Vec<State> = Vec::with_capacity(s);
        for i in 0..s {
            let mut yi = x.clone();
            for j in 0..i {
                if a[(i, j)] != 0.0 {
                    yi.axpy(h * a[(i, j)], &fy[j], 1.0);
                }
            }
            fy.push(field.eval(&yi));
            y.push(yi);
        }
        return Ok(Stages {
            y,
            fy,
            iterations: 0,
            residual: 0.0,
        });
    }

    let n = x.len();
    let tol = solve.rel_tol * (1.0 + x.norm());

    if let Some(m) = field.linear_matrix() {
        // (I - h A (x) J) Y = 1 (x) x
        let mut k = Matrix::identity(s * n, s * n);
        for i in 0..s {
            for j in 0..s {
                if a[(i, j)] != 0.0 {
                    let mut blk = k.view_mut((i * n, j * n), (n, n));
                    blk -= m * (h * a[(i, j)]);
                }
            }
        }
        let rhs = State::from_iterator(s * n, (0..s).flat_map(|_| x.iter().copied()));
        let sol = k.lu().solve(&rhs).ok_or(Error::Singular)?;
        let y: Vec<State> = (0..s).map(|i| sol.rows(i * n, n).into_owned()).collect();
        let fy: Vec<State> = y.iter().map(|yi| field.eval(yi)).collect();
        let residual = stage_residual(tableau, x, h, &y, &fy);
        return Ok(Stages {
            y,
            fy,
            iterations: 1,
            residual,
        });
    }

    let mut y: Vec<State> = (0..s).map(|_| x.clone()).collect();
    let mut fy: Vec<State> = y.iter().map(|yi| field.eval(yi)).collect();
    let mut residual = stage_residual(tableau, x, h, &y, &fy);
    let use_newton = solve.newton && field.has_jacobian();

    for it in 1..=solve.max_iterations {
        // the initial guess `x` only counts when it is exact
        if residual <= tol && (it > 1 || residual == 0.0) {
            return Ok(Stages {
                y,
                fy,
                iterations: it - 1,
                residual,
            });
        }
        if use_newton {
            let mut k = Matrix::identity(s * n, s * n);
            let mut g = State::zeros(s * n);
            for j in 0..s {
                let jac = field.jacobian(&y[j]).expect("jacobian present");
                for i in 0..s {
                    if a[(i, j)] != 0.0 {
                        let mut blk = k.view_mut((i * n, j * n), (n, n));
                        blk -= &jac * (h * a[(i, j)]);
                    }
                }
            }
            for i in 0..s {
                let mut r = &y[i] - x;
                for j in 0..s {
                    if a[(i, j)] != 0.0 {
                        r.axpy(-h * a[(i, j)], &fy[j], 1.0);
                    }
                }
                g.rows_mut(i * n, n).copy_from(&r);
            }
            let delta = k.lu().solve(&g).ok_or(Error::StageSolveDiverged {
                residual,
                iterations: it,
            })?;
            for (i, yi) in y.iter_mut().enumerate() {
                *yi -= delta.rows(i * n, n);
            }
        } else {
            let next: Vec<State> = (0..s)
                .map(|i| {
                    let mut yi = x.clone();
                    for j in 0..s {
                        if a[(i, j)] != 0.0 {
                            yi.axpy(h * a[(i, j)], &fy[j], 1.0);
                        }
                    }
                    yi
                })
                .collect();
            let w = solve.damping;
            for (yi, ni) in y.iter_mut().zip(next) {
                *yi = &*yi * (1.0 - w) + ni * w;
            }
        }
        fy = y.iter().map(|yi| field.eval(yi)).collect();
        let next_res = stage_residual(tableau, x, h, &y, &fy);
        if !next_res.is_finite() {
            return Err(Error::StageSolveDiverged {
                residual: next_res,
                iterations: it,
            });
        }
        residual = next_res;
    }
    if residual <= tol {
        return Ok(Stages {
            y,
            fy,
            iterations: solve.max_iterations,
            residual,
        });
    }
    Err(Error::StageSolveDiverged {
        residual,
        iterations: solve.max_iterations,
    })
}

/// Runge-Kutta increment `F(h, x)` with default stage-solve settings.
pub fn rk_increment(
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    h: f64,
) -> Result<State> {
    rk_increment_with(tableau, field, x, h, &StageSolve::default())
}

pub fn rk_increment_with(
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    h: f64,
    solve: &StageSolve,
) -> Result<State> {
    Ok(solve_stages(tableau, field, x, h, solve)?.increment(tableau))
}

/// A step bound and whether it rests only on supplied (certified)
/// estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBound {
    pub step: f64,
    pub certified: bool,
}

/// `min(lambda / (|A| (L(x) + gamma(|x|))), r)`: the stage equations have a
/// unique solution in the ball of radius `lambda |x|` for every smaller step.
pub fn default_phi(
    field: &VectorField,
    tableau: &ButcherTableau,
    cfg: &StepBoundConfig,
    x: &State,
) -> Result<StepBound> {
    check_dim(field.dim(), x.len())?;
    let abs_a = tableau.abs_row_sum();
    if abs_a == 0.0 {
        return Ok(StepBound {
            step: cfg.r(),
            certified: true,
        });
    }
    unique_solvability_phi(field, cfg.lambda_ball(), cfg.r(), abs_a, x)
}

pub(crate) fn unique_solvability_phi(
    field: &VectorField,
    lambda: f64,
    r: f64,
    abs_a: f64,
    x: &State,
) -> Result<StepBound> {
    let l = require(field.local_lipschitz(x, lambda), "local_lipschitz")?;
    let g = require(field.gamma(x.norm()), "gamma")?;
    let denom = abs_a * (l.value + g.value);
    let step = if denom > 0.0 {
        (lambda / denom).min(r)
    } else {
        r
    };
    Ok(StepBound {
        step,
        certified: l.certified && g.certified,
    })
}

/// Growth bound `M(y) = 1 + r (1 + lambda) (sum |b_i|) gamma((1 + lambda) y)`,
/// so that `|F(h, x)| <= |x| M(|x|)` under the default restriction.
pub fn growth_bound(
    field: &VectorField,
    tableau: &ButcherTableau,
    cfg: &StepBoundConfig,
    y: f64,
) -> Option<f64> {
    let lam = cfg.lambda_ball();
    let g = field.gamma((1.0 + lam) * y)?;
    Some(1.0 + cfg.r() * (1.0 + lam) * tableau.abs_weight_sum() * g.value)
}
