use alloc::vec::Vec;

use super::field::VectorField;
use crate::linalg::check_dim;
use crate::{Error, Result, State};

const MIN_STEPS: usize = 8;
const MAX_STEPS: usize = 1 << 22;

/// Dense output of [`reference_solve`]: the fine RK4 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Richardson estimate of the error at the final time.
    pub error_estimate: f64,
}

impl ReferenceSolution {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("non-empty reference grid")
    }
}

fn rk4_step(field: &VectorField, x: &State, h: f64) -> State {
    let k1 = field.eval(x);
    let k2 = field.eval(&(x + &k1 * (0.5 * h)));
    let k3 = field.eval(&(x + &k2 * (0.5 * h)));
    let k4 = field.eval(&(x + &k3 * h));
    let mut out = x.clone();
    out.axpy(h / 6.0, &k1, 1.0);
    out.axpy(h / 3.0, &k2, 1.0);
    out.axpy(h / 3.0, &k3, 1.0);
    out.axpy(h / 6.0, &k4, 1.0);
    out
}

fn rk4_final(field: &VectorField, x0: &State, t: f64, n: usize) -> State {
    let h = t / n as f64;
    let mut x = x0.clone();
    for _ in 0..n {
        x = rk4_step(field, &x, h);
    }
    x
}

fn halving_loop(field: &VectorField, x0: &State, t: f64, tol: f64) -> Result<(usize, State, f64)> {
    let mut n = MIN_STEPS;
    let mut coarse = rk4_final(field, x0, t, n);
    loop {
        let fine = rk4_final(field, x0, t, 2 * n);
        let est = (&fine - &coarse).norm() / 15.0;
        if !est.is_finite() {
            return Err(Error::OracleFailure {
                steps: 2 * n,
                error_estimate: est,
            });
        }
        if est < tol {
            return Ok((2 * n, fine, est));
        }
        n *= 2;
        if 2 * n > MAX_STEPS {
            return Err(Error::OracleFailure {
                steps: n,
                error_estimate: est,
            });
        }
        coarse = fine;
    }
}

fn check(field: &VectorField, x0: &State, t_end: f64, tol: f64) -> Result<()> {
    check_dim(field.dim(), x0.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(
            "end time must be non-negative and finite",
        ));
    }
    Ok(())
}

/// Exact-flow oracle: classical RK4 on a uniform grid, refined by halving
/// until the Richardson estimate at `t_end` is below `tol`.
pub fn reference_solve(
    field: &VectorField,
    x0: &State,
    t_end: f64,
    tol: f64,
) -> Result<ReferenceSolution> {
    check(field, x0, t_end, tol)?;
    if t_end == 0.0 {
        return Ok(ReferenceSolution {
            times: alloc::vec![0.0],
            states: alloc::vec![x0.clone()],
            error_estimate: 0.0,
        });
    }
    let (n, _, est) = halving_loop(field, x0, t_end, tol)?;
    let h = t_end / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(x0.clone());
    for k in 0..n {
        let next = rk4_step(field, &states[k], h);
        states.push(next);
        times.push(if k + 1 == n {
            t_end
        } else {
            (k + 1) as f64 * h
        });
    }
    Ok(ReferenceSolution {
        times,
        states,
        error_estimate: est,
    })
}

/// Final state `z(t, x0)` of the oracle without storing the grid.
pub fn reference_flow(field: &VectorField, x0: &State, t: f64, tol: f64) -> Result<State> {
    check(field, x0, t, tol)?;
    if t == 0.0 {
        return Ok(x0.clone());
    }
    Ok(halving_loop(field, x0, t, tol)?.1)
}
