//! Explicit Euler on the stiff linear system `x1' = -1000 x1`,
//! `x2' = x1 - x2` with the Lyapunov step rule for `V = |x|^2 / 2`.

use crate::ode::{HybridTrajectory, Step};
use crate::{Error, Matrix, Result, State};

pub fn stiff_matrix() -> Matrix {
    Matrix::from_row_slice(2, 2, &[-1000.0, 0.0, 1.0, -1.0])
}

/// `min(2(1-lambda)(1000 x1^2 + x2^2 - x1 x2) / (1000^2 x1^2 + (x1 - x2)^2), r)`,
/// evaluated left to right as written.
pub fn stiff_phi(x1: f64, x2: f64, lambda: f64, r: f64) -> f64 {
    let num = 1000.0 * x1 * x1 + x2 * x2 - x1 * x2;
    let den = 1000.0 * 1000.0 * x1 * x1 + (x1 - x2) * (x1 - x2);
    if den == 0.0 {
        return r;
    }
    let phi = 2.0 * (1.0 - lambda) * num / den;
    if phi < r {
        phi
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiffRun {
    pub trajectory: HybridTrajectory,
    pub t_final: f64,
}

impl StiffRun {
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.trajectory.steps().iter().map(|s| s.h)
    }
}

/// `n_steps` explicit Euler steps with `h = phi(x)` exactly.
pub fn stiff_experiment(lambda: f64, r: f64, x0: [f64; 2], n_steps: usize) -> Result<StiffRun> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter("lambda must lie in (0, 1)"));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("r must be positive"));
    }
    if x0 == [0.0, 0.0] {
        return Err(Error::InvalidParameter("initial state must be non-zero"));
    }
    let mut traj = HybridTrajectory::start(State::from_row_slice(&x0));
    let mut x1 = x0[0];
    let mut x2 = x0[1];
    let mut tau = 0.0;
    for _ in 0..n_steps {
        let h = stiff_phi(x1, x2, lambda, r);
        let f1 = -1000.0 * x1;
        let f2 = x1 - x2;
        traj.push(Step {
            h,
            increment: State::from_row_slice(&[f1, f2]),
            certificate: None,
            certified_bound: true,
        });
        x1 += h * f1;
        x2 += h * f2;
        tau += h;
        if x1 == 0.0 && x2 == 0.0 {
            break;
        }
    }
    Ok(StiffRun {
        trajectory: traj,
        t_final: tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::linear_phi;
    use crate::sampling::ball_points;

    #[test]
    fn formula_matches_linear_controller() {
        let a = stiff_matrix();
        let p = Matrix::identity(2, 2) * 0.5;
        for x in ball_points(&State::zeros(2), 5.0, 200) {
            let s = stiff_phi(x[0], x[1], 0.6, 1.0);
            let l = linear_phi(&a, &p, &x, 0.6, 1.0).unwrap();
            assert!((s - l).abs() <= 1e-12 * l, "{s} vs {l}");
        }
    }

    #[test]
    fn first_step_on_x2_axis() {
        let run = stiff_experiment(0.6, 1.0, [0.0, 1.0], 1).unwrap();
        assert!((run.t_final - 0.8).abs() < 1e-15);
        let run = stiff_experiment(0.9, 1.0, [0.0, 1.0], 1).unwrap();
        assert!((run.t_final - 0.2).abs() < 1e-15);
        let run = stiff_experiment(0.6, 0.5, [0.0, 1.0], 1).unwrap();
        assert_eq!(run.t_final, 0.5);
    }

    #[test]
    fn trajectory_matches_scalar_recursion() {
        let run = stiff_experiment(0.6, 1.0, [1.0, 1.1], 50).unwrap();
        assert_eq!(run.trajectory.steps().len(), 50);
        assert_eq!(run.trajectory.last_tau(), run.t_final);
        assert!(run.trajectory.last_state().norm() < 1.1);
        assert!(stiff_experiment(0.6, 1.0, [0.0, 0.0], 5).is_err());
    }
}
