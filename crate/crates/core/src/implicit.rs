//! Implicit Euler with unconditional Lyapunov decrease for convex `V`.

use crate::lyapunov::{within_threshold, LyapunovFunction};
use crate::ode::{
    solve_stages, unique_solvability_phi, ButcherTableau, HybridTrajectory, StageSolve, StepBound,
    StepCertificate, VectorField,
};
use crate::sampling::halton;
use crate::{Result, State};

/// Solution `Y` of `Y = x + h f(Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitStep {
    pub y: State,
    pub residual: f64,
    pub iterations: usize,
}

/// One implicit Euler step; the new state is `Y`.
///
/// Linear fields are solved directly for every `h >= 0`. Otherwise Newton's
/// method is used when the field has a Jacobian, damped fixed-point
/// iteration when it has not.
pub fn implicit_euler_step(
    field: &VectorField,
    x: &State,
    h: f64,
    solve: &StageSolve,
) -> Result<ImplicitStep> {
    let st = solve_stages(&ButcherTableau::implicit_euler(), field, x, h, solve)?;
    Ok(ImplicitStep {
        y: st.y.into_iter().next().expect("one stage"),
        residual: st.residual,
        iterations: st.iterations,
    })
}

/// `V(Y) <= V(x)` for the implicit Euler step from `x`.
pub fn convex_decrease_check(
    lyap: &LyapunovFunction,
    field: &VectorField,
    x: &State,
    h: f64,
) -> Result<bool> {
    let st = implicit_euler_step(field, x, h, &StageSolve::default())?;
    Ok(within_threshold(lyap.eval(&st.y), lyap.eval(x)))
}

/// `min(lambda / (L(x) + gamma(|x|)), r)`, the unique-solvability bound
/// of implicit Euler.
pub fn gradient_system_phi(
    field: &VectorField,
    x: &State,
    lambda: f64,
    r: f64,
) -> Result<StepBound> {
    if field.linear_matrix().is_some() {
        return Ok(StepBound {
            step: r,
            certified: true,
        });
    }
    unique_solvability_phi(field, lambda, r, 1.0, x)
}

/// Runs implicit Euler with constant step `h` for at most `n_steps` steps,
/// stopping early once `|x| <= floor`. When `lyap` is given every step
/// records `V` before and after.
pub fn implicit_euler_run(
    field: &VectorField,
    lyap: Option<&LyapunovFunction>,
    x0: State,
    h: f64,
    n_steps: usize,
    floor: f64,
) -> Result<HybridTrajectory> {
    let mut traj = HybridTrajectory::start(x0);
    let solve = StageSolve::default();
    for _ in 0..n_steps {
        let x = traj.last_state();
        if x.norm() <= floor {
            break;
        }
        let st = implicit_euler_step(field, x, h, &solve)?;
        let cert = lyap.map(|v| {
            let before = v.eval(x);
            let after = v.eval(&st.y);
            StepCertificate {
                v_before: before,
                v_after: after,
                threshold: before,
                accepted: after < before || (after == 0.0 && before == 0.0),
                halvings: 0,
            }
        });
        traj.push_state(h, st.y, cert);
    }
    Ok(traj)
}

/// Midpoint convexity spot check `V((a + b) / 2) <= (V(a) + V(b)) / 2` on
/// `pairs` low-discrepancy pairs from the cube `[-radius, radius]^dim`.
/// Returns the first offending pair.
pub fn midpoint_convexity_violation(
    lyap: &LyapunovFunction,
    dim: usize,
    radius: f64,
    pairs: usize,
) -> Option<(State, State)> {
    for k in 0..pairs as u64 {
        let u = halton(k, 2 * dim).map(|v| (2.0 * v - 1.0) * radius);
        let a = u.rows(0, dim).into_owned();
        let b = u.rows(dim, dim).into_owned();
        let mid = (&a + &b) * 0.5;
        let rhs = 0.5 * (lyap.eval(&a) + lyap.eval(&b));
        if !within_threshold(lyap.eval(&mid), rhs) {
            return Some((a, b));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::systems;
    use crate::Matrix;
    use alloc::vec;

    #[test]
    fn scalar_and_planar_steps() {
        let f = VectorField::new(1, |x| -x);
        let st = implicit_euler_step(
            &f,
            &State::from_element(1, 1.0),
            10.0,
            &StageSolve::default(),
        );
        // the bare field has no Jacobian and fixed-point iteration cannot
        // contract at h = 10
        assert!(st.is_err());
        let f = VectorField::linear(Matrix::from_element(1, 1, -1.0));
        let st = implicit_euler_step(
            &f,
            &State::from_element(1, 1.0),
            10.0,
            &StageSolve::default(),
        )
        .unwrap();
        assert!((st.y[0] - 1.0 / 11.0).abs() < 1e-15);

        let f1 = systems::f1();
        let st = implicit_euler_step(
            &f1.field,
            &State::from_vec(vec![1.0, 0.0]),
            1.0,
            &StageSolve::default(),
        )
        .unwrap();
        assert!((st.y - State::from_vec(vec![0.4, -0.2])).norm() < 1e-15);

        let st =
            implicit_euler_step(&f1.field, &State::zeros(2), 3.0, &StageSolve::default()).unwrap();
        assert_eq!(st.y, State::zeros(2));
    }

    #[test]
    fn f2_decreases_for_admissible_steps() {
        let sys = systems::f2();
        for &(a, b) in &[(1.0, 0.0), (0.3, -2.0), (-1.5, 0.5)] {
            let x = State::from_vec(vec![a, b]);
            let phi = gradient_system_phi(&sys.field, &x, 0.5, 1.0).unwrap().step;
            assert!(convex_decrease_check(&sys.lyapunov, &sys.field, &x, phi).unwrap());
        }
        assert!(convex_decrease_check(&sys.lyapunov, &sys.field, &State::zeros(2), 0.2).unwrap());
    }

    #[test]
    fn gradient_phi_values() {
        let f = VectorField::new(1, |x| -x)
            .with_gamma(|_| 1.0)
            .with_local_lipschitz(|_, _| 1.0);
        let x = State::from_element(1, 2.0);
        assert_eq!(gradient_system_phi(&f, &x, 0.5, 1.0).unwrap().step, 0.25);
        assert_eq!(gradient_system_phi(&f, &x, 0.5, 0.1).unwrap().step, 0.1);
        let f = VectorField::new(1, |x| -x * 1000.0)
            .with_gamma(|_| 1000.0)
            .with_local_lipschitz(|_, _| 1000.0);
        assert!((gradient_system_phi(&f, &x, 0.5, 1.0).unwrap().step - 2.5e-4).abs() < 1e-18);
    }

    #[test]
    fn convexity_spot_check() {
        let v = LyapunovFunction::scaled_norm_squared(3, 1.0);
        assert!(midpoint_convexity_violation(&v, 3, 5.0, 1000).is_none());
        let w = LyapunovFunction::new(|x| (x[0] * x[0] - 1.0).powi(2), |x| x * 0.0);
        assert!(midpoint_convexity_violation(&w, 1, 2.0, 1000).is_some());
    }
}
