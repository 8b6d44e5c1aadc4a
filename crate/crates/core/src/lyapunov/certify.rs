use alloc::vec::Vec;

use super::decrease::within_threshold;
use super::function::LyapunovFunction;
use crate::ode::{HybridTrajectory, VectorField};

/// One row of a certification report: the value after step `i` against
/// its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificationRow {
    pub i: usize,
    pub tau: f64,
    /// `V(x_{i+1})`.
    pub v: f64,
    /// `V(x_i) + lambda h_i L_f V(x_i)`.
    pub threshold: f64,
    pub accepted: bool,
    pub halvings: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub certified: bool,
    pub rows: Vec<CertificationRow>,
    pub first_violation: Option<usize>,
}

/// Re-checks `V(x_{i+1}) <= V(x_i) + lambda h_i grad V(x_i) f(x_i)` on
/// every step of a trajectory.
pub fn certify_trajectory(
    lyap: &LyapunovFunction,
    field: &VectorField,
    traj: &HybridTrajectory,
    lambda: f64,
) -> CertificationReport {
    let states = traj.states();
    let mut rows = Vec::with_capacity(traj.steps().len());
    let mut first_violation = None;
    let mut v_prev = states.first().map(|x| lyap.eval(x)).unwrap_or(0.0);
    for (i, step) in traj.steps().iter().enumerate() {
        let x = &states[i];
        let v_next = lyap.eval(&states[i + 1]);
        let threshold = v_prev + lambda * step.h * lyap.lie_derivative(field, x);
        let accepted = v_next.is_finite() && within_threshold(v_next, threshold);
        if !accepted && first_violation.is_none() {
            first_violation = Some(i);
        }
        rows.push(CertificationRow {
            i,
            tau: traj.taus()[i],
            v: v_next,
            threshold,
            accepted,
            halvings: step.certificate.map_or(0, |c| c.halvings),
        });
        v_prev = v_next;
    }
    CertificationReport {
        certified: first_violation.is_none(),
        rows,
        first_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::systems;
    use crate::lyapunov::HalvingController;
    use crate::ode::{advance, ButcherTableau, ConstantStep, StepBoundConfig};
    use crate::State;
    use alloc::vec;

    #[test]
    fn halving_trajectories_recertify() {
        let sys = systems::f4();
        let tab = ButcherTableau::kutta3();
        let ctl = HalvingController {
            lyap: &sys.lyapunov,
            tableau: &tab,
            field: &sys.field,
            lambda: 0.5,
            h_init: 1.0,
            max_halvings: 40,
        };
        let cfg = StepBoundConfig::new(1.0, 0.5).unwrap();
        let t = advance(
            &tab,
            &sys.field,
            &ctl,
            State::from_vec(vec![2.0, -1.5]),
            10.0,
            &cfg,
        )
        .unwrap();
        assert!(t.fully_certified());
        let rep = certify_trajectory(&sys.lyapunov, &sys.field, &t, 0.5);
        assert!(rep.certified, "{:?}", rep.first_violation);
    }

    #[test]
    fn f2_constant_step_fails_near_the_cycle() {
        let sys = systems::f2();
        let cfg = StepBoundConfig::new(1.0, 0.5).unwrap();
        let t = advance(
            &ButcherTableau::explicit_euler(),
            &sys.field,
            &ConstantStep(0.2),
            State::from_vec(vec![1.0, 0.0]),
            400.0,
            &cfg,
        )
        .unwrap();
        let rep = certify_trajectory(&sys.lyapunov, &sys.field, &t, 0.5);
        let k = rep.first_violation.expect("violation");
        let r = t.states()[k].norm();
        assert!(r < 0.4568 && r > 0.3178, "violation at radius {r}");
    }

    #[test]
    fn zero_trajectory_is_certified() {
        let sys = systems::f1();
        let cfg = StepBoundConfig::new(1.0, 0.5).unwrap();
        let t = advance(
            &ButcherTableau::explicit_euler(),
            &sys.field,
            &ConstantStep(0.2),
            State::zeros(2),
            1.0,
            &cfg,
        )
        .unwrap();
        assert!(certify_trajectory(&sys.lyapunov, &sys.field, &t, 0.5).certified);
    }
}
