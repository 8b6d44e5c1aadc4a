use alloc::vec::Vec;

use crate::State;

/// Outcome of the Lyapunov decrease test attached to one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCertificate {
    pub v_before: f64,
    pub v_after: f64,
    /// `V(x) + lambda h L_f V(x)`.
    pub threshold: f64,
    pub accepted: bool,
    pub halvings: u32,
}

/// One step of the hybrid system: the step size and the constant velocity
/// used on `(tau_i, tau_i + h_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub h: f64,
    pub increment: State,
    pub certificate: Option<StepCertificate>,
    pub certified_bound: bool,
}

/// Sampling instants `tau_i`, node states `x(tau_i)` and the steps
/// between them. `steps.len() + 1 == nodes.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrajectory {
    taus: Vec<f64>,
    states: Vec<State>,
    steps: Vec<Step>,
}

impl HybridTrajectory {
    pub fn start(x0: State) -> Self {
        Self {
            taus: alloc::vec![0.0],
            states: alloc::vec![x0],
            steps: Vec::new(),
        }
    }

    /// Appends the node `x + h F` reached with step `h` and increment `F`.
    pub fn push(&mut self, step: Step) {
        let tau = self.last_tau() + step.h;
        let mut x = self.last_state().clone();
        x.axpy(step.h, &step.increment, 1.0);
        self.taus.push(tau);
        self.states.push(x);
        self.steps.push(step);
    }

    /// Appends a node whose state was computed elsewhere (implicit schemes
    /// return the stage value directly). The stored increment is
    /// `(x_next - x) / h`.
    pub fn push_state(&mut self, h: f64, x_next: State, certificate: Option<StepCertificate>) {
        let x = self.last_state();
        let increment = (&x_next - x) / h;
        self.taus.push(self.last_tau() + h);
        self.states.push(x_next);
        self.steps.push(Step {
            h,
            increment,
            certificate,
            certified_bound: true,
        });
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn last_tau(&self) -> f64 {
        *self.taus.last().expect("trajectory has a start node")
    }

    pub fn last_state(&self) -> &State {
        self.states.last().expect("trajectory has a start node")
    }

    /// Piecewise-linear state at time `t`, or `None` outside
    /// `[0, last_tau]`.
    pub fn interpolate(&self, t: f64) -> Option<State> {
        if !(t >= 0.0 && t <= self.last_tau()) {
            return None;
        }
        // first node with tau >= t
        let k = self.taus.partition_point(|&tau| tau < t);
        if self.taus[k] == t {
            return Some(self.states[k].clone());
        }
        let i = k - 1;
        let mut x = self.states[i].clone();
        x.axpy(t - self.taus[i], &self.steps[i].increment, 1.0);
        Some(x)
    }

    /// True when every step carries an accepted certificate.
    pub fn fully_certified(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.certificate.is_some_and(|c| c.accepted))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> State {
        State::from_element(1, v)
    }

    #[test]
    fn clock_and_interpolation() {
        let mut t = HybridTrajectory::start(s(1.0));
        t.push(Step {
            h: 0.5,
            increment: s(-1.0),
            certificate: None,
            certified_bound: true,
        });
        t.push(Step {
            h: 0.25,
            increment: s(-0.5),
            certificate: None,
            certified_bound: true,
        });
        assert_eq!(t.taus(), &[0.0, 0.5, 0.75]);
        assert_eq!(t.interpolate(0.5).unwrap()[0], 0.5);
        assert!((t.interpolate(0.25).unwrap()[0] - 0.75).abs() < 1e-15);
        assert!((t.interpolate(0.625).unwrap()[0] - 0.4375).abs() < 1e-15);
        assert!(t.interpolate(0.8).is_none());
        assert!(!t.fully_certified());
    }
}
