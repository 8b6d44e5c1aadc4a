use super::field::VectorField;
use super::step::{rk_increment, StepBoundConfig};
use super::tableau::ButcherTableau;
use super::trajectory::{HybridTrajectory, Step, StepCertificate};
use crate::linalg::check_dim;
use crate::{Error, Result, State};

/// A step proposed by a controller at `(tau, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub h: f64,
    /// Increment already computed while testing the step, if any.
    pub increment: Option<State>,
    pub certificate: Option<StepCertificate>,
    /// False when the step rests on sampled estimates.
    pub certified: bool,
}

impl Proposal {
    pub fn plain(h: f64) -> Self {
        Self {
            h,
            increment: None,
            certificate: None,
            certified: true,
        }
    }
}

/// Feedback law `x -> h` selecting the next step.
pub trait StepController {
    fn propose(&self, tau: f64, x: &State) -> Result<Proposal>;
}

impl<C: StepController + ?Sized> StepController for &C {
    fn propose(&self, tau: f64, x: &State) -> Result<Proposal> {
        (**self).propose(tau, x)
    }
}

/// Always proposes the same step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantStep(pub f64);

impl StepController for ConstantStep {
    fn propose(&self, _tau: f64, _x: &State) -> Result<Proposal> {
        Ok(Proposal::plain(self.0))
    }
}

/// Wraps a closure `x -> h` as a controller.
pub struct FnController<F>(pub F);

impl<F: Fn(&State) -> Result<f64>> StepController for FnController<F> {
    fn propose(&self, _tau: f64, x: &State) -> Result<Proposal> {
        Ok(Proposal::plain((self.0)(x)?))
    }
}

/// Stopping rules for [`advance_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvanceOptions {
    /// Stop once `|x| < norm_floor`.
    pub norm_floor: f64,
    /// Stop after this many steps.
    pub max_steps: Option<usize>,
}

impl Default for AdvanceOptions {
    fn default() -> Self {
        Self {
            norm_floor: 1e-14,
            max_steps: None,
        }
    }
}

/// Runs the hybrid system until `tau >= t_end` or the state norm reaches
/// the floor.
pub fn advance(
    tableau: &ButcherTableau,
    field: &VectorField,
    controller: &dyn StepController,
    x0: State,
    t_end: f64,
    cfg: &StepBoundConfig,
) -> Result<HybridTrajectory> {
    advance_with(
        tableau,
        field,
        controller,
        x0,
        t_end,
        cfg,
        &AdvanceOptions::default(),
    )
}

pub fn advance_with(
    tableau: &ButcherTableau,
    field: &VectorField,
    controller: &dyn StepController,
    x0: State,
    t_end: f64,
    cfg: &StepBoundConfig,
    opts: &AdvanceOptions,
) -> Result<HybridTrajectory> {
    check_dim(field.dim(), x0.len())?;
    let mut traj = HybridTrajectory::start(x0);
    loop {
        let tau = traj.last_tau();
        let x = traj.last_state();
        if tau >= t_end || x.norm() < opts.norm_floor {
            break;
        }
        if opts.max_steps.is_some_and(|m| traj.steps().len() >= m) {
            break;
        }
        let p = controller.propose(tau, x)?;
        if !(p.h > 0.0 && p.h.is_finite()) {
            return Err(Error::ControllerFault { step: p.h });
        }
        let scale = cfg.input_scale(tau);
        let h = p.h.min(cfg.r()) * scale;
        let reuse = h == p.h;
        let increment = match p.increment {
            Some(inc) if reuse => inc,
            _ => rk_increment(tableau, field, x, h)?,
        };
        traj.push(Step {
            h,
            increment,
            certificate: if reuse { p.certificate } else { None },
            certified_bound: p.certified,
        });
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> State {
        State::from_element(1, v)
    }

    #[test]
    fn two_euler_steps() {
        let f = VectorField::new(1, |x| -x);
        let cfg = StepBoundConfig::new(10.0, 0.5).unwrap();
        let t = advance(
            &ButcherTableau::explicit_euler(),
            &f,
            &ConstantStep(0.5),
            s(1.0),
            1.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(t.taus(), &[0.0, 0.5, 1.0]);
        let xs: alloc::vec::Vec<f64> = t.states().iter().map(|x| x[0]).collect();
        assert_eq!(xs, alloc::vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn zero_start_stays_zero() {
        let f = VectorField::new(1, |x| -x);
        let cfg = StepBoundConfig::new(10.0, 0.5).unwrap();
        let opts = AdvanceOptions {
            norm_floor: 0.0,
            max_steps: Some(5),
        };
        let t = advance_with(
            &ButcherTableau::heun(),
            &f,
            &ConstantStep(0.3),
            s(0.0),
            10.0,
            &cfg,
            &opts,
        )
        .unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.states().iter().all(|x| x[0] == 0.0));
    }

    #[test]
    fn input_scales_steps() {
        let f = VectorField::new(1, |x| -x);
        let cfg = StepBoundConfig::new(10.0, 0.5)
            .unwrap()
            .with_input(|_| core::f64::consts::LN_2);
        let t = advance(
            &ButcherTableau::explicit_euler(),
            &f,
            &ConstantStep(0.5),
            s(1.0),
            1.0,
            &cfg,
        )
        .unwrap();
        assert!(t.steps().iter().all(|st| (st.h - 0.25).abs() < 1e-15));
        assert_eq!(t.steps().len(), 4);
    }

    #[test]
    fn non_positive_step_is_a_fault() {
        let f = VectorField::new(1, |x| -x);
        let cfg = StepBoundConfig::new(10.0, 0.5).unwrap();
        let r = advance(
            &ButcherTableau::explicit_euler(),
            &f,
            &ConstantStep(0.0),
            s(1.0),
            1.0,
            &cfg,
        );
        assert_eq!(r, Err(Error::ControllerFault { step: 0.0 }));
    }
}
