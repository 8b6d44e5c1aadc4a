use super::function::LyapunovFunction;
use crate::ode::{
    rk_increment, ButcherTableau, Proposal, StepCertificate, StepController, VectorField,
};
use crate::{Error, Result, State};

/// Relative slack absorbing roundoff at boundary steps.
pub const DECREASE_SLACK: f64 = 1e-15;

/// `lhs <= rhs` up to [`DECREASE_SLACK`].
pub fn within_threshold(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + DECREASE_SLACK * rhs.abs().max(1.0)
}

/// Result of the decrease test `V(x + h F(h, x)) <= V(x) + lambda h L_f V(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecreaseCertificate {
    pub x: State,
    pub h: f64,
    pub v_before: f64,
    /// `V(x + h F(h, x))`.
    pub lhs: f64,
    /// `V(x) + lambda h L_f V(x)`.
    pub rhs: f64,
    pub accepted: bool,
    pub halvings: u32,
    /// Increment `F(h, x)` when the stage equations were solved.
    pub increment: Option<State>,
    /// Why the step was rejected without evaluating the test.
    pub failure: Option<Error>,
}

impl DecreaseCertificate {
    pub fn step_certificate(&self) -> StepCertificate {
        StepCertificate {
            v_before: self.v_before,
            v_after: self.lhs,
            threshold: self.rhs,
            accepted: self.accepted,
            halvings: self.halvings,
        }
    }
}

pub fn decrease_test(
    lyap: &LyapunovFunction,
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    h: f64,
    lambda: f64,
) -> DecreaseCertificate {
    let v = lyap.eval(x);
    let rhs = v + lambda * h * lyap.lie_derivative(field, x);
    match rk_increment(tableau, field, x, h) {
        Ok(inc) => {
            let mut next = x.clone();
            next.axpy(h, &inc, 1.0);
            let lhs = lyap.eval(&next);
            DecreaseCertificate {
                x: x.clone(),
                h,
                v_before: v,
                lhs,
                rhs,
                accepted: lhs.is_finite() && within_threshold(lhs, rhs),
                halvings: 0,
                increment: Some(inc),
                failure: None,
            }
        }
        Err(e) => DecreaseCertificate {
            x: x.clone(),
            h,
            v_before: v,
            lhs: f64::INFINITY,
            rhs,
            accepted: false,
            halvings: 0,
            increment: None,
            failure: Some(e),
        },
    }
}

/// Tries `h_init, h_init / 2, ...` and returns the certificate of the first
/// accepted step.
pub fn halving_controller(
    lyap: &LyapunovFunction,
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    h_init: f64,
    lambda: f64,
    max_halvings: u32,
) -> Result<DecreaseCertificate> {
    if !(h_init > 0.0 && h_init.is_finite()) {
        return Err(Error::InvalidParameter("initial step must be positive"));
    }
    let mut h = h_init;
    for k in 0..=max_halvings {
        let mut cert = decrease_test(lyap, tableau, field, x, h, lambda);
        if cert.accepted {
            cert.halvings = k;
            return Ok(cert);
        }
        h *= 0.5;
    }
    Err(Error::HalvingExhausted {
        halvings: max_halvings,
        last_step: 2.0 * h,
    })
}

/// The halving algorithm as a step controller.
#[derive(Debug, Clone, Copy)]
pub struct HalvingController<'a> {
    pub lyap: &'a LyapunovFunction,
    pub tableau: &'a ButcherTableau,
    pub field: &'a VectorField,
    pub lambda: f64,
    pub h_init: f64,
    pub max_halvings: u32,
}

impl StepController for HalvingController<'_> {
    fn propose(&self, _tau: f64, x: &State) -> Result<Proposal> {
        let cert = halving_controller(
            self.lyap,
            self.tableau,
            self.field,
            x,
            self.h_init,
            self.lambda,
            self.max_halvings,
        )?;
        Ok(Proposal {
            h: cert.h,
            certificate: Some(cert.step_certificate()),
            increment: cert.increment,
            certified: true,
        })
    }
}

/// Largest step passing the decrease test, found by doubling from `tol`
/// until the test fails and then bisecting to width `tol`. Returns `h_cap`
/// when every tried step up to it is accepted.
pub fn max_decrease_step(
    lyap: &LyapunovFunction,
    tableau: &ButcherTableau,
    field: &VectorField,
    x: &State,
    lambda: f64,
    tol: f64,
    h_cap: f64,
) -> Result<f64> {
    if !(tol > 0.0 && h_cap > tol) {
        return Err(Error::InvalidParameter("need 0 < tol < h_cap"));
    }
    let ok = |h: f64| decrease_test(lyap, tableau, field, x, h, lambda).accepted;
    let (mut lo, mut hi) = if ok(tol) {
        let mut lo = tol;
        loop {
            let next = 2.0 * lo;
            if next >= h_cap {
                if ok(h_cap) {
                    return Ok(h_cap);
                }
                break (lo, h_cap);
            }
            if !ok(next) {
                break (lo, next);
            }
            lo = next;
        }
    } else {
        (0.0, tol)
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
