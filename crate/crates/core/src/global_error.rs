//! Global discretization error `e(t) = z(t, x0) - x(t)` and the step rule
//! that keeps it below a prescribed bound.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ode::{reference_flow, rk_increment, ButcherTableau, HybridTrajectory, VectorField};
use crate::{Error, Result, State};

/// Constants of an exponentially stable problem and its scheme.
///
/// `|z(t, z0)| <= exp(-sigma t) a(|z0|)`, the numerical solution decays at
/// rate `lambda sigma`, `F(h, .)` is `L`-Lipschitz on the relevant ball
/// and the defect satisfies `|d~(h, z)| <= h^p K max|z|`.
#[derive(Clone)]
pub struct ErrorBudget {
    pub epsilon: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub a_gain: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub x0_norm: f64,
    pub lipschitz: f64,
    pub defect_constant: f64,
    pub order: u32,
}

impl core::fmt::Debug for ErrorBudget {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ErrorBudget")
            .field("epsilon", &self.epsilon)
            .field("sigma", &self.sigma)
            .field("lambda", &self.lambda)
            .field("x0_norm", &self.x0_norm)
            .field("lipschitz", &self.lipschitz)
            .field("defect_constant", &self.defect_constant)
            .field("order", &self.order)
            .finish()
    }
}

impl ErrorBudget {
    /// Budget with the identity gain `a(s) = s`.
    pub fn linear_gain(
        epsilon: f64,
        sigma: f64,
        lambda: f64,
        x0_norm: f64,
        lipschitz: f64,
        defect_constant: f64,
        order: u32,
    ) -> Result<Self> {
        let b = Self {
            epsilon,
            sigma,
            lambda,
            a_gain: Arc::new(|s| s),
            x0_norm,
            lipschitz,
            defect_constant,
            order,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn with_gain(mut self, a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        self.a_gain = Arc::new(a);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.epsilon,
            self.sigma,
            self.lipschitz,
            self.defect_constant,
        ];
        if pos.iter().any(|v| !(*v > 0.0)) || self.order == 0 {
            return Err(Error::InvalidParameter("budget constants must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidParameter("lambda must lie in (0, 1]"));
        }
        if !(self.x0_norm >= 0.0) {
            return Err(Error::InvalidParameter("|x0| must be non-negative"));
        }
        let a = &self.a_gain;
        if a(0.0) != 0.0 || (0..16).any(|k| a(k as f64 * 0.5) > a((k + 1) as f64 * 0.5)) {
            return Err(Error::InvalidParameter(
                "gain must vanish at zero and increase",
            ));
        }
        Ok(())
    }

    /// `q = L / sigma`.
    pub fn q(&self) -> f64 {
        self.lipschitz / self.sigma
    }

    pub fn gain(&self) -> f64 {
        (self.a_gain)(self.x0_norm)
    }
}

/// `|e(tau_i)|` against the reference oracle, integrated node to node.
pub fn global_error(traj: &HybridTrajectory, field: &VectorField, tol: f64) -> Result<Vec<f64>> {
    let mut z = traj.states()[0].clone();
    let mut out = Vec::with_capacity(traj.len());
    out.push(0.0);
    for (i, step) in traj.steps().iter().enumerate() {
        z = reference_flow(field, &z, step.h, tol)?;
        out.push((&z - &traj.states()[i + 1]).norm());
    }
    Ok(out)
}

/// `|e(tau_i)|` against a known exact solution `t -> z(t)`.
pub fn global_error_exact(traj: &HybridTrajectory, exact: &dyn Fn(f64) -> State) -> Vec<f64> {
    traj.taus()
        .iter()
        .zip(traj.states())
        .map(|(&t, x)| (exact(t) - x).norm())
        .collect()
}

/// `(D / L)^(lambda sigma / (lambda sigma + L)) (2 a(|x0|))^(L / (lambda sigma + L))`.
pub fn error_bound(budget: &ErrorBudget, d: f64) -> f64 {
    let ls = budget.lambda * budget.sigma;
    let l = budget.lipschitz;
    if d <= 0.0 {
        return 0.0;
    }
    (d / l).powf(ls / (ls + l)) * (2.0 * budget.gain()).powf(l / (ls + l))
}

/// `(D / L)(exp(L tau) - 1)`.
pub fn composition_bound(d: f64, l: f64, tau: f64) -> f64 {
    d / l * (l * tau).exp_m1()
}

/// Exponent `lambda sigma / (lambda sigma + L)` of `D` in [`error_bound`].
pub fn order_reduction_exponent(lambda: f64, sigma: f64, l: f64) -> f64 {
    lambda * sigma / (lambda * sigma + l)
}

/// General rule
/// `min((2L/K)^(1/p) exp(sigma tau / p) (2 a(|x0|) / eps)^(-(q + lambda) / (p lambda)), phi)`.
pub fn error_budget_step(budget: &ErrorBudget, tau: f64, phi: f64) -> f64 {
    let p = budget.order as f64;
    let lam = budget.lambda;
    let base = (2.0 * budget.lipschitz / budget.defect_constant).powf(1.0 / p);
    let growth = (budget.sigma / p * tau).exp();
    let ratio = 2.0 * budget.gain() / budget.epsilon;
    let rule = base * growth * ratio.powf(-(budget.q() + lam) / (p * lam));
    if rule.is_nan() {
        phi
    } else {
        rule.min(phi)
    }
}

/// Explicit-Euler instance
/// `min((4/L) exp(sigma tau) (2 a(|x0|) / eps)^(-(q + lambda) / lambda), phi)`.
pub fn euler_error_budget_step(budget: &ErrorBudget, tau: f64, phi: f64) -> f64 {
    let lam = budget.lambda;
    let ratio = 2.0 * budget.gain() / budget.epsilon;
    let rule =
        4.0 / budget.lipschitz * (budget.sigma * tau).exp() * ratio.powf(-(budget.q() + lam) / lam);
    if rule.is_nan() {
        phi
    } else {
        rule.min(phi)
    }
}

/// Local defect `|(z(h, x) - x) / h - F(h, x)|`.
pub fn defect(
    field: &VectorField,
    tableau: &ButcherTableau,
    x: &State,
    h: f64,
    tol: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("step must be positive"));
    }
    let z = reference_flow(field, x, h, tol)?;
    let inc = rk_increment(tableau, field, x, h)?;
    Ok(((z - x) / h - inc).norm())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{advance, ConstantStep, StepBoundConfig};

    fn budget(eps: f64, lambda: f64) -> ErrorBudget {
        ErrorBudget::linear_gain(eps, 1.0, lambda, 1.0, 1.0, 0.5, 1).unwrap()
    }

    #[test]
    fn one_euler_step_error() {
        let f = VectorField::new(1, |x| -x);
        let cfg = StepBoundConfig::new(1.0, 0.5).unwrap();
        let t = advance(
            &ButcherTableau::explicit_euler(),
            &f,
            &ConstantStep(0.1),
            State::from_element(1, 1.0),
            0.1,
            &cfg,
        )
        .unwrap();
        let e = global_error(&t, &f, 1e-14).unwrap();
        assert!((e[1] - ((-0.1_f64).exp() - 0.9)).abs() < 1e-13);
        let e = global_error_exact(&t, &|s| State::from_element(1, (-s).exp()));
        assert!((e[1] - 0.0048374180359595).abs() < 1e-12);
    }

    #[test]
    fn bound_values() {
        let b = ErrorBudget::linear_gain(0.1, 1.0, 1.0, 1.0, 1.0, 0.5, 1).unwrap();
        assert_eq!(error_bound(&b, 0.0), 0.0);
        assert!((error_bound(&b, 1e-4) - (1e-4_f64).sqrt() * 2.0_f64.sqrt()).abs() < 1e-15);
        let r = error_bound(&b, 2e-4) / error_bound(&b, 1e-4);
        assert!((r - 2.0_f64.powf(0.5)).abs() < 1e-12);
    }

    #[test]
    fn budget_rule_values() {
        let b = budget(0.1, 0.5);
        assert!((error_budget_step(&b, 0.0, 1.0) - 5e-4).abs() < 1e-15);
        assert!((euler_error_budget_step(&b, 0.0, 1.0) - 5e-4).abs() < 1e-15);
        let h = error_budget_step(&b, 1000.0_f64.ln(), 1.0);
        assert!((h - 0.5).abs() < 1e-12);
        let wide = budget(1e300, 0.5);
        assert_eq!(error_budget_step(&wide, 0.0, 0.75), 0.75);
    }

    #[test]
    fn defect_values() {
        let f = VectorField::new(1, |x| -x);
        let e = ButcherTableau::explicit_euler();
        let d = defect(&f, &e, &State::from_element(1, 1.0), 0.1, 1e-14).unwrap();
        assert!((d - (((-0.1_f64).exp() - 1.0) / 0.1 + 1.0).abs()).abs() < 1e-11);
        assert!((d - 0.048374).abs() < 1e-6);
        assert_eq!(defect(&f, &e, &State::zeros(1), 0.1, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_budget() {
        assert!(ErrorBudget::linear_gain(0.0, 1.0, 0.5, 1.0, 1.0, 0.5, 1).is_err());
        assert!(budget(0.1, 0.5).with_gain(|s| -s).is_err());
    }
}
