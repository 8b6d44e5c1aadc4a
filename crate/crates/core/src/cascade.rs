//! Triangular cascades integrated by the partitioned semi-implicit scheme
//!
//! ```text
//! x_i(t + h) = (x_i(t) + h f_i(z(t), x_1(t), ..., x_{i-1}(t))) / (1 + h a_i(x_i(t)))
//! ```
//!
//! together with the scalar ISS estimate behind it and the upwind
//! advection chain.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::check_dim;
use crate::ode::{rk_increment, ButcherTableau, VectorField};
use crate::{Error, Result, State};

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `f_i(z, x_1, ..., x_{i-1})`.
pub type Coupling = Arc<dyn Fn(&State, &[f64]) -> f64 + Send + Sync>;

/// A stable one-step scheme for the driving subsystem `z' = f_0(z)`.
pub trait SubsystemScheme: Send + Sync {
    fn dim(&self) -> usize;
    fn step(&self, z: &State, h: f64) -> Result<State>;
}

/// `z + h F(h, z)` for a Runge-Kutta tableau.
pub struct RkScheme {
    pub tableau: ButcherTableau,
    pub field: VectorField,
}

impl SubsystemScheme for RkScheme {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn step(&self, z: &State, h: f64) -> Result<State> {
        let inc = rk_increment(&self.tableau, &self.field, z, h)?;
        let mut out = z.clone();
        out.axpy(h, &inc, 1.0);
        Ok(out)
    }
}

/// `z' = f_0(z)`, `x_i' = -a_i(x_i) x_i + f_i(z, x_1, ..., x_{i-1})` with
/// `a_i >= L_i > 0`.
#[derive(Clone)]
pub struct CascadeSystem {
    z_scheme: Option<Arc<dyn SubsystemScheme>>,
    a: Vec<ScalarMap>,
    f: Vec<Coupling>,
    l: Vec<f64>,
}

impl core::fmt::Debug for CascadeSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CascadeSystem")
            .field("z_dim", &self.z_dim())
            .field("n", &self.a.len())
            .field("l", &self.l)
            .finish()
    }
}

impl CascadeSystem {
    pub fn new(a: Vec<ScalarMap>, f: Vec<Coupling>, l: Vec<f64>) -> Result<Self> {
        let n = a.len();
        check_dim(n, f.len())?;
        check_dim(n, l.len())?;
        if l.iter().any(|&li| !(li > 0.0)) {
            return Err(Error::InvalidParameter("decay bounds L_i must be positive"));
        }
        Ok(Self {
            z_scheme: None,
            a,
            f,
            l,
        })
    }

    pub fn with_subsystem(mut self, scheme: Arc<dyn SubsystemScheme>) -> Self {
        self.z_scheme = Some(scheme);
        self
    }

    pub fn z_dim(&self) -> usize {
        self.z_scheme.as_ref().map_or(0, |s| s.dim())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn decay_bounds(&self) -> &[f64] {
        &self.l
    }

    pub fn a(&self, i: usize, y: f64) -> f64 {
        (self.a[i])(y)
    }

    /// Checks `a_i(y) >= L_i` at the given sample points and
    /// `f_i(0, ..., 0) = 0`.
    pub fn check_hypotheses(&self, samples: &[f64]) -> Result<()> {
        for i in 0..self.len() {
            if samples.iter().any(|&y| self.a(i, y) < self.l[i]) {
                return Err(Error::HypothesisViolated("a_i(y) >= L_i"));
            }
            let z = State::zeros(self.z_dim());
            let zeros = alloc::vec![0.0; i];
            if (self.f[i])(&z, &zeros) != 0.0 {
                return Err(Error::HypothesisViolated("f_i(0) = 0"));
            }
        }
        Ok(())
    }
}

/// One step of the partitioned scheme. Every `f_i` and `a_i` reads the
/// pre-step values.
pub fn partitioned_step(
    sys: &CascadeSystem,
    z: &State,
    x: &State,
    h: f64,
) -> Result<(State, State)> {
    check_dim(sys.len(), x.len())?;
    check_dim(sys.z_dim(), z.len())?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("step must be positive"));
    }
    let old = x.as_slice();
    let mut next = State::zeros(x.len());
    for i in 0..sys.len() {
        let drive = (sys.f[i])(z, &old[..i]);
        next[i] = (old[i] + h * drive) / (1.0 + h * sys.a(i, old[i]));
    }
    let z_next = match &sys.z_scheme {
        Some(s) => s.step(z, h)?,
        None => z.clone(),
    };
    Ok((z_next, next))
}

/// Node values of a cascade run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub taus: Vec<f64>,
    pub steps: Vec<f64>,
    pub z: Vec<State>,
    pub x: Vec<State>,
}

impl ChainRun {
    pub fn final_sup_norm(&self) -> f64 {
        self.x.last().map_or(0.0, |x| x.amax())
    }
}

/// Applies [`partitioned_step`] with the steps drawn from `next_step`
/// until the sup norm of `x` drops below `stop_below` or `max_steps` steps
/// were taken.
pub fn run_chain(
    sys: &CascadeSystem,
    z0: State,
    x0: State,
    mut next_step: impl FnMut(usize) -> f64,
    stop_below: f64,
    max_steps: usize,
) -> Result<ChainRun> {
    let mut run = ChainRun {
        taus: alloc::vec![0.0],
        steps: Vec::new(),
        z: alloc::vec![z0],
        x: alloc::vec![x0],
    };
    for k in 0..max_steps {
        let x = run.x.last().expect("start node");
        let z = run.z.last().expect("start node");
        if x.amax() < stop_below && z.amax() < stop_below {
            break;
        }
        let h = next_step(k);
        let (zn, xn) = partitioned_step(sys, z, x, h)?;
        if !xn.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("chain state became non-finite"));
        }
        run.taus.push(run.taus[k] + h);
        run.steps.push(h);
        run.z.push(zn);
        run.x.push(xn);
    }
    Ok(run)
}

/// Largest `sigma` with `1 / (1 + s) <= exp(-sigma s)` on `[0, r L]`,
/// i.e. `ln(1 + rL) / (rL)`.
pub fn sigma_constant(r: f64, l: f64) -> Result<f64> {
    if !(r > 0.0 && l > 0.0) {
        return Err(Error::InvalidParameter("r and L must be positive"));
    }
    let s = r * l;
    if s < 1e-4 {
        Ok(1.0 - s / 2.0 + s * s / 3.0 - s * s * s / 4.0)
    } else {
        Ok(s.ln_1p() / s)
    }
}

/// Outcome of [`iss_estimate_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssCheck {
    pub sigma: f64,
    /// `exp(sigma r)|x0| exp(-sigma t) + (1+e)/(e sigma L) sup|v|`.
    pub holds_sigma: bool,
    pub min_slack_sigma: f64,
    /// Same with `sigma L` in both exponentials.
    pub holds_sigma_l: bool,
    pub min_slack_sigma_l: f64,
}

/// Simulates the scalar recurrence
/// `x(tau_{i+1}) = (x(tau_i) + h_i v(tau_i)) / (1 + h_i a(x(tau_i)))`,
/// linear in between, and checks the ISS estimate at every node and at the
/// midpoint and right end of every step.
pub fn iss_estimate_check(
    a: &dyn Fn(f64) -> f64,
    l: f64,
    r: f64,
    steps: &[f64],
    v: &dyn Fn(f64) -> f64,
    x0: f64,
) -> Result<IssCheck> {
    if steps.iter().any(|&h| !(h > 0.0 && h <= r)) {
        return Err(Error::InvalidParameter("steps must lie in (0, r]"));
    }
    let sigma = sigma_constant(r, l)?;
    let e = core::f64::consts::E;
    let gain = (1.0 + e) / (e * sigma * l);
    let bound_sigma =
        |t: f64, vsup: f64| (sigma * r).exp() * x0.abs() * (-sigma * t).exp() + gain * vsup;
    let bound_sigma_l =
        |t: f64, vsup: f64| (sigma * l * r).exp() * x0.abs() * (-sigma * l * t).exp() + gain * vsup;

    let mut slack_p = f64::INFINITY;
    let mut slack_d = f64::INFINITY;
    let mut check = |t: f64, x: f64, vsup: f64| {
        slack_p = slack_p.min(bound_sigma(t, vsup) - x.abs());
        slack_d = slack_d.min(bound_sigma_l(t, vsup) - x.abs());
    };

    let mut tau = 0.0;
    let mut x = x0;
    let mut vsup: f64 = 0.0;
    check(0.0, x, v(0.0).abs());
    for &h in steps {
        let vi = v(tau);
        vsup = vsup.max(vi.abs());
        let ai = a(x);
        let slope = (-ai * x + vi) / (1.0 + h * ai);
        check(tau + 0.5 * h, x + 0.5 * h * slope, vsup);
        let next = (x + h * vi) / (1.0 + h * ai);
        // right limit of the segment, before v is sampled again
        check(tau + h, next, vsup);
        tau += h;
        x = next;
    }
    let tol = |s: f64| s >= -1e-12;
    Ok(IssCheck {
        sigma,
        holds_sigma: tol(slack_p),
        min_slack_sigma: slack_p,
        holds_sigma_l: tol(slack_d),
        min_slack_sigma_l: slack_d,
    })
}

/// Backward-difference semi-discretization of
/// `x_t + c x_z = b(x) x` on `n` cells with zero inflow:
/// `a_i(y) = c/dz - b(y)`, `f_i = (c/dz) x_{i-1}`, `L_i = c/dz - K`.
///
/// Refused unless `K dz < c`. `b <= K` is spot-checked on `[-10, 10]`.
pub fn advection_chain(n: usize, c: f64, b: ScalarMap, k: f64) -> Result<CascadeSystem> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one grid point"));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter("speed must be positive"));
    }
    let dz = 1.0 / n as f64;
    if !(k * dz < c) {
        return Err(Error::CflViolation {
            k_dz: k * dz,
            speed: c,
        });
    }
    if (0..=400).any(|j| b(-10.0 + 0.05 * j as f64) > k) {
        return Err(Error::HypothesisViolated("b(y) <= K"));
    }
    let cd = c / dz;
    let mut a: Vec<ScalarMap> = Vec::with_capacity(n);
    let mut f: Vec<Coupling> = Vec::with_capacity(n);
    for i in 0..n {
        let bi = b.clone();
        a.push(Arc::new(move |y| cd - bi(y)));
        if i == 0 {
            f.push(Arc::new(|_, _| 0.0));
        } else {
            f.push(Arc::new(move |_, prev: &[f64]| cd * prev[prev.len() - 1]));
        }
    }
    CascadeSystem::new(a, f, alloc::vec![cd - k; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_chain(n: usize) -> CascadeSystem {
        let a: Vec<ScalarMap> = (0..n)
            .map(|_| Arc::new(|_: f64| 1.0) as ScalarMap)
            .collect();
        let f: Vec<Coupling> = (0..n)
            .map(|i| {
                if i == 0 {
                    Arc::new(|_: &State, _: &[f64]| 0.0) as Coupling
                } else {
                    Arc::new(|_: &State, p: &[f64]| p[p.len() - 1]) as Coupling
                }
            })
            .collect();
        CascadeSystem::new(a, f, vec![1.0; n]).unwrap()
    }

    #[test]
    fn partitioned_examples() {
        let z = State::zeros(0);
        let (_, x) =
            partitioned_step(&unit_chain(1), &z, &State::from_element(1, 1.0), 1.0).unwrap();
        assert_eq!(x[0], 0.5);
        let (_, x) =
            partitioned_step(&unit_chain(2), &z, &State::from_vec(vec![1.0, 0.0]), 1.0).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 0.5]);
        let (_, x) = partitioned_step(&unit_chain(3), &z, &State::zeros(3), 1.0).unwrap();
        assert_eq!(x, State::zeros(3));
    }

    #[test]
    fn sigma_values() {
        assert!((sigma_constant(1.0, 1.0).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert!((sigma_constant(10.0, 1.0).unwrap() - 11.0_f64.ln() / 10.0).abs() < 1e-15);
        let s = 1e-6;
        assert!((sigma_constant(s, 1.0).unwrap() - (1.0 - s / 2.0)).abs() < 1e-12);
        assert!(sigma_constant(0.0, 1.0).is_err());
    }

    #[test]
    fn iss_examples() {
        let a = |_: f64| 2.0;
        let steps = [0.5, 1.0, 0.25, 2.0, 0.1];
        let chk = iss_estimate_check(&a, 2.0, 2.0, &steps, &|_| 0.0, 3.0).unwrap();
        assert!(chk.holds_sigma_l && chk.min_slack_sigma_l > 0.0);
        let chk = iss_estimate_check(&a, 2.0, 2.0, &steps, &|_| 0.7, 0.0).unwrap();
        assert!(chk.holds_sigma_l && chk.holds_sigma);
        let chk = iss_estimate_check(&a, 2.0, 2.0, &steps, &|_| 0.0, 0.0).unwrap();
        assert_eq!(chk.min_slack_sigma_l, 0.0);
        assert!(iss_estimate_check(&a, 2.0, 1.0, &steps, &|_| 0.0, 1.0).is_err());
    }

    #[test]
    fn advection_examples() {
        let zero: ScalarMap = Arc::new(|_| 0.0);
        let sys = advection_chain(10, 1.0, zero.clone(), 0.0).unwrap();
        let z = State::zeros(0);
        let mut e1 = State::zeros(10);
        e1[0] = 1.0;
        let (_, x) = partitioned_step(&sys, &z, &e1, 0.1).unwrap();
        assert_eq!(x[0], 0.5);
        assert_eq!(x[1], 0.5);
        assert!(x.rows(2, 8).iter().all(|&v| v == 0.0));
        assert!(matches!(
            advection_chain(10, 1.0, zero, 10.0),
            Err(Error::CflViolation { .. })
        ));
        let big: ScalarMap = Arc::new(|y: f64| y);
        assert!(matches!(
            advection_chain(10, 1.0, big, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn driven_chain_with_subsystem() {
        let drive = Arc::new(RkScheme {
            tableau: ButcherTableau::implicit_euler(),
            field: VectorField::linear(crate::Matrix::from_element(1, 1, -1.0)),
        });
        let a: Vec<ScalarMap> = vec![Arc::new(|_| 1.0)];
        let f: Vec<Coupling> = vec![Arc::new(|z: &State, _: &[f64]| z[0])];
        let sys = CascadeSystem::new(a, f, vec![1.0])
            .unwrap()
            .with_subsystem(drive);
        sys.check_hypotheses(&[-1.0, 0.0, 1.0]).unwrap();
        let run = run_chain(
            &sys,
            State::from_element(1, 1.0),
            State::from_element(1, 0.0),
            |_| 0.5,
            1e-8,
            10_000,
        )
        .unwrap();
        assert!(run.final_sup_norm() < 1e-8);
    }
}
