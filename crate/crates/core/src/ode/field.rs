use alloc::sync::Arc;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{check_dim, symmetric_norm};
use crate::sampling::ball_points;
use crate::{Error, Matrix, Result, State};

type MapFn = Arc<dyn Fn(&State) -> State + Send + Sync>;
type JacFn = Arc<dyn Fn(&State) -> Matrix + Send + Sync>;
type GammaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type LipFn = Arc<dyn Fn(&State, f64) -> f64 + Send + Sync>;

/// An estimate together with a flag telling whether it is a proven bound
/// (`certified`) or a sampled guess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub certified: bool,
}

/// Right-hand side `f` of `x' = f(x)` with `f(0) = 0`.
///
/// Besides `f` itself a field may carry its Jacobian, a growth function
/// `gamma` with `|f(x)| <= |x| gamma(|x|)`, and a local Lipschitz bound
/// `L(x, lambda)` valid on the ball `|y - x| <= lambda |x|`. When the
/// estimators are missing, sampled fallbacks can be enabled with
/// [`VectorField::with_numeric_fallback`].
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    eval: MapFn,
    jacobian: Option<JacFn>,
    gamma: Option<GammaFn>,
    local_lipschitz: Option<LipFn>,
    linear: Option<Matrix>,
    fallback_samples: Option<usize>,
}

impl core::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .field("jacobian", &self.jacobian.is_some())
            .field("gamma", &self.gamma.is_some())
            .field("local_lipschitz", &self.local_lipschitz.is_some())
            .field("linear", &self.linear.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&State) -> State + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
            jacobian: None,
            gamma: None,
            local_lipschitz: None,
            linear: None,
            fallback_samples: None,
        }
    }

    /// `f(x) = A x` with exact Jacobian, `gamma = L = |A|_2`.
    pub fn linear(a: Matrix) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "linear field needs a square matrix");
        let norm = a.clone().svd(false, false).singular_values.max();
        let am = a.clone();
        let aj = a.clone();
        Self {
            dim: a.nrows(),
            eval: Arc::new(move |x| &am * x),
            jacobian: Some(Arc::new(move |_| aj.clone())),
            gamma: Some(Arc::new(move |_| norm)),
            local_lipschitz: Some(Arc::new(move |_, _| norm)),
            linear: Some(a),
            fallback_samples: None,
        }
    }

    pub fn with_jacobian(mut self, j: impl Fn(&State) -> Matrix + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn with_gamma(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.gamma = Some(Arc::new(g));
        self
    }

    pub fn with_local_lipschitz(
        mut self,
        l: impl Fn(&State, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.local_lipschitz = Some(Arc::new(l));
        self
    }

    /// Enables sampled estimators for whichever of `gamma` and the local
    /// Lipschitz bound is missing. Sampled values are inflated by 2 and
    /// reported as non-certified.
    pub fn with_numeric_fallback(mut self, samples: usize) -> Self {
        self.fallback_samples = Some(samples.max(1));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The matrix of a field built with [`VectorField::linear`].
    pub fn linear_matrix(&self) -> Option<&Matrix> {
        self.linear.as_ref()
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, x: &State) -> State {
        (self.eval)(x)
    }

    pub fn try_eval(&self, x: &State) -> Result<State> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval(x))
    }

    pub fn jacobian(&self, x: &State) -> Option<Matrix> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    /// `gamma(s)`, exact when supplied, sampled otherwise.
    pub fn gamma(&self, s: f64) -> Option<Estimate> {
        if let Some(g) = &self.gamma {
            return Some(Estimate {
                value: g(s),
                certified: true,
            });
        }
        let samples = self.fallback_samples?;
        let center = State::zeros(self.dim);
        let radius = s.max(1e-12);
        let mut best = 0.0_f64;
        for y in ball_points(&center, radius, samples) {
            let ny = y.norm();
            if ny > 0.0 {
                best = best.max(self.eval(&y).norm() / ny);
            }
        }
        Some(Estimate {
            value: 2.0 * best,
            certified: false,
        })
    }

    /// Lipschitz bound of `f` on `{y : |y - x| <= lambda |x|}`.
    pub fn local_lipschitz(&self, x: &State, lambda: f64) -> Option<Estimate> {
        if let Some(l) = &self.local_lipschitz {
            return Some(Estimate {
                value: l(x, lambda),
                certified: true,
            });
        }
        let samples = self.fallback_samples?;
        Some(Estimate {
            value: 2.0 * self.sampled_lipschitz(x, (lambda * x.norm()).max(1e-8), samples),
            certified: false,
        })
    }

    /// Largest two-point quotient `|f(y) - f(z)| / |y - z|` over pairs of
    /// consecutive low-discrepancy samples of the ball (plus the center).
    pub fn sampled_lipschitz(&self, center: &State, radius: f64, samples: usize) -> f64 {
        let mut pts: alloc::vec::Vec<State> = ball_points(center, radius, samples).collect();
        pts.push(center.clone());
        let vals: alloc::vec::Vec<State> = pts.iter().map(|p| self.eval(p)).collect();
        let mut best = 0.0_f64;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = (&pts[i] - &pts[j]).norm();
                if d > 1e-14 * radius {
                    best = best.max((&vals[i] - &vals[j]).norm() / d);
                }
            }
        }
        best
    }

    /// Spectral norm of the Jacobian at `x`, if a Jacobian is available.
    pub fn jacobian_norm(&self, x: &State) -> Option<f64> {
        let j = self.jacobian(x)?;
        let jtj = j.transpose() * &j;
        Some(symmetric_norm(&jtj).sqrt())
    }
}

pub(crate) fn require(est: Option<Estimate>, what: &'static str) -> Result<Estimate> {
    est.ok_or(Error::MissingEstimator(what))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn linear_field_estimators() {
        let f = VectorField::linear(Matrix::from_row_slice(2, 2, &[-1.0, 1.0, -1.0, -1.0]));
        let x = State::from_vec(vec![1.0, 0.0]);
        assert_eq!(f.eval(&x), State::from_vec(vec![-1.0, -1.0]));
        let g = f.gamma(3.0).unwrap();
        assert!(g.certified);
        assert!((g.value - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(f.try_eval(&State::zeros(3)).is_err());
    }

    #[test]
    fn missing_estimators_without_fallback() {
        let f = VectorField::new(1, |x| -x);
        assert!(f.gamma(1.0).is_none());
        assert!(f
            .local_lipschitz(&State::from_element(1, 1.0), 0.5)
            .is_none());
    }

    #[test]
    fn fallback_estimates_are_conservative_and_flagged() {
        let f = VectorField::new(2, |x| -x * 3.0).with_numeric_fallback(64);
        let x = State::from_vec(vec![1.0, 2.0]);
        let l = f.local_lipschitz(&x, 0.5).unwrap();
        assert!(!l.certified);
        assert!(l.value >= 3.0 && l.value <= 6.0 + 1e-9);
        let g = f.gamma(2.0).unwrap();
        assert!(g.value >= 3.0);
    }
}
