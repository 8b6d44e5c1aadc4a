use alloc::sync::Arc;

use crate::ode::VectorField;
use crate::{Matrix, State};

type ScalarFn = Arc<dyn Fn(&State) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&State) -> State + Send + Sync>;
type HessFn = Arc<dyn Fn(&State) -> Matrix + Send + Sync>;

/// A Lyapunov function `V` with its gradient and, optionally, Hessian and
/// a user decrease rate `W`.
#[derive(Clone)]
pub struct LyapunovFunction {
    eval: ScalarFn,
    grad: GradFn,
    hess: Option<HessFn>,
    constant_hessian: bool,
    convex: bool,
    decrease_rate: Option<ScalarFn>,
}

impl core::fmt::Debug for LyapunovFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LyapunovFunction")
            .field("hess", &self.hess.is_some())
            .field("constant_hessian", &self.constant_hessian)
            .field("convex", &self.convex)
            .finish()
    }
}

impl LyapunovFunction {
    pub fn new(
        eval: impl Fn(&State) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&State) -> State + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            hess: None,
            constant_hessian: false,
            convex: false,
            decrease_rate: None,
        }
    }

    /// `V(x) = x' P x` (convex, constant Hessian `2P`).
    pub fn quadratic(p: Matrix) -> Self {
        let pe = p.clone();
        let pg = p.clone();
        let h = &p * 2.0;
        Self {
            eval: Arc::new(move |x| x.dot(&(&pe * x))),
            grad: Arc::new(move |x| (&pg * x) * 2.0),
            hess: Some(Arc::new(move |_| h.clone())),
            constant_hessian: true,
            convex: true,
            decrease_rate: None,
        }
    }

    /// `V(x) = c |x|^2`.
    pub fn scaled_norm_squared(dim: usize, c: f64) -> Self {
        Self::quadratic(Matrix::identity(dim, dim) * c)
    }

    pub fn with_hessian(mut self, h: impl Fn(&State) -> Matrix + Send + Sync + 'static) -> Self {
        self.hess = Some(Arc::new(h));
        self
    }

    /// Marks the Hessian as independent of the state; maxima over step grids
    /// are then evaluated once without inflation.
    pub fn with_constant_hessian(mut self, h: Matrix) -> Self {
        self.hess = Some(Arc::new(move |_| h.clone()));
        self.constant_hessian = true;
        self
    }

    pub fn convex(mut self, convex: bool) -> Self {
        self.convex = convex;
        self
    }

    pub fn with_decrease_rate(mut self, w: impl Fn(&State) -> f64 + Send + Sync + 'static) -> Self {
        self.decrease_rate = Some(Arc::new(w));
        self
    }

    pub fn eval(&self, x: &State) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &State) -> State {
        (self.grad)(x)
    }

    pub fn hess(&self, x: &State) -> Option<Matrix> {
        self.hess.as_ref().map(|h| h(x))
    }

    pub fn has_hessian(&self) -> bool {
        self.hess.is_some()
    }

    pub fn has_constant_hessian(&self) -> bool {
        self.constant_hessian
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// User decrease rate `W(x)`, if supplied.
    pub fn decrease_rate(&self, x: &State) -> Option<f64> {
        self.decrease_rate.as_ref().map(|w| w(x))
    }

    /// `L_f V(x) = grad V(x) . f(x)`.
    pub fn lie_derivative(&self, field: &VectorField, x: &State) -> f64 {
        self.grad(x).dot(&field.eval(x))
    }

    /// `c V`, with gradient and Hessian scaled accordingly.
    pub fn scaled(&self, c: f64) -> Self {
        let e = self.eval.clone();
        let g = self.grad.clone();
        let mut out = Self::new(move |x| c * e(x), move |x| g(x) * c).convex(self.convex);
        if let Some(h) = self.hess.clone() {
            out.hess = Some(Arc::new(move |x| h(x) * c));
            out.constant_hessian = self.constant_hessian;
        }
        if let Some(w) = self.decrease_rate.clone() {
            out.decrease_rate = Some(Arc::new(move |x| c * w(x)));
        }
        out
    }
}
