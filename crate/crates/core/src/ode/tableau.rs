use alloc::vec::Vec;

use crate::linalg::max_row_sum;
use crate::{Error, Matrix, Result, State};

/// Coefficients `(a_ij, b_i)` of an `s`-stage Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: &'static str,
    a: Matrix,
    b: State,
    order: u32,
    explicit: bool,
}

impl ButcherTableau {
    /// Builds a tableau, checking shapes and consistency `sum b_i = 1`.
    pub fn new(name: &'static str, a: Matrix, b: State, order: u32) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::InvalidParameter("tableau needs at least one stage"));
        }
        if a.nrows() != s || a.ncols() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: a.nrows().max(a.ncols()),
            });
        }
        if (b.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("weights must sum to one"));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("order must be positive"));
        }
        let explicit = (0..s).all(|i| (i..s).all(|j| a[(i, j)] == 0.0));
        Ok(Self {
            name,
            a,
            b,
            order,
            explicit,
        })
    }

    fn build(name: &'static str, s: usize, a: &[f64], b: &[f64], order: u32) -> Self {
        Self::new(
            name,
            Matrix::from_row_slice(s, s, a),
            State::from_row_slice(b),
            order,
        )
        .expect("built-in tableau")
    }

    pub fn explicit_euler() -> Self {
        Self::build("euler", 1, &[0.0], &[1.0], 1)
    }

    pub fn implicit_euler() -> Self {
        Self::build("implicit-euler", 1, &[1.0], &[1.0], 1)
    }

    pub fn heun() -> Self {
        Self::build("heun", 2, &[0.0, 0.0, 1.0, 0.0], &[0.5, 0.5], 2)
    }

    /// Explicit midpoint rule.
    pub fn improved_polygon() -> Self {
        Self::build("improved-polygon", 2, &[0.0, 0.0, 0.5, 0.0], &[0.0, 1.0], 2)
    }

    pub fn kutta3() -> Self {
        Self::build(
            "kutta3",
            3,
            &[0.0, 0.0, 0.0, 0.5, 0.0, 0.0, -1.0, 2.0, 0.0],
            &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            3,
        )
    }

    pub fn rk4() -> Self {
        Self::build(
            "rk4",
            4,
            &[
                0.0, 0.0, 0.0, 0.0, //
                0.5, 0.0, 0.0, 0.0, //
                0.0, 0.5, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
            &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            4,
        )
    }

    /// Looks a built-in tableau up by name.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "euler" | "explicit-euler" => Self::explicit_euler(),
            "implicit-euler" => Self::implicit_euler(),
            "heun" => Self::heun(),
            "improved-polygon" | "midpoint" => Self::improved_polygon(),
            "kutta3" => Self::kutta3(),
            "rk4" => Self::rk4(),
            _ => return None,
        })
    }

    pub fn builtin() -> Vec<Self> {
        alloc::vec![
            Self::explicit_euler(),
            Self::implicit_euler(),
            Self::heun(),
            Self::improved_polygon(),
            Self::kutta3(),
            Self::rk4(),
        ]
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &State {
        &self.b
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit
    }

    /// `|A| = max_i sum_j |a_ij|`.
    pub fn abs_row_sum(&self) -> f64 {
        max_row_sum(&self.a)
    }

    /// `sum_i |b_i|`.
    pub fn abs_weight_sum(&self) -> f64 {
        self.b.iter().map(|v| v.abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_consistent() {
        for t in ButcherTableau::builtin() {
            assert!((t.b().sum() - 1.0).abs() < 1e-15, "{}", t.name());
        }
        assert!(ButcherTableau::heun().is_explicit());
        assert!(!ButcherTableau::implicit_euler().is_explicit());
        assert_eq!(ButcherTableau::explicit_euler().abs_row_sum(), 0.0);
        assert_eq!(ButcherTableau::implicit_euler().abs_row_sum(), 1.0);
        assert_eq!(ButcherTableau::kutta3().abs_row_sum(), 3.0);
    }

    #[test]
    fn rejects_inconsistent_weights() {
        let r = ButcherTableau::new(
            "bad",
            Matrix::zeros(2, 2),
            State::from_row_slice(&[0.5, 0.4]),
            1,
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(
            ButcherTableau::by_name("midpoint").unwrap().name(),
            "improved-polygon"
        );
        assert!(ButcherTableau::by_name("radau").is_none());
    }
}
