//! Largest decrease-test step along the line `x = (x1, 1)` for several
//! explicit schemes.

use alloc::vec::Vec;

use super::systems::f4;
use crate::lyapunov::max_decrease_step;
use crate::ode::ButcherTableau;
use crate::{Result, State};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x1: f64,
    /// One entry per tableau, in the order given.
    pub max_steps: Vec<f64>,
}

/// The four explicit schemes of the sweep.
pub fn sweep_tableaus() -> Vec<ButcherTableau> {
    alloc::vec![
        ButcherTableau::explicit_euler(),
        ButcherTableau::heun(),
        ButcherTableau::improved_polygon(),
        ButcherTableau::kutta3(),
    ]
}

/// Bisected maximum step at `points` equally spaced `x1` in
/// `[x1_min, x1_max]` for the quadratic-nonlinear test system.
pub fn max_step_sweep(
    tableaus: &[ButcherTableau],
    x1_min: f64,
    x1_max: f64,
    points: usize,
    lambda: f64,
    tol: f64,
) -> Result<Vec<SweepRow>> {
    let sys = f4();
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let x1 = if points == 1 {
            x1_min
        } else {
            x1_min + (x1_max - x1_min) * k as f64 / (points - 1) as f64
        };
        let x = State::from_row_slice(&[x1, 1.0]);
        let max_steps = tableaus
            .iter()
            .map(|t| max_decrease_step(&sys.lyapunov, t, &sys.field, &x, lambda, tol, 100.0))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(SweepRow { x1, max_steps });
    }
    Ok(rows)
}
