//! Step-size selection for Runge-Kutta integration that preserves the
//! asymptotic stability of an equilibrium.
//!
//! A numerical scheme is modelled as a hybrid system: between sampling
//! instants `tau_i` the state moves along the constant increment
//! `F(h_i, x(tau_i))`, and the step `h_i` is chosen by a feedback law
//! ("step controller") evaluated at the current state. The controllers in
//! this crate pick `h_i` so that a Lyapunov function of the continuous
//! system keeps decreasing along the numerical trajectory, or, for cascade
//! systems, so that a partitioned semi-implicit scheme inherits the
//! input-to-state stability of each link.
//!
//! # Layout
//!
//! - [`ode`]: vector fields, Butcher tableaus, Runge-Kutta increments, the
//!   hybrid trajectory model, the generic `advance` loop and a high-accuracy
//!   reference integrator used as an oracle.
//! - [`lyapunov`]: Lyapunov functions, the decrease test and halving
//!   controller, closed-form explicit-Euler step bounds and trajectory
//!   certification.
//! - [`implicit`]: implicit Euler with unconditional decrease for convex
//!   Lyapunov functions.
//! - [`cascade`]: the partitioned scheme for triangular cascades, its ISS
//!   estimate and the upwind advection chain.
//! - [`global_error`]: global discretization error tracking and the
//!   error-budget step rule.
//! - [`applications`]: the planar test systems, the stiff linear experiment,
//!   the constrained-optimization flow and the maximum-step sweep.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in the companion `lyastep` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod applications;
pub mod cascade;
pub mod error;
pub mod global_error;
pub mod implicit;
pub mod linalg;
pub mod lyapunov;
pub mod ode;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{Matrix, State};
