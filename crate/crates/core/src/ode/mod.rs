//! Runge-Kutta stepping, the hybrid trajectory model and the reference
//! oracle.

mod advance;
mod field;
mod reference;
mod step;
mod tableau;
mod trajectory;

pub use advance::{
    advance, advance_with, AdvanceOptions, ConstantStep, FnController, Proposal, StepController,
};
pub use field::{Estimate, VectorField};
pub use reference::{reference_flow, reference_solve, ReferenceSolution};
pub use step::{
    default_phi, growth_bound, rk_increment, rk_increment_with, solve_stages, StageSolve, Stages,
    StepBound, StepBoundConfig,
};
pub use tableau::ButcherTableau;
pub use trajectory::{HybridTrajectory, Step, StepCertificate};

pub(crate) use step::unique_solvability_phi;
