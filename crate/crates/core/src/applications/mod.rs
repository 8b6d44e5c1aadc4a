//! Concrete systems and experiments.

pub mod nlp;
pub mod stiff;
pub mod sweep;
pub mod systems;

pub use nlp::{nlp_flow, nlp_solve, quadratic_kkt, NlpFlow, NlpResult, Objective};
pub use stiff::{stiff_experiment, stiff_matrix, stiff_phi, StiffRun};
pub use sweep::{max_step_sweep, sweep_tableaus, SweepRow};
pub use systems::{euler_f2_limit_radius, example_fields, PlanarSystem};
