//! Lyapunov functions and the step controllers built on them.

mod bounds;
mod certify;
mod decrease;
mod function;

pub use bounds::{
    euler_q_phi, euler_q_phi_with, k1_bound_euler, k1_phi, linear_phi, order_p_phi, OrderPBound,
    OrderPOptions, DEFAULT_H_SAMPLES, GRID_INFLATION,
};
pub use certify::{certify_trajectory, CertificationReport, CertificationRow};
pub use decrease::{
    decrease_test, halving_controller, max_decrease_step, within_threshold, DecreaseCertificate,
    HalvingController, DECREASE_SLACK,
};
pub use function::LyapunovFunction;
