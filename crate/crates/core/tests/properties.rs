use lyastep_core::applications::stiff_phi;
use lyastep_core::applications::systems::{self, euler_f2_limit_radius};
use lyastep_core::cascade::{advection_chain, iss_estimate_check, run_chain, sigma_constant};
use lyastep_core::global_error::{error_budget_step, euler_error_budget_step, ErrorBudget};
use lyastep_core::implicit::implicit_euler_run;
use lyastep_core::linalg::solve_lyapunov;
use lyastep_core::lyapunov::{
    certify_trajectory, decrease_test, euler_q_phi, halving_controller, linear_phi,
    HalvingController, LyapunovFunction,
};
use lyastep_core::ode::{
    advance, rk_increment, ButcherTableau, ConstantStep, StepBoundConfig, VectorField,
};
use lyastep_core::{Matrix, State};
use proptest::prelude::*;
use std::sync::Arc;

fn planar() -> impl Strategy<Value = State> {
    (-3.0..3.0f64, -3.0..3.0f64)
        .prop_filter("away from origin", |(a, b)| a * a + b * b > 1e-4)
        .prop_map(|(a, b)| State::from_vec(vec![a, b]))
}

/// Random Hurwitz matrix: a skew part plus a negative definite part.
fn hurwitz(dim: usize) -> impl Strategy<Value = Matrix> {
    (
        prop::collection::vec(-2.0..2.0f64, dim * dim),
        prop::collection::vec(0.1..3.0f64, dim),
    )
        .prop_map(move |(w, d)| {
            let w = Matrix::from_vec(dim, dim, w);
            let skew = &w - w.transpose();
            skew - Matrix::from_diagonal(&State::from_vec(d))
        })
}

fn tableau() -> impl Strategy<Value = ButcherTableau> {
    prop::sample::select(ButcherTableau::builtin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_field_increment_is_exact(t in tableau(), h in 1e-3..5.0f64, c in -4.0..4.0f64) {
        let f = VectorField::new(2, move |_| State::from_vec(vec![c, -2.0 * c]));
        let inc = rk_increment(&t, &f, &State::zeros(2), h).unwrap();
        prop_assert!((inc[0] - c).abs() <= 1e-12 * (1.0 + c.abs()));
        prop_assert!((inc[1] + 2.0 * c).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn clock_invariant(a in hurwitz(2), h in 0.01..0.5f64, x in planar()) {
        let f = VectorField::linear(a);
        let cfg = StepBoundConfig::new(10.0, 0.5).unwrap();
        let traj = advance(&ButcherTableau::heun(), &f, &ConstantStep(h), x, 3.0, &cfg).unwrap();
        for (i, s) in traj.steps().iter().enumerate() {
            prop_assert_eq!(traj.taus()[i + 1], traj.taus()[i] + s.h);
            let expect = &traj.states()[i] + &s.increment * s.h;
            prop_assert!((&expect - &traj.states()[i + 1]).norm() <= 1e-14 * (1.0 + expect.norm()));
            let node = traj.interpolate(traj.taus()[i]).unwrap();
            prop_assert!((&node - &traj.states()[i]).norm() <= 1e-14 * (1.0 + node.norm()));
        }
    }

    #[test]
    fn halving_steps_are_sharp(x in planar(), which in 0usize..3, t in tableau()) {
        prop_assume!(t.is_explicit());
        let sys = [systems::f1(), systems::f3(), systems::f4()][which].clone();
        let cert = halving_controller(&sys.lyapunov, &t, &sys.field, &x, 1.0, 0.5, 60).unwrap();
        prop_assert!(cert.accepted);
        let again = decrease_test(&sys.lyapunov, &t, &sys.field, &x, cert.h, 0.5);
        prop_assert!(again.accepted);
        if cert.halvings > 0 {
            let doubled = decrease_test(&sys.lyapunov, &t, &sys.field, &x, 2.0 * cert.h, 0.5);
            prop_assert!(!doubled.accepted);
        }
    }

    #[test]
    fn halving_runs_recertify(x in planar(), which in 0usize..3) {
        let sys = [systems::f1(), systems::f3(), systems::f4()][which].clone();
        let t = ButcherTableau::kutta3();
        let ctl = HalvingController {
            lyap: &sys.lyapunov,
            tableau: &t,
            field: &sys.field,
            lambda: 0.5,
            h_init: 1.0,
            max_halvings: 60,
        };
        let cfg = StepBoundConfig::new(1.0, 0.5).unwrap();
        let traj = advance(&t, &sys.field, &ctl, x, 5.0, &cfg).unwrap();
        let report = certify_trajectory(&sys.lyapunov, &sys.field, &traj, 0.5);
        prop_assert!(report.certified, "{:?}", report.first_violation);
        let vs: Vec<f64> = traj.states().iter().map(|s| sys.lyapunov.eval(s)).collect();
        prop_assert!(vs.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0));
    }

    #[test]
    fn stiff_formula_is_the_linear_bound(x in planar(), lambda in 0.05..0.95f64) {
        let a = Matrix::from_row_slice(2, 2, &[-1000.0, 0.0, 1.0, -1.0]);
        let p = Matrix::identity(2, 2) * 0.5;
        let s = stiff_phi(x[0], x[1], lambda, 1.0);
        let l = linear_phi(&a, &p, &x, lambda, 1.0).unwrap();
        prop_assert!((s - l).abs() <= 1e-12 * l);
    }

    #[test]
    fn euler_bound_passes_decrease_test(a in hurwitz(2), x in planar(), lambda in 0.1..0.9f64) {
        let q = Matrix::identity(2, 2);
        let p = solve_lyapunov(&a, &q).unwrap();
        let v = LyapunovFunction::quadratic(p);
        let f = VectorField::linear(a);
        let h = euler_q_phi(&v, &f, &x, lambda, 10.0).unwrap();
        prop_assert!(h > 0.0);
        let euler = ButcherTableau::explicit_euler();
        let inside = decrease_test(&v, &euler, &f, &x, h * (1.0 - 1e-9), lambda);
        prop_assert!(inside.accepted, "{} > {}", inside.lhs, inside.rhs);
        if h < 10.0 {
            prop_assert!(!decrease_test(&v, &euler, &f, &x, h * 1.01, lambda).accepted);
        }
    }

    #[test]
    fn lyapunov_equation_residual(a in hurwitz(3)) {
        let q = Matrix::identity(3, 3);
        let p = solve_lyapunov(&a, &q).unwrap();
        let res = a.transpose() * &p + &p * &a + &q;
        prop_assert!(res.norm() < 1e-9 * (1.0 + p.norm()));
        prop_assert!(p.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn implicit_euler_decreases_for_any_step(
        a in hurwitz(2),
        h in prop::sample::select(vec![0.1, 1.0, 10.0, 100.0]),
        x in planar(),
    ) {
        let p = solve_lyapunov(&a, &Matrix::identity(2, 2)).unwrap();
        let v = LyapunovFunction::quadratic(p);
        let f = VectorField::linear(a);
        let traj = implicit_euler_run(&f, Some(&v), x, h, 20, 1e-200).unwrap();
        let vs: Vec<f64> = traj.states().iter().map(|s| v.eval(s)).collect();
        prop_assert!(vs.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0), "{vs:?}");
    }

    #[test]
    fn limit_radius_is_invariant(h in 1e-6..0.999f64) {
        let rho = euler_f2_limit_radius(h).unwrap();
        let x = State::from_vec(vec![rho, 0.0]);
        let f = systems::f2().field;
        let next = &x + f.eval(&x) * h;
        prop_assert!((next.norm() - rho).abs() <= 1e-12 * rho);
    }

    #[test]
    fn sigma_is_sharp(r in 1e-6..50.0f64, l in 1e-3..20.0f64) {
        let s = sigma_constant(r, l).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
        for k in 1..=20 {
            let t = r * l * k as f64 / 20.0;
            prop_assert!(1.0 / (1.0 + t) <= (-s * t).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scalar_iss_estimate_with_sigma_l(
        l in 0.1..3.0f64,
        extra in 0.0..2.0f64,
        steps in prop::collection::vec(0.01..1.0f64, 1..40),
        x0 in -5.0..5.0f64,
        amp in 0.0..2.0f64,
    ) {
        let a = move |y: f64| l + extra * (y * y).min(1.0);
        let v = move |t: f64| amp * (3.0 * t).sin();
        let r = steps.iter().cloned().fold(0.0, f64::max);
        let check = iss_estimate_check(&a, l, r, &steps, &v, x0).unwrap();
        prop_assert!(check.holds_sigma_l, "slack {}", check.min_slack_sigma_l);
    }

    #[test]
    fn advection_chain_decays(
        n in 2usize..12,
        c in 0.5..2.0f64,
        kfrac in 0.0..0.9f64,
        seed in any::<u64>(),
    ) {
        let dz = 1.0 / n as f64;
        let k = kfrac * c / dz;
        let sys = advection_chain(n, c, Arc::new(move |y: f64| k * y.cos()), k).unwrap();
        let x0 = State::from_fn(n, |i, _| ((seed >> (i % 60)) & 7) as f64 - 3.5);
        let mut state = seed | 1;
        let steps = move |_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            10.0 * ((state >> 11) as f64 + 1.0) / (1u64 << 53) as f64
        };
        let run = run_chain(&sys, State::zeros(0), x0, steps, 1e-6, 200_000).unwrap();
        prop_assert!(run.final_sup_norm() < 1e-6);
    }

    #[test]
    fn euler_rule_matches_general_rule(
        eps in 1e-4..1e-1f64,
        sigma in 0.1..2.0f64,
        lambda in 0.1..1.0f64,
        x0 in 0.1..10.0f64,
        l in 0.1..5.0f64,
        tau in 0.0..20.0f64,
    ) {
        let b = ErrorBudget::linear_gain(eps, sigma, lambda, x0, l, l * l / 2.0, 1).unwrap();
        let g = error_budget_step(&b, tau, f64::INFINITY);
        let e = euler_error_budget_step(&b, tau, f64::INFINITY);
        prop_assert!((g - e).abs() <= 1e-12 * e);
        prop_assert!(error_budget_step(&b, tau, 0.01) <= 0.01);
        prop_assert!(error_budget_step(&b, tau + 1.0, f64::INFINITY) >= g);
    }
}
