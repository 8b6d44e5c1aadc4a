//! Acceptance suite. Each criterion returns one report made of named checks;
//! the criterion passes when every check does.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use lyastep_core::applications::nlp::{nlp_flow, nlp_solve, quadratic_kkt, Objective};
use lyastep_core::applications::systems::{self, euler_f2_limit_radius};
use lyastep_core::applications::{max_step_sweep, stiff_experiment, sweep_tableaus};
use lyastep_core::cascade::{advection_chain, iss_estimate_check, run_chain};
use lyastep_core::global_error::{
    defect, euler_error_budget_step, loglog_slope, order_reduction_exponent, ErrorBudget,
};
use lyastep_core::implicit::implicit_euler_run;
use lyastep_core::linalg::solve_lyapunov;
use lyastep_core::lyapunov::{
    certify_trajectory, decrease_test, euler_q_phi, k1_phi, linear_phi, max_decrease_step,
    HalvingController, LyapunovFunction, DEFAULT_H_SAMPLES,
};
use lyastep_core::ode::{
    advance_with, AdvanceOptions, ButcherTableau, ConstantStep, HybridTrajectory, StepBoundConfig,
    VectorField,
};
use lyastep_core::{Matrix, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiments::experiment_seed;

pub const DEFAULT_SEED: u64 = 0x5eed_1a57;

/// Named thresholds with defaults; any entry can be overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let pairs = [
            ("stiff.rel", 1e-3),
            ("stiff.runtime_s", 0.1),
            ("pattern.big_step", 0.5),
            ("pattern.small_step", 2e-3),
            ("pattern.small_count", 100.0),
            ("limit.radius", 1e-4),
            ("limit.euler_floor", 1e-6),
            ("limit.implicit_floor", 1e-8),
            ("boundary.tol", 1e-6),
            ("astab.pass_fraction", 1.0),
            ("smallgain.floor", 1e-6),
            ("agreement.rel", 1e-12),
            ("nlp.tol", 1e-6),
            ("budget.epsilon", 1e-2),
            ("budget.order_factor", 3.0),
            ("consistency.slack", 0.2),
        ];
        Self(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        *self
            .0
            .get(key)
            .unwrap_or_else(|| panic!("no tolerance `{key}`"))
    }

    /// Errors on unknown keys.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        match self.0.get_mut(key) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(format!("unknown tolerance `{key}`")),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `PASS  3 limit-cycle (1.20s): name ok [detail]; ...`
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{} {} [{}]",
                    c.name,
                    if c.passed { "ok" } else { "FAILED" },
                    c.detail
                )
            })
            .collect();
        format!(
            "{status} {:>2} {} ({:.2}s): {}",
            self.id,
            self.key,
            self.seconds,
            parts.join("; ")
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    run: fn(&Tolerances, &mut ChaCha8Rng) -> Vec<Check>,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        key: "stiff-reproduction",
        title: "stiff linear system: tau_500 for lambda 0.6 and 0.9",
        run: stiff_reproduction,
    },
    Criterion {
        id: 2,
        key: "step-pattern",
        title: "small steps followed by a large step",
        run: step_pattern,
    },
    Criterion {
        id: 3,
        key: "limit-cycle",
        title: "explicit Euler limit circle on f2, convergence on f1 and f3, implicit Euler on f2",
        run: limit_cycle,
    },
    Criterion {
        id: 4,
        key: "boundary-step",
        title: "maximal decrease-test step 1/2 and four-scheme sweep",
        run: boundary_step,
    },
    Criterion {
        id: 5,
        key: "a-stability",
        title: "implicit Euler decreases quadratic V for random Hurwitz systems",
        run: a_stability,
    },
    Criterion {
        id: 6,
        key: "small-gain",
        title: "advection chains with random steps and the scalar ISS estimate",
        run: small_gain,
    },
    Criterion {
        id: 7,
        key: "certification",
        title: "halving trajectories recertify and halved steps are sharp",
        run: certification,
    },
    Criterion {
        id: 8,
        key: "controller-agreement",
        title: "three explicit Euler bounds coincide on linear systems",
        run: controller_agreement,
    },
    Criterion {
        id: 9,
        key: "nlp-convergence",
        title: "certified gradient flow reaches KKT points",
        run: nlp_convergence,
    },
    Criterion {
        id: 10,
        key: "error-budget",
        title: "error-budget rule keeps |e| below epsilon; order reduction exponent",
        run: error_budget,
    },
    Criterion {
        id: 11,
        key: "consistency-orders",
        title: "defect slopes of Euler, Heun, improved polygon and Kutta-3",
        run: consistency_orders,
    },
];

/// Criteria whose id or key contains `filter`.
pub fn select(filter: Option<&str>) -> Vec<&'static Criterion> {
    CRITERIA
        .iter()
        .filter(|c| match filter {
            None => true,
            Some(f) => c.key.contains(f) || c.id.to_string() == f,
        })
        .collect()
}

pub fn run_criterion(c: &Criterion, tol: &Tolerances, seed: u64) -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(experiment_seed(seed, c.key));
    let start = Instant::now();
    let checks = (c.run)(tol, &mut rng);
    CriterionReport {
        id: c.id,
        key: c.key,
        title: c.title,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the selected criteria concurrently; reports come back in id order.
pub fn run_suite(filter: Option<&str>, tol: &Tolerances, seed: u64) -> Vec<CriterionReport> {
    let selected = select(filter);
    std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|c| s.spawn(move || run_criterion(c, tol, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread"))
            .collect()
    })
}

pub fn by_id(id: u32) -> &'static Criterion {
    CRITERIA.iter().find(|c| c.id == id).expect("criterion id")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn stiff_reproduction(tol: &Tolerances, _: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    for (lambda, target) in [(0.6, 12.71372), (0.9, 3.798454)] {
        let start = Instant::now();
        let run = stiff_experiment(lambda, 1.0, [1.0, 1.1], 500);
        let secs = start.elapsed().as_secs_f64();
        match run {
            Ok(run) => {
                let e = rel(run.t_final, target);
                out.push(check(
                    &format!("tau500(lambda={lambda})"),
                    e <= tol.get("stiff.rel"),
                    format!("tau_500={:.6} target={target} rel={e:.2e}", run.t_final),
                ));
            }
            Err(e) => out.push(check(
                &format!("tau500(lambda={lambda})"),
                false,
                e.to_string(),
            )),
        }
        out.push(check(
            &format!("runtime(lambda={lambda})"),
            secs < tol.get("stiff.runtime_s"),
            format!("{secs:.2e}s"),
        ));
    }
    out
}

fn step_pattern(tol: &Tolerances, _: &mut ChaCha8Rng) -> Vec<Check> {
    let run = match stiff_experiment(0.6, 1.0, [1.0, 1.1], 500) {
        Ok(r) => r,
        Err(e) => return vec![check("run", false, e.to_string())],
    };
    let steps: Vec<f64> = run.steps().take(500).collect();
    let big = steps
        .iter()
        .filter(|&&h| h >= tol.get("pattern.big_step"))
        .count();
    let small = steps
        .iter()
        .filter(|&&h| h <= tol.get("pattern.small_step"))
        .count();
    vec![
        check(
            "large-step",
            big >= 1,
            format!("{big} steps >= {}", tol.get("pattern.big_step")),
        ),
        check(
            "small-steps",
            small as f64 >= tol.get("pattern.small_count"),
            format!("{small} steps <= {}", tol.get("pattern.small_step")),
        ),
    ]
}

fn euler_run(
    sys: &systems::PlanarSystem,
    h: f64,
    steps: usize,
) -> lyastep_core::Result<HybridTrajectory> {
    let cfg = StepBoundConfig::new(1.0, 0.5)?;
    let opts = AdvanceOptions {
        norm_floor: 0.0,
        max_steps: Some(steps),
    };
    advance_with(
        &ButcherTableau::explicit_euler(),
        &sys.field,
        &ConstantStep(h),
        State::from_vec(vec![1.0, 0.0]),
        f64::INFINITY,
        &cfg,
        &opts,
    )
}

fn limit_cycle(tol: &Tolerances, _: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let rho = euler_f2_limit_radius(0.2).expect("0 < h < 1");
    // brute-force confirmation of the closed form: fixed point of the
    // radial map s -> s ((1 - h s^2)^2 + h^2)^(1/2)
    let mut lo: f64 = 0.1;
    let mut hi: f64 = 0.5;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = (1.0 - 0.2 * mid * mid).powi(2) + 0.04 - 1.0;
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.push(check(
        "radius-oracle",
        (rho - 0.317837).abs() < 1e-6 && (rho - lo).abs() < 1e-12,
        format!("closed form {rho:.9}, bisection {lo:.9}"),
    ));
    match euler_run(&systems::f2(), 0.2, 20_000) {
        Ok(traj) => {
            let dev = traj.states()[10_000..=20_000]
                .iter()
                .map(|x| (x.norm() - 0.317837).abs())
                .fold(0.0, f64::max);
            out.push(check(
                "f2-euler-radius",
                dev <= tol.get("limit.radius"),
                format!("max ||x_k| - 0.317837| = {dev:.2e} for k in [1e4, 2e4]"),
            ));
        }
        Err(e) => out.push(check("f2-euler-radius", false, e.to_string())),
    }
    for sys in [systems::f1(), systems::f3()] {
        let name = format!("{}-euler-converges", sys.name);
        match euler_run(&sys, 0.2, 20_000) {
            Ok(traj) => {
                let floor = tol.get("limit.euler_floor");
                let first = traj.states().iter().position(|x| x.norm() < floor);
                out.push(check(
                    &name,
                    first.is_some(),
                    match first {
                        Some(k) => format!("|x_k| < {floor:e} at k = {k}"),
                        None => format!(
                            "|x_k| = {:.3e} after {} steps",
                            traj.last_state().norm(),
                            traj.steps().len()
                        ),
                    },
                ));
            }
            Err(e) => out.push(check(&name, false, e.to_string())),
        }
    }
    let f2 = systems::f2();
    match implicit_euler_run(
        &f2.field,
        Some(&f2.lyapunov),
        State::from_vec(vec![1.0, 0.0]),
        0.2,
        2000,
        0.0,
    ) {
        Ok(traj) => {
            let floor = tol.get("limit.implicit_floor");
            let first = traj.states().iter().position(|x| x.norm() < floor);
            out.push(check(
                "f2-implicit-converges",
                first.is_some(),
                match first {
                    Some(k) => format!("|x_k| < {floor:e} at k = {k}"),
                    None => format!("|x_2000| = {:.3e}", traj.last_state().norm()),
                },
            ));
        }
        Err(e) => out.push(check("f2-implicit-converges", false, e.to_string())),
    }
    out
}

fn boundary_step(tol: &Tolerances, _: &mut ChaCha8Rng) -> Vec<Check> {
    let sys = systems::f4();
    let h = max_decrease_step(
        &sys.lyapunov,
        &ButcherTableau::explicit_euler(),
        &sys.field,
        &State::from_vec(vec![0.0, 1.0]),
        0.5,
        1e-6,
        100.0,
    );
    let mut out = vec![match h {
        Ok(h) => check(
            "euler-max-step",
            (h - 0.5).abs() <= tol.get("boundary.tol"),
            format!("h = {h:.9}"),
        ),
        Err(e) => check("euler-max-step", false, e.to_string()),
    }];
    let tableaus = sweep_tableaus();
    match max_step_sweep(&tableaus, -5.0, 5.0, 201, 0.5, 1e-6) {
        Ok(rows) => {
            for (j, t) in tableaus.iter().enumerate() {
                let col: Vec<f64> = rows.iter().map(|r| r.max_steps[j]).collect();
                let ok = col.iter().all(|h| h.is_finite() && *h > 0.0);
                let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = col.iter().cloned().fold(0.0, f64::max);
                out.push(check(
                    &format!("sweep-{}", t.name()),
                    ok,
                    format!("201 points, h in [{min:.4}, {max:.4}]"),
                ));
            }
        }
        Err(e) => out.push(check("sweep", false, e.to_string())),
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// `S (W - W' - D) S^{-1}` with `D` positive diagonal: Hurwitz, but the
/// symmetric part need not be negative definite.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let w = random_matrix(rng, n);
    let d = Matrix::from_diagonal(&State::from_fn(n, |_, _| rng.gen_range(0.1..3.0)));
    let core = &w - w.transpose() - d;
    loop {
        let s = Matrix::identity(n, n) + random_matrix(rng, n) * 0.5;
        if let Some(inv) = s.clone().try_inverse() {
            if s.norm() * inv.norm() < 1e3 {
                return s * core * inv;
            }
        }
    }
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = random_matrix(rng, n);
    m.transpose() * m / n as f64 + Matrix::identity(n, n) * 0.5
}

fn random_state(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> State {
    State::from_fn(n, |_, _| rng.gen_range(-radius..radius))
}

fn a_stability(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    for n in [2usize, 4] {
        let mut runs = 0usize;
        let mut passed = 0usize;
        let mut note = String::new();
        for _ in 0..20 {
            let a = random_hurwitz(rng, n);
            let p = match solve_lyapunov(&a, &Matrix::identity(n, n)) {
                Ok(p) => p,
                Err(e) => {
                    note = e.to_string();
                    runs += 4;
                    continue;
                }
            };
            let v = LyapunovFunction::quadratic(p);
            let f = VectorField::linear(a);
            for h in [0.1, 1.0, 10.0, 100.0] {
                runs += 1;
                let x0 = random_state(rng, n, 5.0);
                match implicit_euler_run(&f, Some(&v), x0, h, 30, 1e-250) {
                    Ok(traj) => {
                        let vs: Vec<f64> = traj.states().iter().map(|x| v.eval(x)).collect();
                        if vs.windows(2).all(|w| w[1] < w[0]) {
                            passed += 1;
                        } else if note.is_empty() {
                            note = format!("h = {h}: V not strictly decreasing");
                        }
                    }
                    Err(e) => note = e.to_string(),
                }
            }
        }
        let frac = passed as f64 / runs as f64;
        out.push(check(
            &format!("hurwitz-{n}x{n}"),
            frac >= tol.get("astab.pass_fraction"),
            format!(
                "{passed}/{runs} runs strictly decreasing{}",
                if note.is_empty() {
                    String::new()
                } else {
                    format!(", {note}")
                }
            ),
        ));
    }
    out
}

fn small_gain(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let floor = tol.get("smallgain.floor");
    let mut decayed = 0usize;
    let mut diverged = 0usize;
    let mut worst_steps = 0usize;
    let mut note = String::new();
    for _ in 0..200 {
        let n = rng.gen_range(5..=20usize);
        let c = rng.gen_range(0.5..2.0);
        let dz = 1.0 / n as f64;
        let k = rng.gen_range(0.0..0.9) * c / dz;
        let omega = rng.gen_range(0.1..5.0);
        let sys = match advection_chain(n, c, Arc::new(move |y: f64| k * (omega * y).cos()), k) {
            Ok(s) => s,
            Err(e) => {
                note = e.to_string();
                diverged += 1;
                continue;
            }
        };
        let x0 = random_state(rng, n, 10.0);
        let steps: Vec<f64> = (0..100_000)
            .map(|_| 10.0 * (1.0 - rng.gen::<f64>()))
            .collect();
        match run_chain(&sys, State::zeros(0), x0, |i| steps[i], floor, steps.len()) {
            Ok(run) if run.final_sup_norm() < floor => {
                decayed += 1;
                worst_steps = worst_steps.max(run.steps.len());
            }
            Ok(run) => {
                note = format!(
                    "sup norm {:.2e} after {} steps",
                    run.final_sup_norm(),
                    run.steps.len()
                );
            }
            Err(e) => {
                diverged += 1;
                note = e.to_string();
            }
        }
    }
    let mut out =
        vec![check(
            "advection-decay",
            decayed == 200 && diverged == 0,
            format!(
            "{decayed}/200 below {floor:e}, {diverged} divergences, at most {worst_steps} steps{}",
            if note.is_empty() { String::new() } else { format!(", {note}") }
        ),
        )];

    let mut holds_sigma_l = 0usize;
    let mut holds_sigma = 0usize;
    let mut errors = 0usize;
    for _ in 0..1000 {
        let l = rng.gen_range(0.05..3.0);
        let extra = rng.gen_range(0.0..2.0);
        let r = rng.gen_range(0.01..5.0);
        let steps: Vec<f64> = (0..rng.gen_range(1..60usize))
            .map(|_| r * (1.0 - rng.gen::<f64>()))
            .collect();
        let amp = rng.gen_range(0.0..3.0);
        let w = rng.gen_range(0.1..4.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let x0 = rng.gen_range(-10.0..10.0);
        let a = move |y: f64| l + extra * y * y / (1.0 + y * y);
        let v = move |t: f64| amp * (w * t + phase).sin();
        match iss_estimate_check(&a, l, r, &steps, &v, x0) {
            Ok(c) => {
                holds_sigma_l += c.holds_sigma_l as usize;
                holds_sigma += c.holds_sigma as usize;
            }
            Err(_) => errors += 1,
        }
    }
    out.push(check(
        "iss-estimate",
        holds_sigma_l == 1000,
        format!("rate sigma L holds {holds_sigma_l}/1000, rate sigma holds {holds_sigma}/1000, {errors} errors"),
    ));
    out
}

fn certification(_: &Tolerances, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let systems = [systems::f1(), systems::f3(), systems::f4()];
    let tableaus = sweep_tableaus();
    let mut recertified = 0usize;
    let mut halved = 0usize;
    let mut sharp = 0usize;
    let mut note = String::new();
    for k in 0..100 {
        let sys = &systems[k % 3];
        let tab = &tableaus[rng.gen_range(0..tableaus.len())];
        let x0 = random_state(rng, 2, 3.0);
        let ctl = HalvingController {
            lyap: &sys.lyapunov,
            tableau: tab,
            field: &sys.field,
            lambda: 0.5,
            h_init: 1.0,
            max_halvings: 60,
        };
        let cfg = StepBoundConfig::new(1.0, 0.5).expect("valid");
        let opts = AdvanceOptions {
            max_steps: Some(200),
            ..AdvanceOptions::default()
        };
        let traj = match advance_with(tab, &sys.field, &ctl, x0, 20.0, &cfg, &opts) {
            Ok(t) => t,
            Err(e) => {
                note = format!("{} {}: {e}", sys.name, tab.name());
                continue;
            }
        };
        let report = certify_trajectory(&sys.lyapunov, &sys.field, &traj, 0.5);
        if report.certified {
            recertified += 1;
        } else if note.is_empty() {
            note = format!(
                "{} {}: violation at {:?}",
                sys.name,
                tab.name(),
                report.first_violation
            );
        }
        for (i, step) in traj.steps().iter().enumerate() {
            if step.certificate.is_some_and(|c| c.halvings >= 1) {
                halved += 1;
                let x = &traj.states()[i];
                if !decrease_test(&sys.lyapunov, tab, &sys.field, x, 2.0 * step.h, 0.5).accepted {
                    sharp += 1;
                }
            }
        }
    }
    vec![
        check(
            "recertify",
            recertified == 100,
            format!(
                "{recertified}/100 trajectories{}",
                if note.is_empty() {
                    String::new()
                } else {
                    format!(", {note}")
                }
            ),
        ),
        check(
            "doubling-fails",
            sharp == halved && halved > 0,
            format!("{sharp}/{halved} doubled steps rejected"),
        ),
    ]
}

fn controller_agreement(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut worst: f64 = 0.0;
    let mut note = String::new();
    let r = 1e3;
    for _ in 0..5 {
        let n = rng.gen_range(2..=4usize);
        let a = random_hurwitz(rng, n);
        let q = random_spd(rng, n);
        let p = match solve_lyapunov(&a, &q) {
            Ok(p) => p,
            Err(e) => {
                note = e.to_string();
                worst = f64::INFINITY;
                continue;
            }
        };
        let v = LyapunovFunction::quadratic(p.clone());
        let f = VectorField::linear(a.clone());
        for _ in 0..100 {
            let x = random_state(rng, n, 5.0);
            let lam = rng.gen_range(0.05..0.95);
            let res = (|| -> lyastep_core::Result<[f64; 3]> {
                Ok([
                    euler_q_phi(&v, &f, &x, lam, r)?,
                    linear_phi(&a, &p, &x, lam, r)?,
                    k1_phi(&v, &f, &x, lam, r, DEFAULT_H_SAMPLES)?,
                ])
            })();
            match res {
                Ok([e, l, k]) => {
                    worst = worst.max(rel(e, l)).max(rel(k, l));
                }
                Err(err) => {
                    note = err.to_string();
                    worst = f64::INFINITY;
                }
            }
        }
    }
    vec![check(
        "euler-linear-k1",
        worst <= tol.get("agreement.rel"),
        format!(
            "max relative difference {worst:.2e} over 500 states{}",
            if note.is_empty() {
                String::new()
            } else {
                format!(", {note}")
            }
        ),
    )]
}

fn nlp_convergence(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let t = tol.get("nlp.tol");
    let mut out = Vec::new();
    let mut problems = vec![(
        "analytic-qp".to_string(),
        Matrix::identity(2, 2),
        State::zeros(2),
        Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
        State::from_element(1, 1.0),
    )];
    for k in 0..3 {
        let n = rng.gen_range(2..=5usize);
        let m = rng.gen_range(1..n);
        let q = random_spd(rng, n);
        let c = random_state(rng, n, 2.0);
        let a = Matrix::from_fn(m, n, |_, _| gaussian(rng));
        let x_feas = random_state(rng, n, 1.0);
        let b = &a * x_feas;
        problems.push((format!("random-qp-{k} (n={n}, m={m})"), q, c, a, b));
    }
    for (name, q, c, a, b) in problems {
        let res = (|| -> lyastep_core::Result<(f64, bool, usize)> {
            let kkt = quadratic_kkt(&q, &c, &a, &b)?;
            let flow = nlp_flow(
                Objective::quadratic(q.clone(), c.clone()),
                a.clone(),
                b.clone(),
            )?;
            let w0 = State::zeros(kkt.len());
            let res = nlp_solve(&flow, w0, 0.5, 1.0, 1e-11, 2_000_000)?;
            let monotone = res.v_history.windows(2).all(|w| w[1] <= w[0]);
            Ok(((&res.w - &kkt).norm(), monotone, res.iterations))
        })();
        out.push(match res {
            Ok((d, mono, it)) => check(
                &name,
                d <= t && mono,
                format!("|w - w*| = {d:.2e}, V monotone = {mono}, {it} iterations"),
            ),
            Err(e) => check(&name, false, e.to_string()),
        });
    }
    out
}

fn error_budget(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let eps = tol.get("budget.epsilon");
    let budget = ErrorBudget::linear_gain(eps, 1.0, 0.5, 1.0, 1.0, 0.5, 1).expect("valid budget");
    let phi = 2.0 * (1.0 - 0.5);
    let mut worst: f64 = 0.0;
    let mut total_steps = 0usize;
    for _ in 0..20 {
        let (mut tau, mut x) = (0.0f64, 1.0f64);
        while tau < 20.0 {
            let h = euler_error_budget_step(&budget, tau, phi) * (1.0 - 0.5 * rng.gen::<f64>());
            x -= h * x;
            tau += h;
            total_steps += 1;
            worst = worst.max(((-tau).exp() - x).abs());
        }
    }
    let mut out = vec![check(
        "budget-holds",
        worst <= eps,
        format!("max |e| = {worst:.3e} <= {eps:e} over 20 sequences, {total_steps} steps"),
    )];

    // constant steps, lambda = 1
    let predicted = order_reduction_exponent(1.0, 1.0, 1.0);
    let hs = [1e-1f64, 1e-2, 1e-3];
    let sups: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let n = (50.0 / h).round() as usize;
            let mut x = 1.0f64;
            let mut sup: f64 = 0.0;
            for k in 1..=n {
                x -= h * x;
                sup = sup.max(((-(k as f64) * h).exp() - x).abs());
            }
            sup
        })
        .collect();
    let measured = loglog_slope(&hs, &sups);
    let ratio = measured / predicted;
    let factor = tol.get("budget.order_factor");
    out.push(check(
        "order-reduction",
        ratio <= factor && ratio >= 1.0 / factor,
        format!("measured exponent {measured:.3}, predicted {predicted:.3}, ratio {ratio:.2}"),
    ));
    out
}

fn consistency_orders(tol: &Tolerances, _: &mut ChaCha8Rng) -> Vec<Check> {
    let sys = systems::f4();
    let x = State::from_vec(vec![0.6, -0.8]);
    let hs: Vec<f64> = (0..7).map(|k| 0.2 / 2f64.powi(k)).collect();
    let slack = tol.get("consistency.slack");
    [
        (ButcherTableau::explicit_euler(), 1.0),
        (ButcherTableau::heun(), 2.0),
        (ButcherTableau::improved_polygon(), 2.0),
        (ButcherTableau::kutta3(), 3.0),
    ]
    .into_iter()
    .map(|(t, p)| {
        let ds: lyastep_core::Result<Vec<f64>> = hs
            .iter()
            .map(|&h| defect(&sys.field, &t, &x, h, 1e-14))
            .collect();
        match ds {
            Ok(ds) => {
                let slope = loglog_slope(&hs, &ds);
                check(
                    t.name(),
                    slope >= p - slack,
                    format!("slope {slope:.3}, order {p}"),
                )
            }
            Err(e) => check(t.name(), false, e.to_string()),
        }
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        assert_eq!(t.get("stiff.rel"), 1e-3);
        t.set("stiff.rel", 0.5).unwrap();
        assert_eq!(t.get("stiff.rel"), 0.5);
        assert!(t.set("stiff.typo", 1.0).is_err());
    }

    #[test]
    fn selection() {
        assert_eq!(select(None).len(), 11);
        assert_eq!(select(Some("boundary")).len(), 1);
        assert_eq!(select(Some("7"))[0].key, "certification");
        assert!(select(Some("no-such")).is_empty());
    }

    #[test]
    fn random_hurwitz_is_hurwitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 3, 4] {
            let a = random_hurwitz(&mut rng, n);
            let eig = a.complex_eigenvalues();
            assert!(eig.iter().all(|z| z.re < 0.0), "{eig}");
        }
    }
}
