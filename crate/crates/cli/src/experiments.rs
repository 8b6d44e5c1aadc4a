//! The experiment catalog.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lyastep_core::applications::nlp::{nlp_flow, nlp_solve, quadratic_kkt, Objective};
use lyastep_core::applications::systems::{self, euler_f2_limit_radius, PlanarSystem};
use lyastep_core::applications::{max_step_sweep, stiff_experiment, stiff_matrix, sweep_tableaus};
use lyastep_core::cascade::{advection_chain, run_chain};
use lyastep_core::global_error::{
    composition_bound, error_bound, euler_error_budget_step, ErrorBudget,
};
use lyastep_core::implicit::implicit_euler_run;
use lyastep_core::lyapunov::{certify_trajectory, HalvingController, LyapunovFunction};
use lyastep_core::ode::{
    advance, advance_with, AdvanceOptions, ButcherTableau, ConstantStep, HybridTrajectory,
    StepBoundConfig, VectorField,
};
use lyastep_core::{Matrix, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Params;
use crate::csv_out::{certification_table, num, steps_table, trajectory_table, CsvTable};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(name: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        help,
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentInfo {
    pub name: String,
    pub about: String,
    pub params: &'static [ParamSpec],
}

const STIFF: &[ParamSpec] = &[
    p("lambda", "0.6", "decrease fraction"),
    p("r", "1", "step cap"),
    p("steps", "500", "number of steps"),
    p("x1", "1", "initial x1"),
    p("x2", "1.1", "initial x2"),
];

const PLANAR: &[ParamSpec] = &[
    p("h", "0.2", "constant step"),
    p("steps", "20000", "number of steps"),
    p("x1", "1", "initial x1"),
    p("x2", "0", "initial x2"),
    p("lambda", "0.5", "decrease fraction used for certification"),
    p("floor", "1e-14", "stop once |x| drops below"),
];

const HALVING: &[ParamSpec] = &[
    p("system", "f4", "f1, f2, f3 or f4"),
    p("scheme", "kutta3", "explicit tableau name"),
    p("lambda", "0.5", "decrease fraction"),
    p("h_init", "1", "first trial step, also the step cap"),
    p("max_halvings", "60", "halvings before giving up"),
    p("t_end", "10", "final time"),
    p("x1", "1", "initial x1"),
    p("x2", "1", "initial x2"),
];

const SWEEP: &[ParamSpec] = &[
    p("points", "201", "grid points in x1"),
    p("x1_min", "-5", "left end"),
    p("x1_max", "5", "right end"),
    p("lambda", "0.5", "decrease fraction"),
    p("tol", "1e-6", "bisection width"),
];

const ADVECTION: &[ParamSpec] = &[
    p("n", "20", "grid cells"),
    p("c", "1", "transport speed"),
    p("k", "0.5", "growth bound K, b(y) = K cos(y)"),
    p("h_max", "10", "steps are uniform in (0, h_max]"),
    p(
        "amplitude",
        "1",
        "initial profile is uniform in [-amplitude, amplitude]",
    ),
    p("stop", "1e-6", "stop once the sup norm drops below"),
    p("max_steps", "100000", "step budget"),
];

const NLP: &[ParamSpec] = &[
    p("lambda", "0.5", "decrease fraction"),
    p("r", "1", "step cap"),
    p("tol", "1e-10", "stop once |F(w)| drops below"),
    p("max_iterations", "100000", "iteration budget"),
];

const BUDGET: &[ParamSpec] = &[
    p("epsilon", "1e-2", "error target"),
    p("lambda", "0.5", "decrease fraction"),
    p("sigma", "1", "decay rate of the exact solution"),
    p("x0", "1", "initial value"),
    p("t_end", "20", "final time"),
    p(
        "randomize",
        "1",
        "1: scale each step by a uniform factor in (0.5, 1]",
    ),
    p("every", "1000", "write every n-th node to the CSV files"),
];

const PLANAR_NAMES: [&str; 4] = ["f1", "f2", "f3", "f4"];
const PLANAR_SCHEMES: [&str; 3] = ["euler", "heun", "implicit"];

pub fn catalog() -> Vec<ExperimentInfo> {
    let mut out = vec![ExperimentInfo {
        name: "stiff-6.14".into(),
        about: "explicit Euler on x1' = -1000 x1, x2' = x1 - x2 with the linear step rule".into(),
        params: STIFF,
    }];
    for sys in PLANAR_NAMES {
        for scheme in PLANAR_SCHEMES {
            out.push(ExperimentInfo {
                name: format!("{sys}-{scheme}"),
                about: format!("{scheme} with constant step on planar system {sys}"),
                params: PLANAR,
            });
        }
    }
    out.extend([
        ExperimentInfo {
            name: "halving".into(),
            about: "halving controller on a planar system".into(),
            params: HALVING,
        },
        ExperimentInfo {
            name: "max-step-sweep".into(),
            about: "largest decrease-test step along x = (x1, 1) for four explicit schemes".into(),
            params: SWEEP,
        },
        ExperimentInfo {
            name: "advection".into(),
            about: "partitioned scheme on the upwind advection chain with random steps".into(),
            params: ADVECTION,
        },
        ExperimentInfo {
            name: "nlp-qp".into(),
            about: "certified gradient flow for min |x|^2/2 subject to x1 + x2 = 1".into(),
            params: NLP,
        },
        ExperimentInfo {
            name: "error-budget".into(),
            about: "explicit Euler on x' = -x under the error-budget step rule".into(),
            params: BUDGET,
        },
    ]);
    out
}

pub fn find(name: &str) -> Option<ExperimentInfo> {
    catalog().into_iter().find(|e| e.name == name)
}

/// Per-experiment seed: SplitMix64 finalizer of the run seed mixed with an
/// FNV-1a hash of the name.
pub fn experiment_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Ten significant digits, positional for moderate magnitudes.
pub fn short(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e7).contains(&a) {
        let digits = (9 - a.log10().floor().max(-4.0) as i32).max(0) as usize;
        let s = format!("{v:.digits$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.9e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub summary: Vec<(String, String)>,
    pub files: Vec<(String, CsvTable)>,
    pub ok: bool,
}

impl Outcome {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            summary: Vec::new(),
            files: Vec::new(),
            ok: true,
        }
    }

    fn kv(&mut self, k: &str, v: impl ToString) {
        self.summary.push((k.to_string(), v.to_string()));
    }

    fn kf(&mut self, k: &str, v: f64) {
        self.kv(k, short(v));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn summary_line(&self) -> String {
        let mut s = self.name.clone();
        s.push(':');
        for (k, v) in &self.summary {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    /// Writes every table under `dir/<name>/` and returns the paths.
    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let sub = dir.join(&self.name);
        std::fs::create_dir_all(&sub).map_err(|source| CliError::Io {
            path: sub.clone(),
            source,
        })?;
        let mut paths = Vec::new();
        for (file, table) in &self.files {
            let path = sub.join(file);
            std::fs::write(&path, table.to_bytes()?).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            paths.push(path);
        }
        Ok(paths)
    }
}

fn check_params(info: &ExperimentInfo, params: &Params) -> CliResult<()> {
    for name in params.names() {
        if !info.params.iter().any(|p| p.name == name) {
            return Err(CliError::UnknownParam {
                experiment: info.name.clone(),
                name: name.to_string(),
            });
        }
    }
    Ok(())
}

/// Parameter view that falls back to the catalog defaults.
struct Args<'a> {
    info: &'a ExperimentInfo,
    params: &'a Params,
}

impl Args<'_> {
    fn default(&self, name: &str) -> &'static str {
        self.info
            .params
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.default)
            .expect("parameter declared in catalog")
    }

    fn f64(&self, name: &str) -> CliResult<f64> {
        let raw = self.params.raw(name).unwrap_or(self.default(name));
        raw.trim().parse().map_err(|_| CliError::BadParam {
            name: name.to_string(),
            value: raw.to_string(),
        })
    }

    fn usize(&self, name: &str) -> CliResult<usize> {
        let raw = self.params.raw(name).unwrap_or(self.default(name));
        raw.trim().parse().map_err(|_| CliError::BadParam {
            name: name.to_string(),
            value: raw.to_string(),
        })
    }

    fn str(&self, name: &str) -> &str {
        self.params.str_or(name, self.default(name))
    }
}

pub fn run_experiment(name: &str, params: &Params, seed: u64) -> CliResult<Outcome> {
    let info = find(name).ok_or_else(|| CliError::UnknownExperiment(name.to_string()))?;
    check_params(&info, params)?;
    let args = Args {
        info: &info,
        params,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(experiment_seed(seed, name));
    match name {
        "stiff-6.14" => stiff(&args),
        "halving" => halving(&args),
        "max-step-sweep" => sweep(&args),
        "advection" => advection(&args, &mut rng),
        "nlp-qp" => nlp(&args),
        "error-budget" => budget(&args, &mut rng),
        _ => {
            let (sys, scheme) = name.split_once('-').expect("catalog name");
            planar(&args, sys, scheme)
        }
    }
}

fn planar_system(name: &str) -> CliResult<PlanarSystem> {
    systems::by_name(name).ok_or_else(|| CliError::BadParam {
        name: "system".into(),
        value: name.into(),
    })
}

fn trajectory_files(out: &mut Outcome, traj: &HybridTrajectory) {
    out.files
        .push(("trajectory.csv".into(), trajectory_table(traj)));
    out.files.push(("steps.csv".into(), steps_table(traj)));
}

fn stiff(args: &Args) -> CliResult<Outcome> {
    let lambda = args.f64("lambda")?;
    let r = args.f64("r")?;
    let x0 = [args.f64("x1")?, args.f64("x2")?];
    let run = stiff_experiment(lambda, r, x0, args.usize("steps")?)?;
    let field = VectorField::linear(stiff_matrix());
    let v = LyapunovFunction::scaled_norm_squared(2, 0.5);
    let report = certify_trajectory(&v, &field, &run.trajectory, lambda);
    let mut out = Outcome::new(&args.info.name);
    out.kv("steps", run.trajectory.steps().len());
    out.kf("t_final", run.t_final);
    out.kf("final_norm", run.trajectory.last_state().norm());
    out.kv("certified", report.certified);
    trajectory_files(&mut out, &run.trajectory);
    out.files
        .push(("certification.csv".into(), certification_table(&report)));
    Ok(out)
}

fn planar(args: &Args, sys: &str, scheme: &str) -> CliResult<Outcome> {
    let system = planar_system(sys)?;
    let h = args.f64("h")?;
    let steps = args.usize("steps")?;
    let lambda = args.f64("lambda")?;
    let floor = args.f64("floor")?;
    let x0 = State::from_vec(vec![args.f64("x1")?, args.f64("x2")?]);
    let traj = match scheme {
        "implicit" => {
            implicit_euler_run(&system.field, Some(&system.lyapunov), x0, h, steps, floor)?
        }
        _ => {
            let tableau = ButcherTableau::by_name(scheme).expect("catalog scheme");
            let cfg = StepBoundConfig::new(h.max(1.0), 0.5)?;
            let opts = AdvanceOptions {
                norm_floor: floor,
                max_steps: Some(steps),
            };
            advance_with(
                &tableau,
                &system.field,
                &ConstantStep(h),
                x0,
                f64::INFINITY,
                &cfg,
                &opts,
            )?
        }
    };
    let report = certify_trajectory(&system.lyapunov, &system.field, &traj, lambda);
    let norms: Vec<f64> = traj.states().iter().map(|x| x.norm()).collect();
    let tail = &norms[norms.len() / 2..];
    let mut out = Outcome::new(&args.info.name);
    out.kv("steps", traj.steps().len());
    out.kf("t_final", traj.last_tau());
    out.kf("final_norm", traj.last_state().norm());
    out.kf(
        "tail_min_norm",
        tail.iter().cloned().fold(f64::INFINITY, f64::min),
    );
    out.kf("tail_max_norm", tail.iter().cloned().fold(0.0, f64::max));
    if sys == "f2" && scheme == "euler" {
        if let Ok(rho) = euler_f2_limit_radius(h) {
            out.kf("limit_radius", rho);
        }
    }
    out.kv("certified", report.certified);
    trajectory_files(&mut out, &traj);
    out.files
        .push(("certification.csv".into(), certification_table(&report)));
    Ok(out)
}

fn halving(args: &Args) -> CliResult<Outcome> {
    let system = planar_system(args.str("system"))?;
    let scheme = args.str("scheme");
    let tableau = ButcherTableau::by_name(scheme).ok_or_else(|| CliError::BadParam {
        name: "scheme".into(),
        value: scheme.into(),
    })?;
    let lambda = args.f64("lambda")?;
    let h_init = args.f64("h_init")?;
    let max_halvings = args.usize("max_halvings")? as u32;
    let ctl = HalvingController {
        lyap: &system.lyapunov,
        tableau: &tableau,
        field: &system.field,
        lambda,
        h_init,
        max_halvings,
    };
    let cfg = StepBoundConfig::new(h_init, 0.5)?;
    let x0 = State::from_vec(vec![args.f64("x1")?, args.f64("x2")?]);
    let traj = advance(&tableau, &system.field, &ctl, x0, args.f64("t_end")?, &cfg)?;
    let report = certify_trajectory(&system.lyapunov, &system.field, &traj, lambda);
    let mut out = Outcome::new(&args.info.name);
    out.kv("steps", traj.steps().len());
    out.kf("t_final", traj.last_tau());
    out.kf("final_norm", traj.last_state().norm());
    out.kv("certified", report.certified);
    out.ok = report.certified;
    trajectory_files(&mut out, &traj);
    out.files
        .push(("certification.csv".into(), certification_table(&report)));
    Ok(out)
}

fn sweep(args: &Args) -> CliResult<Outcome> {
    let tableaus = sweep_tableaus();
    let rows = max_step_sweep(
        &tableaus,
        args.f64("x1_min")?,
        args.f64("x1_max")?,
        args.usize("points")?,
        args.f64("lambda")?,
        args.f64("tol")?,
    )?;
    let mut table = CsvTable::new(std::iter::once("x1").chain(tableaus.iter().map(|t| t.name())));
    for r in &rows {
        let mut row = vec![r.x1];
        row.extend(&r.max_steps);
        table.push_nums(&row);
    }
    let all_positive = rows
        .iter()
        .all(|r| r.max_steps.iter().all(|h| h.is_finite() && *h > 0.0));
    let mut out = Outcome::new(&args.info.name);
    out.kv("points", rows.len());
    for (j, t) in tableaus.iter().enumerate() {
        let min = rows
            .iter()
            .map(|r| r.max_steps[j])
            .fold(f64::INFINITY, f64::min);
        out.kf(&format!("min_{}", t.name()), min);
    }
    out.kv("finite_positive", all_positive);
    out.ok = all_positive;
    out.files.push(("sweep.csv".into(), table));
    Ok(out)
}

fn advection(args: &Args, rng: &mut ChaCha8Rng) -> CliResult<Outcome> {
    let n = args.usize("n")?;
    let c = args.f64("c")?;
    let k = args.f64("k")?;
    let h_max = args.f64("h_max")?;
    let amp = args.f64("amplitude")?;
    if h_max.is_nan() || h_max <= 0.0 {
        return Err(CliError::BadParam {
            name: "h_max".into(),
            value: h_max.to_string(),
        });
    }
    let sys = advection_chain(n, c, Arc::new(move |y: f64| k * y.cos()), k)?;
    let x0 = State::from_fn(n, |_, _| rng.gen_range(-amp..=amp));
    let steps: Vec<f64> = (0..args.usize("max_steps")?)
        .map(|_| h_max * (1.0 - rng.gen::<f64>()))
        .collect();
    let run = run_chain(
        &sys,
        State::zeros(0),
        x0,
        |i| steps[i],
        args.f64("stop")?,
        steps.len(),
    )?;

    let mut chain = CsvTable::new(
        ["tau".to_string(), "h".to_string()]
            .into_iter()
            .chain((1..=n).map(|i| format!("x_{i}"))),
    );
    let mut grid = CsvTable::new(["tau", "z_index", "value"]);
    let mut step_table = CsvTable::new(["k", "tau", "h"]);
    for (j, (tau, x)) in run.taus.iter().zip(&run.x).enumerate() {
        let h = run.steps.get(j).copied().unwrap_or(0.0);
        let mut row = vec![*tau, h];
        row.extend(x.iter());
        chain.push_nums(&row);
        for (i, v) in x.iter().enumerate() {
            grid.push(vec![num(*tau), (i + 1).to_string(), num(*v)]);
        }
        if j < run.steps.len() {
            step_table.push(vec![j.to_string(), num(*tau), num(h)]);
        }
    }
    let sup = run.final_sup_norm();
    let mut out = Outcome::new(&args.info.name);
    out.kv("steps", run.steps.len());
    out.kf("t_final", run.taus.last().copied().unwrap_or(0.0));
    out.kf("final_sup_norm", sup);
    out.kv("decayed", sup < args.f64("stop")?);
    out.files.push(("trajectory.csv".into(), chain));
    out.files.push(("grid.csv".into(), grid));
    out.files.push(("steps.csv".into(), step_table));
    Ok(out)
}

fn nlp(args: &Args) -> CliResult<Outcome> {
    let q = Matrix::identity(2, 2);
    let c = State::zeros(2);
    let a = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
    let b = State::from_element(1, 1.0);
    let kkt = quadratic_kkt(&q, &c, &a, &b)?;
    let flow = nlp_flow(Objective::quadratic(q, c), a, b)?;
    let lambda = args.f64("lambda")?;
    let res = nlp_solve(
        &flow,
        State::zeros(3),
        lambda,
        args.f64("r")?,
        args.f64("tol")?,
        args.usize("max_iterations")?,
    )?;
    let monotone = res.v_history.windows(2).all(|w| w[1] <= w[0]);
    let mut out = Outcome::new(&args.info.name);
    out.kv("iterations", res.iterations);
    out.kf("t_final", res.trajectory.last_tau());
    out.kf("final_norm", res.w.norm());
    out.kf("x1", res.w[0]);
    out.kf("x2", res.w[1]);
    out.kf("z", res.w[2]);
    out.kf("kkt_distance", (&res.w - &kkt).norm());
    out.kv("v_monotone", monotone);
    out.kv("certified", res.all_certified);
    trajectory_files(&mut out, &res.trajectory);
    Ok(out)
}

/// Euler on `x' = -x` has `L = 1` and defect constant `K = 1/2`; the
/// step rule is capped by the linear bound `2(1 - lambda)` for
/// `V = x^2 / 2`.
fn budget(args: &Args, rng: &mut ChaCha8Rng) -> CliResult<Outcome> {
    let eps = args.f64("epsilon")?;
    let lambda = args.f64("lambda")?;
    let sigma = args.f64("sigma")?;
    let x0 = args.f64("x0")?;
    let t_end = args.f64("t_end")?;
    let randomize = args.f64("randomize")? != 0.0;
    let every = args.usize("every")?.max(1);
    let b = ErrorBudget::linear_gain(eps, sigma, lambda, x0.abs(), 1.0, 0.5, 1)?;
    let phi = (2.0 * (1.0 - lambda)).min(1.0);

    let mut errors = CsvTable::new(["tau", "e_norm", "bound_7_4", "bound_7_6", "rule_step"]);
    let mut traj = CsvTable::new(["tau", "h", "x_0"]);
    let mut step_table = CsvTable::new(["k", "tau", "h"]);
    let (mut tau, mut x, mut d_sup, mut e_max) = (0.0f64, x0, 0.0f64, 0.0f64);
    let mut violations = 0usize;
    let mut k = 0usize;
    loop {
        let rule = euler_error_budget_step(&b, tau, phi);
        let done = tau >= t_end;
        let h = if done {
            0.0
        } else if randomize {
            rule * (1.0 - 0.5 * rng.gen::<f64>())
        } else {
            rule
        };
        if k.is_multiple_of(every) || done {
            let e = (x0 * (-tau).exp() - x).abs();
            errors.push_nums(&[
                tau,
                e,
                composition_bound(d_sup, 1.0, tau),
                error_bound(&b, d_sup),
                rule,
            ]);
            traj.push_nums(&[tau, h, x]);
            if !done {
                step_table.push(vec![k.to_string(), num(tau), num(h)]);
            }
        }
        if done {
            break;
        }
        let z = x0 * (-tau).exp();
        // defect of Euler at the exact solution
        d_sup = d_sup.max(((-h).exp_m1() / h + 1.0).abs() * z.abs());
        x += h * -x;
        tau += h;
        k += 1;
        let e = (x0 * (-tau).exp() - x).abs();
        e_max = e_max.max(e);
        if e > composition_bound(d_sup, 1.0, tau) * (1.0 + 1e-9) + 1e-300 {
            violations += 1;
        }
    }
    let mut out = Outcome::new(&args.info.name);
    out.kv("steps", k);
    out.kf("t_final", tau);
    out.kf("final_norm", x.abs());
    out.kf("max_error", e_max);
    out.kv("within_budget", e_max <= eps);
    out.kv("composition_violations", violations);
    out.ok = e_max <= eps && violations == 0;
    out.files.push(("errors.csv".into(), errors));
    out.files.push(("trajectory.csv".into(), traj));
    out.files.push(("steps.csv".into(), step_table));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_are_unique() {
        let names: Vec<String> = catalog().into_iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(names.iter().any(|n| n == "f2-euler"));
    }

    #[test]
    fn short_numbers() {
        assert_eq!(short(12.71372), "12.71372");
        assert_eq!(short(1.0 / 3.0), "0.3333333333");
        assert_eq!(short(0.5), "0.5");
        assert_eq!(short(0.0), "0");
        assert_eq!(short(3.284e-7), "3.284000000e-7");
        assert_eq!(short(20.0), "20");
    }

    #[test]
    fn seeds_split_by_name() {
        assert_ne!(
            experiment_seed(1, "advection"),
            experiment_seed(1, "error-budget")
        );
        assert_ne!(
            experiment_seed(1, "advection"),
            experiment_seed(2, "advection")
        );
        assert_eq!(experiment_seed(9, "x"), experiment_seed(9, "x"));
    }

    #[test]
    fn unknown_names_and_params() {
        let p = Params::new();
        assert!(matches!(
            run_experiment("nope", &p, 0),
            Err(CliError::UnknownExperiment(_))
        ));
        let mut p = Params::new();
        p.set("colour", "red");
        assert!(matches!(
            run_experiment("stiff-6.14", &p, 0),
            Err(CliError::UnknownParam { .. })
        ));
    }

    #[test]
    fn stiff_first_step() {
        let mut p = Params::new();
        p.set("x1", "0");
        p.set("x2", "1");
        p.set("steps", "1");
        let out = run_experiment("stiff-6.14", &p, 0).unwrap();
        assert_eq!(out.get("t_final").unwrap().parse::<f64>().unwrap(), 0.8);
        assert_eq!(out.get("certified"), Some("true"));
    }
}
