use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lyastep::acceptance::{self, Tolerances};
use lyastep::experiments::{self, catalog};
use lyastep::{CliError, Params, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "lyastep",
    version,
    about = "Lyapunov-certified step-size experiments"
)]
struct Cli {
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run seed; each experiment derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment, or every experiment of a config file.
    Run {
        /// Experiment name, see --list.
        name: Option<String>,
        /// Read experiments, output directory and seed from a TOML file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the experiment catalog.
        #[arg(long)]
        list: bool,
        /// Experiment parameters as `--name value` pairs.
        #[arg(
            trailing_var_arg = true,
            allow_hyphen_values = true,
            value_name = "--PARAM VALUE"
        )]
        params: Vec<String>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Only criteria whose key contains this text, or whose id equals it.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a tolerance, `key=value`.
        #[arg(long = "tol", value_name = "KEY=VALUE")]
        tolerances: Vec<String>,
    },
}

/// Splits `--name value` pairs; `--out`, `--seed` and `--config` given
/// after the experiment name are still treated as global options.
fn parse_params(raw: &[String], globals: &mut Globals) -> Result<Params, CliError> {
    let mut params = Params::new();
    let mut out = Params::new();
    let mut it = raw.iter();
    while let Some(flag) = it.next() {
        let Some(name) = flag.strip_prefix("--") else {
            return Err(CliError::Config(format!(
                "expected `--param value`, found `{flag}`"
            )));
        };
        if let Some((k, v)) = name.split_once('=') {
            out.set(k, v);
            continue;
        }
        let value = it
            .next()
            .ok_or_else(|| CliError::Config(format!("missing value for `--{name}`")))?;
        out.set(name, value.clone());
    }
    for (k, v) in out
        .names()
        .map(|k| (k.to_string(), out.raw(k).unwrap_or_default().to_string()))
    {
        match k.as_str() {
            "out" => globals.out = Some(PathBuf::from(v)),
            "config" => globals.config = Some(PathBuf::from(v)),
            "seed" => {
                globals.seed = Some(v.parse().map_err(|_| CliError::BadParam {
                    name: "seed".into(),
                    value: v.clone(),
                })?)
            }
            _ => params.set(k, v),
        }
    }
    Ok(params)
}

#[derive(Debug, Default)]
struct Globals {
    out: Option<PathBuf>,
    seed: Option<u64>,
    config: Option<PathBuf>,
}

/// Prints a line, ignoring a closed stdout.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn print_catalog() {
    for e in catalog() {
        say(&format!("{:<16} {}", e.name, e.about));
        for p in e.params {
            say(&format!("    --{:<14} {:<8} {}", p.name, p.default, p.help));
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_usage() { 2 } else { 1 })
}

fn run(name: Option<String>, raw: &[String], mut g: Globals) -> ExitCode {
    let params = match parse_params(raw, &mut g) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let cfg = match g.config.as_deref().map(RunConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return fail(&e),
    };
    let mut jobs = cfg.experiments.clone();
    if let Some(name) = name {
        jobs.push((name, params));
    } else if params.names().next().is_some() {
        return fail(&CliError::Config(
            "parameters given without an experiment name".into(),
        ));
    }
    if jobs.is_empty() {
        return fail(&CliError::Config(
            "nothing to run: give a name, --config or --list".into(),
        ));
    }
    for (name, _) in &jobs {
        if experiments::find(name).is_none() {
            return fail(&CliError::UnknownExperiment(name.clone()));
        }
    }
    let out_dir = g.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("out"));
    let seed = g.seed.or(cfg.seed).unwrap_or(0);

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(name, params)| s.spawn(move || experiments::run_experiment(name, params, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread"))
            .collect()
    });

    let mut code = 0u8;
    for ((name, _), res) in jobs.iter().zip(results) {
        match res.and_then(|o| o.write(&out_dir).map(|_| o)) {
            Ok(o) => {
                say(&o.summary_line());
                if !o.ok {
                    code = code.max(1);
                }
            }
            Err(e) => {
                say(&format!("{name}: error: {e}"));
                code = code.max(if e.is_usage() { 2 } else { 1 });
            }
        }
    }
    ExitCode::from(code)
}

fn verify(
    filter: Option<String>,
    config: Option<PathBuf>,
    overrides: &[String],
    seed: Option<u64>,
) -> ExitCode {
    let cfg = match config.as_deref().map(RunConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return fail(&e),
    };
    let mut tol = Tolerances::default();
    let mut pairs: Vec<(String, f64)> = cfg.tolerances.into_iter().collect();
    for o in overrides {
        let parsed = o.split_once('=').and_then(|(k, v)| {
            v.trim()
                .parse::<f64>()
                .ok()
                .map(|v| (k.trim().to_string(), v))
        });
        match parsed {
            Some(p) => pairs.push(p),
            None => {
                return fail(&CliError::Config(format!(
                    "bad tolerance `{o}`, expected key=value"
                )))
            }
        }
    }
    for (k, v) in pairs {
        if let Err(msg) = tol.set(&k, v) {
            return fail(&CliError::Config(msg));
        }
    }
    let seed = seed.or(cfg.seed).unwrap_or(acceptance::DEFAULT_SEED);
    let reports = acceptance::run_suite(filter.as_deref(), &tol, seed);
    if reports.is_empty() {
        say("nothing selected");
        return ExitCode::SUCCESS;
    }
    for r in &reports {
        say(&r.line());
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} {}", r.id, r.key))
        .collect();
    if failed.is_empty() {
        say(&format!("all {} criteria passed", reports.len()));
        ExitCode::SUCCESS
    } else {
        say(&format!("failed: {}", failed.join(", ")));
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { list: true, .. } => {
            print_catalog();
            ExitCode::SUCCESS
        }
        Command::Run {
            name,
            config,
            params,
            ..
        } => run(
            name,
            &params,
            Globals {
                out: cli.out,
                seed: cli.seed,
                config,
            },
        ),
        Command::Verify {
            filter,
            config,
            tolerances,
        } => verify(filter, config, &tolerances, cli.seed),
    }
}
