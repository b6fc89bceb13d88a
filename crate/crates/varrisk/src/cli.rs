//! `varrisk` command line. Exit codes: 0 success, 1 a check failed, 2 usage
//! error, 3 invalid input or I/O failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use varrisk_core::duality::{self, candidate_cloud, dual_value, DualityMethod};
use varrisk_core::{
    lp_norm, luxemburg_norm, CheckConfig, Error as CoreError, RandomVariable, SystemicRiskMeasure,
};

use crate::error::IoError;
use crate::generate::{generate_instance, GeneratorConfig};
use crate::instance::{
    load_instance, save_instance, Instance, InstanceFormat, MeasureSpec, NamedEconomy,
};
use crate::report::{
    save_report, DecomposeRow, DualityRow, EvalRow, NormRow, ReportDoc, ReportFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Worker-count cap; unset or 0 lets the pool pick.
pub const THREADS_ENV: &str = "VARRISK_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "varrisk",
    version,
    about = "Evaluate and verify systemic risk measures on finite scenario sets"
)]
pub struct Cli {
    /// Instance file (JSON) or CSV bundle directory
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Base seed of every sampled check
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Trials per sampled check
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    /// Absolute tolerance of the sampled inequalities
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Write results here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print rho(f) for every measure and economy
    Eval {
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        economy: Option<String>,
    },
    /// Run the certain, simple, systemic and acceptance-set suites
    Axioms {
        #[arg(long)]
        measure: Option<String>,
    },
    /// Rebuild each measure from its values and report the residual
    Decompose {
        #[arg(long)]
        measure: Option<String>,
        /// Random economies compared per measure
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Compare the primal value with the dual representation
    Duality {
        #[arg(long, value_enum, default_value_t = Method::Sampled)]
        method: Method,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        economy: Option<String>,
        /// Size of the candidate cloud
        #[arg(long, default_value_t = 50)]
        candidates: usize,
        /// Samples per acceptance set for the sampled penalty
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Luxemburg and classical norms of every economy
    Norm {
        #[arg(long)]
        economy: Option<String>,
    },
    /// Write a generated instance (JSON, or a CSV bundle with --bundle)
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.0)]
        inf_fraction: f64,
        #[arg(long, default_value_t = 3)]
        economies: usize,
        #[arg(long, default_value_t = 2.0)]
        range_order: f64,
        /// Treat --out as a directory and write a CSV bundle
        #[arg(long)]
        bundle: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    /// The report was written; some check did not pass.
    Check(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Self::Input(e.to_string())
    }
}

fn core_err(e: CoreError) -> Failure {
    match e {
        CoreError::UnsupportedInstance(msg) => Failure::Usage(msg),
        CoreError::WeakDualityViolation { .. } => Failure::Check(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            EXIT_CHECK_FAILED
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be a count, got `{v}`"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())
}

fn load(cli: &Cli) -> Result<Instance, Failure> {
    let path = cli
        .instance
        .as_ref()
        .ok_or_else(|| Failure::Usage("--instance is required".into()))?;
    Ok(load_instance(path, InstanceFormat::detect(path))?)
}

fn pick_measures<'a>(
    inst: &'a Instance,
    name: Option<&str>,
) -> Result<Vec<&'a MeasureSpec>, Failure> {
    match name {
        Some(n) => inst
            .measure(n)
            .map(|m| vec![m])
            .ok_or_else(|| Failure::Usage(format!("no measure named `{n}`"))),
        None if inst.measures.is_empty() => {
            Err(Failure::Input("instance defines no measures".into()))
        }
        None => Ok(inst.measures.iter().collect()),
    }
}

fn pick_economies<'a>(
    inst: &'a Instance,
    name: Option<&str>,
) -> Result<Vec<&'a NamedEconomy>, Failure> {
    match name {
        Some(n) => inst
            .economy(n)
            .map(|e| vec![e])
            .ok_or_else(|| Failure::Usage(format!("no economy named `{n}`"))),
        None if inst.economies.is_empty() => {
            Err(Failure::Input("instance defines no economies".into()))
        }
        None => Ok(inst.economies.iter().collect()),
    }
}

fn check_config(cli: &Cli) -> Result<CheckConfig, Failure> {
    CheckConfig::new(cli.trials, cli.seed, cli.tol).map_err(|e| Failure::Usage(e.to_string()))
}

fn emit(cli: &Cli, doc: &ReportDoc) -> Result<(), Failure> {
    Ok(save_report(doc, cli.out.as_deref(), cli.format)?)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Eval { measure, economy } => {
            let inst = load(cli)?;
            let measures = pick_measures(&inst, measure.as_deref())?;
            let economies = pick_economies(&inst, economy.as_deref())?;
            let pairs: Vec<(&MeasureSpec, &NamedEconomy)> = measures
                .iter()
                .flat_map(|m| economies.iter().map(move |e| (*m, *e)))
                .collect();
            let rows = pairs
                .par_iter()
                .map(|(m, e)| {
                    let (phi, rho) = m.build().map_err(core_err)?;
                    let value = SystemicRiskMeasure::compose(rho, phi)
                        .eval(&e.economy, &inst.space)
                        .map_err(core_err)?;
                    Ok(EvalRow {
                        measure: m.name.clone(),
                        economy: e.name.clone(),
                        value,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            emit(cli, &ReportDoc::Eval { rows })
        }
        Command::Axioms { measure } => {
            let inst = load(cli)?;
            let cfg = check_config(cli)?;
            let measures = pick_measures(&inst, measure.as_deref())?;
            let per_measure = measures
                .par_iter()
                .map(|m| {
                    let (phi, rho) = m.build().map_err(core_err)?;
                    let composed = SystemicRiskMeasure::compose(rho.clone(), phi.clone());
                    Ok(vec![
                        phi.check_axioms(&inst.order, &cfg).map_err(core_err)?,
                        rho.check_axioms(&inst.space, &cfg).map_err(core_err)?,
                        composed
                            .check_axioms(&inst.space, &inst.order, &cfg)
                            .map_err(core_err)?,
                        duality::check_acceptance_properties(
                            &phi,
                            &rho,
                            &inst.space,
                            &inst.order,
                            &cfg,
                        )
                        .map_err(core_err)?,
                    ])
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let mut suites: Vec<_> = per_measure.into_iter().flatten().collect();
            for (s, m) in suites
                .iter_mut()
                .zip(measures.iter().flat_map(|m| std::iter::repeat_n(m, 4)))
            {
                s.subject = format!("{}: {}", m.name, s.subject);
            }
            let passed = suites.iter().all(|s| s.passed());
            emit(cli, &ReportDoc::Axioms { passed, suites })?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Check(
                    "some axiom checks did not pass; see the report".into(),
                ))
            }
        }
        Command::Decompose { measure, samples } => {
            let inst = load(cli)?;
            let measures = pick_measures(&inst, measure.as_deref())?;
            let rows = measures
                .par_iter()
                .map(|m| {
                    let (phi, rho) = m.build().map_err(core_err)?;
                    let dec = SystemicRiskMeasure::compose(rho, phi)
                        .decompose(&inst.space, &inst.order, *samples, cli.seed)
                        .map_err(core_err)?;
                    Ok(DecomposeRow {
                        measure: m.name.clone(),
                        residual: dec.residual,
                        samples: dec.samples,
                        flagged: dec.flagged,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let flagged: Vec<&str> = rows
                .iter()
                .filter(|r| r.flagged)
                .map(|r| r.measure.as_str())
                .collect();
            emit(cli, &ReportDoc::Decompose { rows: rows.clone() })?;
            if flagged.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "decomposition residual too large for {}",
                    flagged.join(", ")
                )))
            }
        }
        Command::Duality {
            method,
            measure,
            economy,
            candidates,
            budget,
        } => {
            let inst = load(cli)?;
            let measures = pick_measures(&inst, measure.as_deref())?;
            let economies = pick_economies(&inst, economy.as_deref())?;
            let built = measures
                .iter()
                .map(|m| m.build().map(|b| (*m, b)).map_err(core_err))
                .collect::<Result<Vec<_>, Failure>>()?;
            if *method == Method::Exact {
                if let Some((m, _)) = built
                    .iter()
                    .find(|(_, (phi, _))| phi.linear_weights().is_none())
                {
                    return Err(Failure::Usage(format!(
                        "exact method requires linear certain function (measure `{}`)",
                        m.name
                    )));
                }
            }
            let pairs: Vec<_> = built
                .iter()
                .flat_map(|b| economies.iter().map(move |e| (b, *e)))
                .collect();
            let rows = pairs
                .par_iter()
                .map(|((m, (phi, rho)), e)| {
                    let cloud =
                        candidate_cloud(phi, rho, &e.economy, &inst.space, *candidates, cli.seed)
                            .map_err(core_err)?;
                    let method = match method {
                        Method::Exact => DualityMethod::Exact,
                        Method::Sampled => DualityMethod::Sampled {
                            budget: *budget,
                            seed: cli.seed,
                        },
                    };
                    let report = dual_value(&e.economy, &cloud, phi, rho, &inst.space, method)
                        .map_err(core_err)?;
                    Ok(DualityRow {
                        measure: m.name.clone(),
                        economy: e.name.clone(),
                        report,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let loose: Vec<String> = rows
                .iter()
                .filter(|r| r.report.tight == Some(false))
                .map(|r| format!("{}/{}", r.measure, r.economy))
                .collect();
            emit(cli, &ReportDoc::Duality { rows })?;
            if loose.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "duality gap above tolerance for {}",
                    loose.join(", ")
                )))
            }
        }
        Command::Norm { economy } => {
            let inst = load(cli)?;
            let economies = pick_economies(&inst, economy.as_deref())?;
            let rows = economies
                .iter()
                .map(|e| {
                    let sp = &inst.space;
                    let norms = RandomVariable::from_vec(e.economy.row_norms());
                    let lp = |p: f64| lp_norm(&norms, p, sp).map_err(core_err);
                    Ok(NormRow {
                        economy: e.name.clone(),
                        luxemburg: luxemburg_norm(&e.economy, &inst.exponent, sp)
                            .map_err(core_err)?,
                        l1: lp(1.0)?,
                        l2: lp(2.0)?,
                        linf: lp(f64::INFINITY)?,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            emit(cli, &ReportDoc::Norm { rows })
        }
        Command::Gen {
            n,
            d,
            scale,
            inf_fraction,
            economies,
            range_order,
            bundle,
        } => {
            let cfg = GeneratorConfig {
                scale: *scale,
                inf_fraction: *inf_fraction,
                economies: *economies,
                range_order: *range_order,
            };
            let inst = generate_instance(cli.seed, *n, *d, &cfg)?;
            match (&cli.out, bundle) {
                (Some(path), true) => Ok(save_instance(&inst, path, InstanceFormat::CsvBundle)?),
                (None, true) => Err(Failure::Usage("--bundle needs --out DIR".into())),
                (Some(path), false) => Ok(save_instance(&inst, path, InstanceFormat::Json)?),
                (None, false) => {
                    print!("{}", crate::instance::instance_to_json(&inst));
                    Ok(())
                }
            }
        }
    }
}
