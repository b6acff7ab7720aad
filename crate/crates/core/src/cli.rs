//! Command-line front end.
//!
//! Exit codes: 0 on success (including the negative result), 1 on output or
//! internal failures, 2 on bad input, 10 when a run finds something that
//! certifies global optimality through the dual.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{
    dual_ascent, verify_global, AscentConfig, AscentResult, DualPoint, GlobalVerdict, Termination,
};
use crate::formulation::{build_formulation, encode_tour, objective};
use crate::instance::{
    brute_force_optimum, random_euclidean_instance, DistanceMatrix, Tour, MAX_ORACLE_CITIES,
};
use crate::inverse::{
    identity_target, inverse_search, InverseConfig, InverseSearchReport, Verdict,
};
use crate::io::{load_instance, write_json, write_matrix_csv, write_text, IoError, ReducedDump};
use crate::reduction::{matches_four_city_layout, reduce};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COUNTEREXAMPLE: i32 = 10;

#[derive(Debug, Parser)]
#[command(
    name = "tsp-dual",
    version,
    about = "Quadratic TSP encoding and its classic Lagrangian dual"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write A, C, D as CSV and a summary JSON.
    Formulate(InstanceArgs),
    /// Write the reduced problem (city 1 fixed in position 1) as JSON.
    Reduce(InstanceArgs),
    /// Run dual ascent, compare with the enumeration optimum and verify the result.
    Dual {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Ascent configuration (JSON); defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Search for data and multipliers that make a target tour dual-optimal.
    Inverse {
        /// Search configuration (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Duality-gap sweep over random Euclidean instances.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance JSON; when absent a random Euclidean instance is generated.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// City count of the generated instance.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Seed of the generated instance.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(#[from] IoError),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Output(_) | CliError::Internal(_) => EXIT_FAILURE,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Where the instance of a run came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub n: usize,
    pub seed: u64,
    pub instance_id: String,
}

fn resolve_instance(args: &InstanceArgs) -> Result<(DistanceMatrix, InstanceEcho), CliError> {
    match &args.instance {
        Some(path) => {
            let (d, _) = load_instance(path).map_err(|e| CliError::Input(e.to_string()))?;
            let id = path.file_stem().map_or_else(
                || "instance".to_string(),
                |s| s.to_string_lossy().into_owned(),
            );
            let n = d.n();
            Ok((
                d,
                InstanceEcho {
                    path: Some(path.display().to_string()),
                    n,
                    seed: args.seed,
                    instance_id: id,
                },
            ))
        }
        None => {
            let (d, _) = random_euclidean_instance(args.n, args.seed)?;
            Ok((
                d,
                InstanceEcho {
                    path: None,
                    n: args.n,
                    seed: args.seed,
                    instance_id: generated_id(args.n, args.seed),
                },
            ))
        }
    }
}

fn generated_id(n: usize, seed: u64) -> String {
    format!("euclid-n{n}-s{seed}")
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| {
        CliError::Output(IoError::Io {
            path: dir.display().to_string(),
            source,
        })
    })
}

fn read_config<T: Default + for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: config parse error: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct FormulationSummary<'a> {
    command: &'static str,
    config: &'a InstanceEcho,
    n: usize,
    a_dim: usize,
    a_symmetric: bool,
    a_zero_diagonal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_tour: Option<Tour>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_tour_objective: Option<f64>,
}

pub fn cmd_formulate(args: &InstanceArgs) -> Result<i32, CliError> {
    let (d, echo) = resolve_instance(args)?;
    prepare_out(&args.out)?;
    let f = build_formulation(&d);
    write_matrix_csv(&args.out.join("A.csv"), &f.a)?;
    write_matrix_csv(&args.out.join("C.csv"), &f.c)?;
    write_matrix_csv(&args.out.join("D.csv"), &f.d)?;
    let oracle = (d.n() <= MAX_ORACLE_CITIES)
        .then(|| brute_force_optimum(&d, true))
        .transpose()?;
    let objective_at_oracle = oracle
        .as_ref()
        .map(|o| objective(&f, encode_tour(&o.best_tour).as_slice()))
        .transpose()?;
    let summary = FormulationSummary {
        command: "formulate",
        config: &echo,
        n: d.n(),
        a_dim: f.a.nrows(),
        a_symmetric: f.a == f.a.transpose(),
        a_zero_diagonal: f.a.diagonal().iter().all(|&v| v == 0.0),
        oracle_tour: oracle.as_ref().map(|o| o.best_tour.clone()),
        oracle_length: oracle.as_ref().map(|o| o.best_length),
        oracle_tour_objective: objective_at_oracle,
    };
    write_json(&args.out.join("formulation.json"), &summary)?;
    if let (Some(t), Some(v)) = (&summary.oracle_tour, summary.oracle_tour_objective) {
        println!("formulate: n = {}, optimal tour {t}, objective {v}", d.n());
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ReducedOutput<'a> {
    command: &'static str,
    config: &'a InstanceEcho,
    #[serde(flatten)]
    reduced: ReducedDump,
}

pub fn cmd_reduce(args: &InstanceArgs) -> Result<i32, CliError> {
    let (d, echo) = resolve_instance(args)?;
    prepare_out(&args.out)?;
    let r = reduce(&build_formulation(&d));
    let matched = matches_four_city_layout(&r, &d);
    let out = ReducedOutput {
        command: "reduce",
        config: &echo,
        reduced: ReducedDump::new(&r, matched),
    };
    write_json(&args.out.join("reduced.json"), &out)?;
    println!(
        "reduce: A_r {}x{}, E_r {}x{}, c0 = {}{}",
        r.a_r.nrows(),
        r.a_r.ncols(),
        r.e_r.nrows(),
        r.e_r.ncols(),
        r.c0,
        matched.map_or(String::new(), |m| format!(", reference layout match: {m}"))
    );
    Ok(EXIT_OK)
}

/// One row of the duality-gap table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRecord {
    pub instance_id: String,
    pub n: usize,
    pub seed: u64,
    pub oracle_optimum: f64,
    pub dual_bound: f64,
    /// `oracle_optimum − dual_bound`.
    pub gap: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Ascent from the diagonally dominant start, compared with enumeration.
pub fn gap_study(
    d: &DistanceMatrix,
    instance_id: &str,
    seed: u64,
    cfg: &AscentConfig,
) -> crate::Result<(GapRecord, AscentResult, GlobalVerdict)> {
    let r = reduce(&build_formulation(d));
    let oracle = brute_force_optimum(d, true)?;
    let res = dual_ascent(&r, &DualPoint::diagonally_dominant(&r), cfg)?;
    let verdict = verify_global(&r, &res.best_point, &oracle, cfg.gtol)?;
    let record = GapRecord {
        instance_id: instance_id.to_string(),
        n: d.n(),
        seed,
        oracle_optimum: oracle.best_length,
        dual_bound: res.best_value,
        gap: oracle.best_length - res.best_value,
        iterations: res.iterations,
        termination: res.termination,
    };
    Ok((record, res, verdict))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::GradientSmall => "GradientSmall",
        Termination::Stalled => "Stalled",
        Termination::IterationCap => "IterationCap",
        Termination::LeftCone => "LeftCone",
    }
}

pub fn trace_csv(res: &AscentResult) -> String {
    let mut out = String::from("iteration,g,grad_norm,min_eig\n");
    for t in &res.trajectory {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.iteration, t.value, t.grad_norm, t.min_eig
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct DualConfigEcho<'a> {
    instance: &'a InstanceEcho,
    ascent: &'a AscentConfig,
}

#[derive(Debug, Serialize)]
struct AscentOutput<'a> {
    command: &'static str,
    config: DualConfigEcho<'a>,
    result: &'a AscentResult,
}

#[derive(Debug, Serialize)]
struct GapOutput<'a> {
    command: &'static str,
    config: DualConfigEcho<'a>,
    record: &'a GapRecord,
    verification: &'a GlobalVerdict,
    counterexample: bool,
}

pub fn cmd_dual(args: &InstanceArgs, config: Option<&Path>) -> Result<i32, CliError> {
    let (d, echo) = resolve_instance(args)?;
    let cfg: AscentConfig = read_config(config)?;
    prepare_out(&args.out)?;
    let (record, res, verdict) = gap_study(&d, &echo.instance_id, echo.seed, &cfg)?;
    let confirms = verdict.confirms();
    write_text(&args.out.join("trace.csv"), &trace_csv(&res))?;
    write_json(
        &args.out.join("ascent.json"),
        &AscentOutput {
            command: "dual",
            config: DualConfigEcho {
                instance: &echo,
                ascent: &cfg,
            },
            result: &res,
        },
    )?;
    write_json(
        &args.out.join("gap.json"),
        &GapOutput {
            command: "dual",
            config: DualConfigEcho {
                instance: &echo,
                ascent: &cfg,
            },
            record: &record,
            verification: &verdict,
            counterexample: confirms,
        },
    )?;
    println!(
        "dual: optimum {}, dual bound {}, gap {}, {} iterations ({})",
        record.oracle_optimum,
        record.dual_bound,
        record.gap,
        record.iterations,
        termination_name(record.termination)
    );
    if confirms {
        eprintln!("!!! COUNTEREXAMPLE: the dual critical point recovers a globally optimal tour: {verdict:?}");
        return Ok(EXIT_COUNTEREXAMPLE);
    }
    println!("dual: verification verdict {verdict:?}");
    Ok(EXIT_OK)
}

pub fn cmd_inverse(
    config: Option<&Path>,
    seed: Option<u64>,
    restarts: Option<usize>,
    out: &Path,
) -> Result<i32, CliError> {
    let mut cfg: InverseConfig = read_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    if !(cfg.lambda_box_factor.is_finite() && cfg.penalty.is_finite()) {
        return Err(CliError::Input(
            "lambda_box_factor and penalty must be finite".into(),
        ));
    }
    if cfg.n < 3 {
        return Err(crate::Error::TooFewCities { n: cfg.n }.into());
    }
    if cfg.n > MAX_ORACLE_CITIES {
        return Err(crate::Error::InstanceTooLarge {
            n: cfg.n,
            max: MAX_ORACLE_CITIES,
        }
        .into());
    }
    let ybar = identity_target(cfg.n)?;
    prepare_out(out)?;
    let report = inverse_search(&ybar, &cfg)?;
    write_json(&out.join("inverse_report.json"), &report)?;
    inverse_exit(&report)
}

fn inverse_exit(report: &InverseSearchReport) -> Result<i32, CliError> {
    println!(
        "inverse: n = {}, {} restarts, {} evaluations, best min eigenvalue {}, verdict {:?}",
        report.config.n,
        report.restarts,
        report.evaluations,
        report
            .best_min_eig
            .map_or_else(|| "n/a".to_string(), |v| v.to_string()),
        report.verdict
    );
    match report.verdict {
        Verdict::NoFeasiblePointFound => Ok(EXIT_OK),
        Verdict::FeasibleCounterexample => {
            match &report.replay {
                Some(r) if r.passed => {
                    eprintln!("!!! COUNTEREXAMPLE: feasible (d, lambda, mu) found and independently replayed");
                    Ok(EXIT_COUNTEREXAMPLE)
                }
                _ => Err(CliError::Internal(
                    "search reported a counterexample that failed independent replay".into(),
                )),
            }
        }
    }
}

/// Settings of the duality-gap sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Instances per city count.
    pub k: usize,
    /// City counts to sweep.
    pub n: Vec<usize>,
    /// Instance `i` of each size uses seed `seed + i`.
    pub seed: u64,
    pub ascent: AscentConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: 10,
            n: vec![4, 5],
            seed: 0,
            ascent: AscentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSummary {
    pub rows: usize,
    pub mean_gap: f64,
    pub min_gap: f64,
    pub max_gap: f64,
}

#[derive(Debug, Serialize)]
struct ExperimentOutput<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    summary: Option<GapSummary>,
    counterexamples: Vec<String>,
}

pub const EXPERIMENT_HEADER: &str =
    "instance_id,n,seed,oracle_optimum,dual_bound,gap,iterations,termination";

/// Runs the sweep and renders the CSV table.
pub fn run_experiment(
    cfg: &ExperimentConfig,
) -> crate::Result<(String, Option<GapSummary>, Vec<String>)> {
    let jobs: Vec<(usize, u64)> = cfg
        .n
        .iter()
        .flat_map(|&n| (0..cfg.k as u64).map(move |i| (n, cfg.seed.wrapping_add(i))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let (d, _) = random_euclidean_instance(n, seed)?;
            gap_study(&d, &generated_id(n, seed), seed, &cfg.ascent)
        })
        .collect::<crate::Result<Vec<_>>>()?;

    let mut csv = String::from(EXPERIMENT_HEADER);
    csv.push('\n');
    for (r, _, _) in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance_id,
            r.n,
            r.seed,
            r.oracle_optimum,
            r.dual_bound,
            r.gap,
            r.iterations,
            termination_name(r.termination)
        ));
    }
    let summary = (!rows.is_empty()).then(|| {
        let gaps: Vec<f64> = rows.iter().map(|(r, _, _)| r.gap).collect();
        GapSummary {
            rows: gaps.len(),
            mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
            min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
            max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    });
    if let Some(s) = &summary {
        for (label, gap) in [("mean", s.mean_gap), ("min", s.min_gap), ("max", s.max_gap)] {
            csv.push_str(&format!("summary_{label},,,,,{gap},,\n"));
        }
    }
    let counterexamples = rows
        .iter()
        .filter(|(_, _, v)| v.confirms())
        .map(|(r, _, _)| r.instance_id.clone())
        .collect();
    Ok((csv, summary, counterexamples))
}

pub fn cmd_experiment(
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<i32, CliError> {
    let mut cfg: ExperimentConfig = read_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(&bad) = cfg
        .n
        .iter()
        .find(|&&n| !(3..=MAX_ORACLE_CITIES).contains(&n))
    {
        return Err(CliError::Input(format!(
            "city count {bad} outside 3..={MAX_ORACLE_CITIES}"
        )));
    }
    prepare_out(out)?;
    let (csv, summary, counterexamples) = run_experiment(&cfg)?;
    write_text(&out.join("experiment.csv"), &csv)?;
    write_json(
        &out.join("experiment.json"),
        &ExperimentOutput {
            command: "experiment",
            config: &cfg,
            summary,
            counterexamples: counterexamples.clone(),
        },
    )?;
    if let Some(s) = summary {
        println!(
            "experiment: {} instances, gap mean {} min {} max {}",
            s.rows, s.mean_gap, s.min_gap, s.max_gap
        );
    }
    if !counterexamples.is_empty() {
        eprintln!("!!! COUNTEREXAMPLE: dual recovered a global optimum on {counterexamples:?}");
        return Ok(EXIT_COUNTEREXAMPLE);
    }
    Ok(EXIT_OK)
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Formulate(a) => cmd_formulate(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Dual { instance, config } => cmd_dual(instance, config.as_deref()),
        Command::Inverse {
            config,
            seed,
            restarts,
            out,
        } => cmd_inverse(config.as_deref(), *seed, *restarts, out),
        Command::Experiment { config, seed, out } => cmd_experiment(config.as_deref(), *seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses arguments (clap exits with code 2 on usage errors) and runs.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
