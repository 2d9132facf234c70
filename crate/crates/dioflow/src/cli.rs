//! Batch command-line front end.
//!
//! Subcommands expose the pipeline stages: `parse`, `oracle`, `flow`,
//! `evolve`, `sweep`, `decide`, `study`. Every command prints a JSON document
//! to stdout (or `--out`); `flow`, `evolve`, and `sweep` can additionally
//! write CSV trace files for plotting. Exit codes: 0 when a command produced
//! a definite result, 2 when the procedure was inconclusive (the verdict
//! machinery is semi-decidable in spirit, and shell pipelines want to branch
//! on that), 1 for usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use num_traits::ToPrimitive;
use serde::ser::Serializer;
use serde::Serialize;

use crate::decision::{convergence_study, decide, DecideConfig, Verdict, VerdictStatus};
use crate::diophantine::{
    brute_force_min_square_capped, parse as parse_polynomial, LatticeBox, Polynomial,
    DEFAULT_ENUMERATION_CAP,
};
use crate::dynamics::{
    evolve_with_probe, identify_ground, tau_sweep_with, EvolutionReport, ProbeRow, SweepConfig,
};
use crate::flow::{continue_flow_with, snap_verdict, ContinuationConfig};
use crate::fock::{coherent_state, OperatorDump, ProblemInstance, Schedule, StateDump};

#[derive(Parser)]
#[command(
    name = "dioflow",
    version,
    about = "Decide Diophantine solvability within a lattice box by exact enumeration, spectral-flow continuation, and adiabatic Schrödinger evolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a polynomial and print its canonical expanded form.
    Parse(ParseArgs),
    /// Exact brute-force minimum of D² over the box.
    Oracle(OracleArgs),
    /// Spectral-flow continuation from s = 0 to s = 1.
    Flow(FlowArgs),
    /// One Schrödinger evolution of fixed duration.
    Evolve(EvolveArgs),
    /// Grow τ geometrically until the majority-occupation rule identifies a
    /// ground candidate.
    Sweep(SweepArgs),
    /// Merge oracle, flow, and sweep into a verdict.
    Decide(DecideArgs),
    /// Run decide across a ladder of increasing cutoffs.
    Study(StudyArgs),
}

#[derive(Args)]
struct PolyArg {
    /// Polynomial over x1, x2, ... with integer coefficients.
    #[arg(long)]
    poly: String,
    /// Write the JSON document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Per-mode occupation cutoffs, comma separated (for example "6,6").
    #[arg(long)]
    cutoffs: String,
    /// Displacements α_i, comma separated reals; default all 1.
    #[arg(long)]
    alphas: Option<String>,
    /// Weights λ_i, comma separated positive reals; default square roots of
    /// the primes.
    #[arg(long)]
    lambdas: Option<String>,
    /// Interpolation schedule.
    #[arg(long, default_value = "linear")]
    schedule: String,
    /// Seed reserved for randomized self-checks; the pipeline itself is
    /// deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    poly: PolyArg,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    poly: PolyArg,
    /// Per-mode upper bounds of the search box, comma separated.
    #[arg(long)]
    cutoffs: String,
    /// Enumeration cap on the number of lattice points.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Predictor-corrector tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Number of tracked eigenstates.
    #[arg(long, default_value_t = 6)]
    tracked: usize,
    /// Prefix for CSV trace files.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Prefix for JSON dumps of the constructed operators.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Total physical duration.
    #[arg(long)]
    tau: f64,
    /// Integration steps; default max(1000, ceil(200 τ)).
    #[arg(long)]
    steps: Option<usize>,
    /// Prefix for CSV trace files.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Prefix for JSON dumps of the constructed operators and initial state.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 2.0)]
    growth: f64,
    #[arg(long, default_value_t = 16)]
    max_rounds: usize,
    /// Steps per unit of τ.
    #[arg(long, default_value_t = 200.0)]
    steps_per_tau: f64,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    poly: PolyArg,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 6)]
    tracked: usize,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 2.0)]
    growth: f64,
    #[arg(long, default_value_t = 16)]
    max_rounds: usize,
    #[arg(long, default_value_t = 200.0)]
    steps_per_tau: f64,
    /// Flow work budget in model units; 0 lifts the cap.
    #[arg(long)]
    flow_budget: Option<f64>,
    /// Sweep work budget in model units; 0 lifts the cap.
    #[arg(long)]
    dynamics_budget: Option<f64>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    poly: PolyArg,
    /// Semicolon-separated ladder of comma-separated cutoff tuples, for
    /// example "2;4;8" or "2,2;4,4;8,8".
    #[arg(long)]
    ladder: String,
    #[command(flatten)]
    instance_defaults: SweepDefaults,
}

#[derive(Args)]
struct SweepDefaults {
    #[arg(long, default_value = "linear")]
    schedule: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 6)]
    tracked: usize,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 2.0)]
    growth: f64,
    #[arg(long, default_value_t = 16)]
    max_rounds: usize,
    #[arg(long, default_value_t = 200.0)]
    steps_per_tau: f64,
}

// ---------------------------------------------------------------------------
// JSON shapes
// ---------------------------------------------------------------------------

fn serialize_biguint<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
    match value.to_u64() {
        Some(v) => serializer.serialize_u64(v),
        None => serializer.serialize_str(&value.to_string()),
    }
}

#[derive(Serialize)]
struct MonomialJson {
    coefficient: String,
    exponents: Vec<u32>,
}

#[derive(Serialize)]
struct ParseJson {
    num_vars: usize,
    monomials: Vec<MonomialJson>,
    canonical: String,
}

#[derive(Serialize)]
struct OracleJson {
    #[serde(serialize_with = "serialize_biguint")]
    min: BigUint,
    witnesses: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct FlowJson {
    e0_final: f64,
    snapped: u64,
    confident: bool,
    solvable_within_truncation: bool,
    accepted_steps: usize,
    min_gap_floor: f64,
    max_remainder_estimate: f64,
}

#[derive(Serialize)]
struct OccupationJson {
    state: Vec<u32>,
    probability: f64,
}

#[derive(Serialize)]
struct RoundJson {
    tau: f64,
    steps: usize,
    norm_drift: f64,
    top_occupations: Vec<OccupationJson>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct EvolveJson {
    tau: f64,
    steps: usize,
    norm_drift: f64,
    top_occupations: Vec<OccupationJson>,
    warnings: Vec<String>,
    identified: Option<Vec<u32>>,
    final_state: StateDump,
}

#[derive(Serialize)]
struct SweepJson {
    identified: Option<Vec<u32>>,
    truncated_by_budget: bool,
    rounds: Vec<RoundJson>,
}

#[derive(Serialize)]
struct ErrorJson {
    error: String,
}

fn occupations_json(report: &EvolutionReport) -> Vec<OccupationJson> {
    report
        .top_occupations
        .iter()
        .map(|(state, probability)| OccupationJson {
            state: state.clone(),
            probability: *probability,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

enum CliError {
    /// Input or usage problem; exits 1 with a message on stderr.
    Usage(String),
    /// The procedure ran but could not produce a definite result; exits 2
    /// after printing the JSON payload.
    Inconclusive(serde_json::Value),
}

type CommandResult = Result<(serde_json::Value, i32), CliError>;

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn parse_u32_list(text: &str, what: &str) -> Result<Vec<u32>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("invalid {what} entry '{part}'")))
        })
        .collect()
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid {what} entry '{part}'")))
        })
        .collect()
}

fn parse_poly_arg(text: &str) -> Result<Polynomial, CliError> {
    parse_polynomial(text).map_err(usage)
}

fn require_positive(value: f64, what: &str) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} must be positive, got {value}")))
    }
}

fn require_sweep_params(tau0: f64, growth: f64, steps_per_tau: f64) -> Result<(), CliError> {
    require_positive(tau0, "--tau0")?;
    require_positive(steps_per_tau, "--steps-per-tau")?;
    if !(growth.is_finite() && growth > 1.0) {
        return Err(CliError::Usage(format!(
            "--growth must exceed 1, got {growth}"
        )));
    }
    Ok(())
}

fn build_instance(
    polynomial: &Polynomial,
    args: &InstanceArgs,
) -> Result<ProblemInstance, CliError> {
    let cutoffs = parse_u32_list(&args.cutoffs, "cutoffs")?;
    if cutoffs.len() != polynomial.num_vars() {
        return Err(CliError::Usage(format!(
            "polynomial has {} variables but {} cutoffs were given",
            polynomial.num_vars(),
            cutoffs.len()
        )));
    }
    let schedule = Schedule::from_name(&args.schedule)
        .ok_or_else(|| CliError::Usage(format!("unknown schedule '{}'", args.schedule)))?;
    let lambdas = match &args.lambdas {
        Some(text) => parse_f64_list(text, "lambdas")?,
        None => crate::fock::choose_lambdas(polynomial.num_vars()),
    };
    let alphas = match &args.alphas {
        Some(text) => parse_f64_list(text, "alphas")?
            .into_iter()
            .map(|re| C64::new(re, 0.0))
            .collect(),
        None => vec![C64::new(1.0, 0.0); polynomial.num_vars()],
    };
    ProblemInstance::new(polynomial.clone(), &cutoffs, lambdas, alphas, schedule).map_err(usage)
}

fn dump_operators(
    prefix: &PathBuf,
    instance: &ProblemInstance,
    with_initial_state: bool,
) -> Result<(), CliError> {
    let ops = instance.operators().map_err(usage)?;
    let write = |suffix: &str, value: serde_json::Value| -> Result<(), CliError> {
        let path = prefix.with_file_name(format!(
            "{}_{suffix}.json",
            prefix.file_name().and_then(|n| n.to_str()).unwrap_or("dump")
        ));
        fs::write(&path, format!("{:#}\n", value))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    };
    write(
        "hi",
        serde_json::to_value(OperatorDump::new(&ops.h_i, &instance.basis)).expect("serializable"),
    )?;
    write(
        "hp",
        serde_json::to_value(OperatorDump::new(&ops.h_p, &instance.basis)).expect("serializable"),
    )?;
    if with_initial_state {
        let prepared = coherent_state(&instance.alphas, &instance.basis).map_err(usage)?;
        write(
            "psi0",
            serde_json::to_value(StateDump::new(&prepared.state)).expect("serializable"),
        )?;
    }
    Ok(())
}

fn trace_path(prefix: &PathBuf, suffix: &str) -> PathBuf {
    prefix.with_file_name(format!(
        "{}_{suffix}.csv",
        prefix.file_name().and_then(|n| n.to_str()).unwrap_or("trace")
    ))
}

fn write_dynamics_trace(path: &PathBuf, rows: &[ProbeRow]) -> Result<(), CliError> {
    let mut buffer = String::from("t,norm,candidate_occupation\n");
    for row in rows {
        buffer.push_str(&format!(
            "{},{},{}\n",
            row.t, row.norm, row.candidate_occupation
        ));
    }
    fs::write(path, buffer).map_err(|e| CliError::Usage(format!("cannot write trace: {e}")))
}

fn cmd_parse(args: &ParseArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    let json = ParseJson {
        num_vars: polynomial.num_vars(),
        monomials: polynomial
            .monomials()
            .iter()
            .map(|m| MonomialJson {
                coefficient: m.coefficient.to_string(),
                exponents: m.exponents.clone(),
            })
            .collect(),
        canonical: polynomial.to_string(),
    };
    Ok((serde_json::to_value(json).expect("serializable"), 0))
}

fn cmd_oracle(args: &OracleArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    let cutoffs = parse_u32_list(&args.cutoffs, "cutoffs")?;
    if cutoffs.len() != polynomial.num_vars() {
        return Err(CliError::Usage(format!(
            "polynomial has {} variables but {} cutoffs were given",
            polynomial.num_vars(),
            cutoffs.len()
        )));
    }
    let lattice = LatticeBox::from_cutoffs(&cutoffs);
    let result = brute_force_min_square_capped(&polynomial, &lattice, args.cap).map_err(usage)?;
    let json = OracleJson {
        min: result.min_square,
        witnesses: result.witnesses,
    };
    Ok((serde_json::to_value(json).expect("serializable"), 0))
}

fn cmd_flow(args: &FlowArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    require_positive(args.tol, "--tol")?;
    if args.tracked < 2 {
        return Err(CliError::Usage(
            "--tracked must be at least 2 (ground and first excited)".into(),
        ));
    }
    let instance = build_instance(&polynomial, &args.instance)?;
    if let Some(prefix) = &args.dump {
        dump_operators(prefix, &instance, false)?;
    }
    let config = ContinuationConfig::default();
    match continue_flow_with(&instance, args.tracked, args.tol, &config) {
        Ok(path) => {
            if let Some(prefix) = &args.trace {
                let mut buffer = Vec::new();
                path.write_csv(&mut buffer)
                    .map_err(|e| CliError::Usage(format!("cannot render trace: {e}")))?;
                fs::write(trace_path(prefix, "flow"), buffer)
                    .map_err(|e| CliError::Usage(format!("cannot write trace: {e}")))?;
            }
            let e0 = path.e0_final().expect("complete path");
            let verdict = snap_verdict(e0);
            let json = FlowJson {
                e0_final: e0,
                snapped: verdict.snapped,
                confident: verdict.confident,
                solvable_within_truncation: verdict.solvable_within_truncation(),
                accepted_steps: path.step_log.len(),
                min_gap_floor: path
                    .states
                    .iter()
                    .map(|s| s.gap_floor)
                    .fold(f64::INFINITY, f64::min),
                max_remainder_estimate: path
                    .step_log
                    .iter()
                    .map(|r| r.remainder_estimate)
                    .fold(0.0, f64::max),
            };
            Ok((serde_json::to_value(json).expect("serializable"), 0))
        }
        Err(failure) => Err(CliError::Inconclusive(
            serde_json::to_value(ErrorJson {
                error: failure.to_string(),
            })
            .expect("serializable"),
        )),
    }
}

fn evolve_steps(tau: f64, steps: Option<usize>) -> usize {
    steps.unwrap_or_else(|| SweepConfig::default().steps_for(tau))
}

fn cmd_evolve(args: &EvolveArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    require_positive(args.tau, "--tau")?;
    let instance = build_instance(&polynomial, &args.instance)?;
    if let Some(prefix) = &args.dump {
        dump_operators(prefix, &instance, true)?;
    }
    let steps = evolve_steps(args.tau, args.steps);
    let mut rows: Vec<ProbeRow> = Vec::new();
    let mut probe = |row: ProbeRow| rows.push(row);
    let probe_ref: Option<&mut dyn FnMut(ProbeRow)> = if args.trace.is_some() {
        Some(&mut probe)
    } else {
        None
    };
    let (report, _) = evolve_with_probe(&instance, args.tau, steps, probe_ref).map_err(usage)?;
    if let Some(prefix) = &args.trace {
        write_dynamics_trace(&trace_path(prefix, "dynamics"), &rows)?;
    }
    let json = EvolveJson {
        tau: report.tau,
        steps: report.steps,
        norm_drift: report.norm_drift,
        top_occupations: occupations_json(&report),
        warnings: report.warnings.clone(),
        identified: identify_ground(&report),
        final_state: StateDump::new(&report.final_state),
    };
    Ok((serde_json::to_value(json).expect("serializable"), 0))
}

fn cmd_sweep(args: &SweepArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    require_sweep_params(args.tau0, args.growth, args.steps_per_tau)?;
    let instance = build_instance(&polynomial, &args.instance)?;
    let config = SweepConfig {
        tau0: args.tau0,
        growth: args.growth,
        max_rounds: args.max_rounds,
        steps_per_tau: args.steps_per_tau,
        ..SweepConfig::default()
    };
    let outcome = tau_sweep_with(&instance, &config).map_err(usage)?;
    let rounds = outcome
        .history
        .iter()
        .map(|report| RoundJson {
            tau: report.tau,
            steps: report.steps,
            norm_drift: report.norm_drift,
            top_occupations: occupations_json(report),
            warnings: report.warnings.clone(),
        })
        .collect();
    let identified = outcome.identified.clone();
    let json = SweepJson {
        identified: outcome.identified,
        truncated_by_budget: outcome.truncated_by_budget,
        rounds,
    };
    let value = serde_json::to_value(json).expect("serializable");
    if identified.is_some() {
        Ok((value, 0))
    } else {
        Err(CliError::Inconclusive(value))
    }
}

fn decide_config_from(args: &DecideArgs, schedule: Schedule) -> DecideConfig {
    let budget = |flag: Option<f64>, default: Option<f64>| match flag {
        None => default,
        Some(v) if v <= 0.0 => None,
        Some(v) => Some(v),
    };
    let defaults = DecideConfig::default();
    DecideConfig {
        lambdas: None,
        alphas: None,
        schedule,
        tracked: args.tracked,
        flow_tol: args.tol,
        tau0: args.tau0,
        growth: args.growth,
        max_rounds: args.max_rounds,
        steps_per_tau: args.steps_per_tau,
        min_steps: defaults.min_steps,
        flow_budget: budget(args.flow_budget, defaults.flow_budget),
        dynamics_budget: budget(args.dynamics_budget, defaults.dynamics_budget),
        enumeration_cap: defaults.enumeration_cap,
    }
}

fn verdict_exit(verdict: &Verdict) -> i32 {
    match verdict.status {
        VerdictStatus::SolvableWithWitness | VerdictStatus::NoSolutionWithinBox => 0,
        VerdictStatus::Inconclusive => 2,
    }
}

fn cmd_decide(args: &DecideArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    require_positive(args.tol, "--tol")?;
    require_sweep_params(args.tau0, args.growth, args.steps_per_tau)?;
    let cutoffs = parse_u32_list(&args.instance.cutoffs, "cutoffs")?;
    if cutoffs.len() != polynomial.num_vars() {
        return Err(CliError::Usage(format!(
            "polynomial has {} variables but {} cutoffs were given",
            polynomial.num_vars(),
            cutoffs.len()
        )));
    }
    let schedule = Schedule::from_name(&args.instance.schedule)
        .ok_or_else(|| CliError::Usage(format!("unknown schedule '{}'", args.instance.schedule)))?;
    let mut config = decide_config_from(args, schedule);
    if let Some(text) = &args.instance.lambdas {
        config.lambdas = Some(parse_f64_list(text, "lambdas")?);
    }
    if let Some(text) = &args.instance.alphas {
        config.alphas = Some(
            parse_f64_list(text, "alphas")?
                .into_iter()
                .map(|re| C64::new(re, 0.0))
                .collect(),
        );
    }
    let verdict = decide(&polynomial, &cutoffs, &config).map_err(usage)?;
    let exit = verdict_exit(&verdict);
    Ok((serde_json::to_value(&verdict).expect("serializable"), exit))
}

fn cmd_study(args: &StudyArgs) -> CommandResult {
    let polynomial = parse_poly_arg(&args.poly.poly)?;
    require_positive(args.instance_defaults.tol, "--tol")?;
    require_sweep_params(
        args.instance_defaults.tau0,
        args.instance_defaults.growth,
        args.instance_defaults.steps_per_tau,
    )?;
    let ladder: Vec<Vec<u32>> = args
        .ladder
        .split(';')
        .map(|rung| parse_u32_list(rung, "ladder"))
        .collect::<Result<_, _>>()?;
    for rung in &ladder {
        if rung.len() != polynomial.num_vars() {
            return Err(CliError::Usage(format!(
                "ladder rung {rung:?} does not match the {} polynomial variables",
                polynomial.num_vars()
            )));
        }
    }
    let schedule = Schedule::from_name(&args.instance_defaults.schedule).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown schedule '{}'",
            args.instance_defaults.schedule
        ))
    })?;
    let defaults = DecideConfig::default();
    let config = DecideConfig {
        schedule,
        tracked: args.instance_defaults.tracked,
        flow_tol: args.instance_defaults.tol,
        tau0: args.instance_defaults.tau0,
        growth: args.instance_defaults.growth,
        max_rounds: args.instance_defaults.max_rounds,
        steps_per_tau: args.instance_defaults.steps_per_tau,
        ..defaults
    };
    let report = convergence_study(&polynomial, &ladder, &config).map_err(usage)?;
    let value = serde_json::to_value(&report).expect("serializable");
    let any_inconclusive = report
        .rungs
        .iter()
        .any(|r| r.verdict.status == VerdictStatus::Inconclusive);
    if any_inconclusive {
        Err(CliError::Inconclusive(value))
    } else {
        Ok((value, 0))
    }
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<(), String> {
    let rendered = format!("{:#}\n", value);
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| format!("cannot write output: {e}")),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes())
                .map_err(|e| format!("cannot write output: {e}"))
        }
    }
}

fn out_path(command: &Command) -> Option<&PathBuf> {
    let poly = match command {
        Command::Parse(a) => &a.poly,
        Command::Oracle(a) => &a.poly,
        Command::Flow(a) => &a.poly,
        Command::Evolve(a) => &a.poly,
        Command::Sweep(a) => &a.poly,
        Command::Decide(a) => &a.poly,
        Command::Study(a) => &a.poly,
    };
    poly.out.as_ref()
}

/// Entry point for the `dioflow` binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders both --help/--version and usage errors; the exit
            // code distinguishes them.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Flow(args) => cmd_flow(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Decide(args) => cmd_decide(args),
        Command::Study(args) => cmd_study(args),
    };
    match result {
        Ok((value, exit)) => match emit(&value, out_path(&cli.command)) {
            Ok(()) => exit,
            Err(message) => {
                eprintln!("{message}");
                1
            }
        },
        Err(CliError::Usage(message)) => {
            eprintln!("{message}");
            1
        }
        Err(CliError::Inconclusive(value)) => match emit(&value, out_path(&cli.command)) {
            Ok(()) => 2,
            Err(message) => {
                eprintln!("{message}");
                1
            }
        },
    }
}
