//! Command-line surface for the sparse-corruption recovery library.
//!
//! Exit codes: 0 on success, 2 on usage/validation errors, 3 on numerical
//! failures (non-convergence, rank deficiency, exceeded search budgets).

mod figures;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparsecor::dictionary::{coherence_profile, CoherenceProfile, DictSpec};
use sparsecor::guarantees::{
    check_guarantee, closed_form_max_nx_unitary, max_recoverable_nx, BetaRule, Program, Scenario,
    SparsityPoint,
};
use sparsecor::montecarlo::{run_sweep, SweepGrid};
use sparsecor::signals::{instance_from_parts, instance_to_parts, make_instance, Instance};
use sparsecor::solvers::{solve_l0_exhaustive, solve_l1, AdmmOptions, SupportMode};
use sparsecor::Error;

/// Environment variable holding the default output directory for relative
/// `--out` paths.
const OUTDIR_ENV: &str = "SPARSECOR_OUTDIR";

#[derive(Parser)]
#[command(
    name = "sparsecor",
    about = "Sparse signal recovery under sparse corruption: coherence diagnostics, recovery guarantees, solvers, and Monte-Carlo sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the coherence profile of a dictionary pair.
    Coherence(CoherenceArgs),
    /// Evaluate the recovery guarantee at a sparsity point.
    Guarantee(GuaranteeArgs),
    /// Largest recoverable signal sparsity for a given interference sparsity.
    MaxNx(MaxNxArgs),
    /// Emit the curve data behind a named figure preset as CSV.
    Figure(FigureArgs),
    /// Generate (or load) an instance and run a recovery program on it.
    Recover(RecoverArgs),
    /// Monte-Carlo sweep over a sparsity grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CoherenceArgs {
    /// Signal dictionary spec, e.g. dft:64, identity:8, concat:identity:64+dft:64.
    #[arg(long = "a")]
    a: String,
    /// Interference dictionary spec.
    #[arg(long = "b")]
    b: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KnownArg {
    Both,
    X,
    E,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomArg {
    X,
    E,
    Both,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProgramArg {
    Pinv,
    L0,
    L1,
}

impl ProgramArg {
    fn to_program(self) -> Program {
        match self {
            ProgramArg::Pinv => Program::Pseudoinverse,
            ProgramArg::L0 => Program::L0,
            ProgramArg::L1 => Program::L1,
        }
    }
}

#[derive(Args)]
struct ScenarioFlags {
    /// Which supports are known prior to recovery.
    #[arg(long, value_enum)]
    known: KnownArg,
    /// Which supports are drawn uniformly at random.
    #[arg(long, value_enum)]
    random: RandomArg,
    /// Recovery program type.
    #[arg(long, value_enum)]
    program: ProgramArg,
}

impl ScenarioFlags {
    fn build(&self) -> Result<Scenario, Error> {
        let (xk, ek) = match self.known {
            KnownArg::Both => (true, true),
            KnownArg::X => (true, false),
            KnownArg::E => (false, true),
            KnownArg::None => (false, false),
        };
        let (xr, er) = match self.random {
            RandomArg::X => (true, false),
            RandomArg::E => (false, true),
            RandomArg::Both => (true, true),
            RandomArg::None => (false, false),
        };
        Scenario::new(xk, ek, xr, er, self.program.to_program())
    }
}

/// Profile source: a dictionary pair built from specs, a named symbolic
/// profile (no matrices, any problem size), or explicit scalar fields.
#[derive(Args)]
struct ProfileFlags {
    /// Signal dictionary spec (exact computation path).
    #[arg(long = "a")]
    a: Option<String>,
    /// Interference dictionary spec.
    #[arg(long = "b")]
    b: Option<String>,
    /// Symbolic profile: unitary:<m>, two-onb:<m>, or two-onb-rev:<m>
    /// (m accepts scientific notation, e.g. 1e8).
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    mu_a: Option<f64>,
    #[arg(long)]
    mu_b: Option<f64>,
    #[arg(long)]
    mu_m: Option<f64>,
    #[arg(long)]
    norm_a: Option<f64>,
    #[arg(long)]
    norm_b: Option<f64>,
    #[arg(long)]
    norm_ab: Option<f64>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n_a: Option<String>,
    #[arg(long)]
    n_b: Option<String>,
}

fn parse_size(s: &str, flag: &str) -> Result<u64, Error> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("{flag}: expected a number, got `{s}`")))?;
    if !(v >= 1.0) || !v.is_finite() || v > 1e15 {
        return Err(Error::Parse(format!(
            "{flag}: must be an integer in [1, 1e15], got `{s}`"
        )));
    }
    Ok(v.round() as u64)
}

impl ProfileFlags {
    fn build(&self) -> Result<CoherenceProfile, Error> {
        if let (Some(a), Some(b)) = (&self.a, &self.b) {
            let da = DictSpec::parse(a)?.build()?;
            let db = DictSpec::parse(b)?.build()?;
            return coherence_profile(&da, &db);
        }
        if let Some(spec) = &self.profile {
            let (kind, size) = spec.split_once(':').ok_or_else(|| {
                Error::Parse(format!(
                    "--profile expects kind:m (unitary, two-onb, two-onb-rev), got `{spec}`"
                ))
            })?;
            let m = parse_size(size, "--profile")?;
            return match kind {
                "unitary" => Ok(CoherenceProfile::unitary_max_incoherent(m)),
                "two-onb" => Ok(CoherenceProfile::two_onb_interference(m)),
                "two-onb-rev" => Ok(CoherenceProfile::two_onb_interference(m).swapped()),
                other => Err(Error::Parse(format!("unknown profile kind `{other}`"))),
            };
        }
        match (
            self.mu_a, self.mu_b, self.mu_m, self.norm_a, self.norm_b, self.norm_ab, &self.m,
            &self.n_a, &self.n_b,
        ) {
            (
                Some(mu_a),
                Some(mu_b),
                Some(mu_m),
                Some(norm_a),
                Some(norm_b),
                Some(norm_ab),
                Some(m),
                Some(n_a),
                Some(n_b),
            ) => CoherenceProfile::new(
                mu_a,
                mu_b,
                mu_m,
                norm_a,
                norm_b,
                norm_ab,
                parse_size(m, "--m")?,
                parse_size(n_a, "--n-a")?,
                parse_size(n_b, "--n-b")?,
            ),
            _ => Err(Error::InvalidArgument(
                "profile: give --a/--b dictionary specs, a --profile name, or all of \
                 --mu-a --mu-b --mu-m --norm-a --norm-b --norm-ab --m --n-a --n-b"
                    .into(),
            )),
        }
    }
}

#[derive(Args)]
struct BetaFlags {
    /// Explicit confidence exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Rule for choosing beta from m: log-m or log-m-over-3.
    #[arg(long)]
    beta_rule: Option<String>,
}

impl BetaFlags {
    fn rule(&self, program: Program) -> Result<BetaRule, Error> {
        match (&self.beta, &self.beta_rule) {
            (Some(b), None) => Ok(BetaRule::Explicit(*b)),
            (None, Some(r)) => match r.as_str() {
                "log-m" => Ok(BetaRule::LogM),
                "log-m-over-3" => Ok(BetaRule::LogMOver3),
                other => Err(Error::Parse(format!(
                    "--beta-rule must be log-m or log-m-over-3, got `{other}`"
                ))),
            },
            (None, None) => Ok(match program {
                // Default per convention: the l0-type bound hits 1 - 1/m.
                Program::L1 => BetaRule::LogMOver3,
                _ => BetaRule::LogM,
            }),
            (Some(_), Some(_)) => Err(Error::InvalidArgument(
                "give either --beta or --beta-rule, not both".into(),
            )),
        }
    }
}

#[derive(Args)]
struct GuaranteeArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[command(flatten)]
    profile: ProfileFlags,
    #[arg(long)]
    nx: u64,
    #[arg(long)]
    ne: u64,
    #[command(flatten)]
    beta: BetaFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaxNxArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[command(flatten)]
    profile: ProfileFlags,
    #[arg(long)]
    ne: u64,
    #[command(flatten)]
    beta: BetaFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// Preset name; run with an unknown name to list the valid ones.
    preset: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecoverProgram {
    Pinv,
    BpEs,
    BpXs,
    BpC,
    L0Exhaustive,
}

#[derive(Args)]
struct RecoverArgs {
    /// Signal dictionary spec (required unless --instance is given with its
    /// dictionaries implied by the caller).
    #[arg(long = "a")]
    a: Option<String>,
    #[arg(long = "b")]
    b: Option<String>,
    /// Which supports are known (instance generation).
    #[arg(long, value_enum, default_value = "both")]
    known: KnownArg,
    /// Which supports are random (instance generation).
    #[arg(long, value_enum, default_value = "both")]
    random: RandomArg,
    #[arg(long, default_value_t = 1)]
    nx: usize,
    #[arg(long, default_value_t = 1)]
    ne: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Recovery program to run.
    #[arg(long, value_enum)]
    program: RecoverProgram,
    /// Base path of a saved instance (reads BASE.json and BASE.csv).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Base path to save the generated instance (writes BASE.json, BASE.csv).
    #[arg(long)]
    save_instance: Option<PathBuf>,
    /// Include the recovered vectors in the report JSON.
    #[arg(long)]
    vectors: bool,
    #[arg(long, default_value_t = 1e-5)]
    success_tol: f64,
    /// Cap for the exhaustive l0 total sparsity (defaults to nx + ne).
    #[arg(long)]
    l0_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "a")]
    a: String,
    #[arg(long = "b")]
    b: String,
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Signal sparsities: comma list (1,2,4) or range (0:8 or 0:8:2).
    #[arg(long)]
    nx: String,
    /// Interference sparsities, same syntax.
    #[arg(long)]
    ne: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-5)]
    success_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_int_list(s: &str, flag: &str) -> Result<Vec<usize>, Error> {
    let bad = |why: &str| Error::Parse(format!("{flag}: {why} in `{s}`"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad("expected start:stop or start:stop:step"));
        }
        let start: usize = parts[0].parse().map_err(|_| bad("bad start"))?;
        let stop: usize = parts[1].parse().map_err(|_| bad("bad stop"))?;
        let step: usize = if parts.len() == 3 {
            parts[2].parse().map_err(|_| bad("bad step"))?
        } else {
            1
        };
        if step == 0 || stop < start {
            return Err(bad("empty range"));
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad("bad integer")))
            .collect()
    }
}

/// Resolves the output destination; relative paths land in $SPARSECOR_OUTDIR
/// when it is set.
fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let resolved = if path.is_relative() {
                match std::env::var_os(OUTDIR_ENV) {
                    Some(dir) => Path::new(&dir).join(path),
                    None => path.clone(),
                }
            } else {
                path.clone()
            };
            if let Some(parent) = resolved.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&resolved, content)?;
            eprintln!("wrote {}", resolved.display());
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. }
        | Error::RankDeficient { .. }
        | Error::BudgetExceeded { .. }
        | Error::Io(_)
        | Error::Json(_) => 3,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Coherence(args) => cmd_coherence(args),
        Command::Guarantee(args) => cmd_guarantee(args),
        Command::MaxNx(args) => cmd_max_nx(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code_for(&e));
    }
}

fn cmd_coherence(args: CoherenceArgs) -> Result<(), Error> {
    let da = DictSpec::parse(&args.a)
        .map_err(|e| Error::Parse(format!("--a: {e}")))?
        .build()?;
    let db = DictSpec::parse(&args.b)
        .map_err(|e| Error::Parse(format!("--b: {e}")))?
        .build()?;
    let profile = coherence_profile(&da, &db)?;
    let json = serde_json::to_string_pretty(&profile)?;
    write_output(&args.out, &format!("{json}\n"))
}

fn cmd_guarantee(args: GuaranteeArgs) -> Result<(), Error> {
    let scenario = args.scenario.build()?;
    let profile = args.profile.build()?;
    let beta = args.beta.rule(scenario.program)?.value(profile.m);
    let pt = SparsityPoint::new(args.nx, args.ne, beta)?;
    let result = check_guarantee(&scenario, &profile, &pt)?;
    let payload = serde_json::json!({
        "case": scenario.case_label(),
        "nx": args.nx,
        "ne": args.ne,
        "beta": beta,
        "result": result,
    });
    write_output(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload)?))
}

fn cmd_max_nx(args: MaxNxArgs) -> Result<(), Error> {
    let scenario = args.scenario.build()?;
    let profile = args.profile.build()?;
    let rule = args.beta.rule(scenario.program)?;
    let beta = rule.value(profile.m);
    let max_nx = max_recoverable_nx(&scenario, &profile, args.ne, rule)?;
    let closed_form = closed_form_max_nx_unitary(&scenario, profile.m, args.ne, beta);
    let payload = serde_json::json!({
        "case": scenario.case_label(),
        "ne": args.ne,
        "beta": beta,
        "max_nx": max_nx,
        "closed_form_unitary": closed_form,
    });
    write_output(&args.out, &format!("{}\n", serde_json::to_string_pretty(&payload)?))
}

fn cmd_figure(args: FigureArgs) -> Result<(), Error> {
    let csv = figures::render(&args.preset)?;
    write_output(&args.out, &csv)
}

fn load_dict_pair(
    a: &Option<String>,
    b: &Option<String>,
) -> Result<(sparsecor::Dictionary, sparsecor::Dictionary), Error> {
    let a = a
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--a dictionary spec is required".into()))?;
    let b = b
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--b dictionary spec is required".into()))?;
    Ok((
        DictSpec::parse(a).map_err(|e| Error::Parse(format!("--a: {e}")))?.build()?,
        DictSpec::parse(b).map_err(|e| Error::Parse(format!("--b: {e}")))?.build()?,
    ))
}

fn cmd_recover(args: RecoverArgs) -> Result<(), Error> {
    let (da, db) = load_dict_pair(&args.a, &args.b)?;

    let inst: Instance = match &args.instance {
        Some(base) => {
            let json = std::fs::read_to_string(base.with_extension("json"))?;
            let csv = std::fs::read_to_string(base.with_extension("csv"))?;
            instance_from_parts(&json, &csv)?
        }
        None => {
            let (xk, ek) = match args.known {
                KnownArg::Both => (true, true),
                KnownArg::X => (true, false),
                KnownArg::E => (false, true),
                KnownArg::None => (false, false),
            };
            let (xr, er) = match args.random {
                RandomArg::X => (true, false),
                RandomArg::E => (false, true),
                RandomArg::Both => (true, true),
                RandomArg::None => (false, false),
            };
            // The generation scenario's program field mirrors the requested
            // recovery program where possible.
            let program = match args.program {
                RecoverProgram::Pinv => Program::Pseudoinverse,
                RecoverProgram::L0Exhaustive => Program::L0,
                _ => Program::L1,
            };
            let scenario = Scenario::new(xk, ek, xr, er, program)?;
            make_instance(&da, &db, &scenario, args.nx, args.ne, args.seed)?
        }
    };

    if let Some(base) = &args.save_instance {
        let (json, csv) = instance_to_parts(&inst)?;
        std::fs::write(base.with_extension("json"), json)?;
        std::fs::write(base.with_extension("csv"), csv)?;
        eprintln!("saved instance to {}.{{json,csv}}", base.display());
    }

    let opts = AdmmOptions::default();
    let outcome = match args.program {
        RecoverProgram::Pinv => {
            if !(inst.scenario.x_known && inst.scenario.e_known) {
                return Err(Error::InvalidArgument(
                    "--program pinv requires both supports known (--known both)".into(),
                ));
            }
            sparsecor::solvers::recover_both_known(
                &da,
                &db,
                inst.z.view(),
                &inst.support_x,
                &inst.support_e,
            )?
        }
        RecoverProgram::BpEs => {
            if !inst.scenario.e_known {
                return Err(Error::InvalidArgument(
                    "--program bp-es needs a known interference support (--known e or both)"
                        .into(),
                ));
            }
            solve_l1(
                &da,
                &db,
                inst.z.view(),
                &SupportMode::EKnown(inst.support_e.clone()),
                &opts,
            )?
        }
        RecoverProgram::BpXs => {
            if !inst.scenario.x_known {
                return Err(Error::InvalidArgument(
                    "--program bp-xs needs a known signal support (--known x or both)".into(),
                ));
            }
            solve_l1(
                &da,
                &db,
                inst.z.view(),
                &SupportMode::XKnown(inst.support_x.clone()),
                &opts,
            )?
        }
        RecoverProgram::BpC => solve_l1(&da, &db, inst.z.view(), &SupportMode::Full, &opts)?,
        RecoverProgram::L0Exhaustive => {
            let max_total = args
                .l0_max
                .unwrap_or(inst.support_x.len() + inst.support_e.len());
            let mode = if inst.scenario.e_known {
                SupportMode::EKnown(inst.support_e.clone())
            } else {
                SupportMode::Full
            };
            solve_l0_exhaustive(&da, &db, inst.z.view(), &mode, max_total)?
        }
    };

    let report = outcome.into_report(&inst.x_true, &inst.e_true, args.success_tol);
    write_output(&args.out, &format!("{}\n", report.to_json(args.vectors)?))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let grid = SweepGrid {
        da_spec: DictSpec::parse(&args.a).map_err(|e| Error::Parse(format!("--a: {e}")))?,
        db_spec: DictSpec::parse(&args.b).map_err(|e| Error::Parse(format!("--b: {e}")))?,
        scenario: args.scenario.build()?,
        nx_values: parse_int_list(&args.nx, "--nx")?,
        ne_values: parse_int_list(&args.ne, "--ne")?,
        trials: args.trials,
        seed_base: args.seed,
        success_tol: args.success_tol,
        beta: args.beta,
    };
    let result = run_sweep(&grid)?;
    write_output(&args.out, &result.to_csv())
}
