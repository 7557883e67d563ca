//! The `chasebag` command line.
//!
//! ```text
//! chasebag chase     -i program.idb [--max-level N] [--strategy restricted|oblivious] [--trace]
//! chasebag answer    -i program.idb -q query.uq [--mode chase|rewrite|both] [--scope per-disjunct|whole-query]
//!                    [--format table|csv|json] [--verify]
//! chasebag rewrite   -i program.idb -q query.uq
//! chasebag aggregate -i program.idb -q query.uq --fn count|count_distinct|sum|avg [--arg K]
//! ```
//!
//! Exit codes: 0 success, 1 usage, input or parse error, 2 semantic error,
//! 3 when `--verify` finds divergences. Errors are reported on one line
//! starting with `error[<code>]:`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregate::{aggregate, render_aggregate, AggregateError, AggregateFn, AggregateSpec};
use crate::chase::{run_chase, ChaseConfig, ChaseError, MaxLevel, Strategy, DEFAULT_MAX_LEVEL};
use crate::eval::{evaluate_over_chase, EvalError, EvalMode};
use crate::model::{AnswerBag, Ucq};
use crate::oracle::{brute_force_over_chase, diff_bags, Divergence, OracleError};
use crate::rewrite::{evaluate_rewriting, perfect_rewrite, RewriteResult};
use crate::textio::{
    parse_program, parse_query, render_bag, render_facts, render_query, BagFormat, Program,
};

pub const MAX_LEVEL_ENV: &str = "CHASEBAG_MAX_LEVEL";

#[derive(Parser, Debug)]
#[command(
    name = "chasebag",
    version,
    about = "Bag-set certain answers over incomplete databases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the chase and print the resulting instance.
    Chase(ChaseArgs),
    /// Compute certain answers of a query.
    Answer(AnswerArgs),
    /// Print the rewriting of a query.
    Rewrite(RewriteArgs),
    /// Aggregate over certain answers.
    Aggregate(AggregateArgs),
}

#[derive(Args, Debug)]
pub struct ChaseOpts {
    /// Level cap (default: $CHASEBAG_MAX_LEVEL, then 10000).
    #[arg(long)]
    pub max_level: Option<u64>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Restricted)]
    pub strategy: StrategyArg,
}

#[derive(Args, Debug)]
pub struct ChaseArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub chase: ChaseOpts,
    /// Print one line per firing before the facts.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnswerArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub query: PathBuf,
    #[command(flatten)]
    pub chase: ChaseOpts,
    #[arg(long, value_enum, default_value_t = ModeArg::Chase)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ScopeArg::PerDisjunct)]
    pub scope: ScopeArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
    /// Compare against the brute-force oracle.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RewriteArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub query: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AggregateArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub query: PathBuf,
    #[arg(long = "fn", value_enum)]
    pub func: FnArg,
    /// 1-based answer column, required by sum and avg.
    #[arg(long)]
    pub arg: Option<usize>,
    #[command(flatten)]
    pub chase: ChaseOpts,
    #[arg(long, value_enum, default_value_t = ModeArg::Chase)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ScopeArg::PerDisjunct)]
    pub scope: ScopeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Restricted,
    Oblivious,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Chase,
    Rewrite,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    PerDisjunct,
    WholeQuery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FnArg {
    Count,
    #[value(name = "count_distinct")]
    CountDistinct,
    Sum,
    Avg,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Restricted => Strategy::Restricted,
            StrategyArg::Oblivious => Strategy::Oblivious,
        }
    }
}

impl From<ScopeArg> for EvalMode {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::PerDisjunct => EvalMode::PerDisjunct,
            ScopeArg::WholeQuery => EvalMode::WholeQuery,
        }
    }
}

impl From<FormatArg> for BagFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => BagFormat::Table,
            FormatArg::Csv => BagFormat::Csv,
            FormatArg::Json => BagFormat::Json,
        }
    }
}

impl From<FnArg> for AggregateFn {
    fn from(f: FnArg) -> Self {
        match f {
            FnArg::Count => AggregateFn::Count,
            FnArg::CountDistinct => AggregateFn::CountDistinct,
            FnArg::Sum => AggregateFn::Sum,
            FnArg::Avg => AggregateFn::Avg,
        }
    }
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Io(String),
    Parse(String),
    Semantic(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Semantic(_) => "semantic",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantic(_) => 2,
            _ => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Parse(m) | CliError::Semantic(m) => m,
        }
    }

    /// `error[<code>]: <message>` on a single line.
    pub fn render(&self) -> String {
        let one_line = self.message().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.code(), one_line.trim_end())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Chase(c) => c.into(),
            other => CliError::Semantic(other.to_string()),
        }
    }
}

impl From<ChaseError> for CliError {
    fn from(e: ChaseError) -> Self {
        match e {
            ChaseError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Semantic(other.to_string()),
        }
    }
}

impl From<AggregateError> for CliError {
    fn from(e: AggregateError) -> Self {
        match e {
            AggregateError::MissingArgument(_) | AggregateError::BadPosition { .. } => {
                CliError::Usage(e.to_string())
            }
            AggregateError::Eval(inner) => inner.into(),
            other => CliError::Semantic(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    parse_program(&read(path)?).map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))
}

fn load_query(path: &Path, program: &Program) -> Result<Ucq, CliError> {
    parse_query(&read(path)?, &program.schema)
        .map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))
}

/// Cap from the flag, then the environment, then the default.
fn max_level(flag: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    match (flag, env) {
        (Some(n), _) => Ok(n),
        (None, Some(s)) => s.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{MAX_LEVEL_ENV} must be a nonnegative integer, got `{s}`"
            ))
        }),
        (None, None) => Ok(DEFAULT_MAX_LEVEL),
    }
}

fn chase_config(opts: &ChaseOpts, env: Option<&str>) -> Result<ChaseConfig, CliError> {
    let config = ChaseConfig {
        max_level: MaxLevel::Bounded(max_level(opts.max_level, env)?),
        ..ChaseConfig::default()
    }
    .with_strategy(opts.strategy.into());
    config.validate()?;
    Ok(config)
}

/// Output of a successful run; `diverged` selects exit code 3.
struct Report {
    text: String,
    diverged: bool,
}

fn divergence_lines(out: &mut String, divs: &[Divergence]) {
    if divs.is_empty() {
        out.push_str("none\n");
    }
    for d in divs {
        let _ = writeln!(out, "{d}");
    }
}

fn tgd_divergence_note(
    rw: &RewriteResult,
    program: &Program,
    divs: &[Divergence],
) -> Vec<Divergence> {
    // annotate with whether a TGD-derived disjunct produced the tuple
    let inst = &program.instance;
    divs.iter()
        .map(|d| {
            let involved = rw
                .query
                .disjuncts()
                .iter()
                .enumerate()
                .any(|(k, disjunct)| {
                    rw.tgd_derived[k]
                        && crate::eval::satisfying_groundings(disjunct, inst)
                            .iter()
                            .any(|g| g.project(rw.query.head()).as_deref() == Some(&d.tuple[..]))
                });
            let mut d = d.clone();
            if involved {
                d.context.push_str(" [tgd-derived]");
            }
            d
        })
        .collect()
}

fn cmd_chase(args: &ChaseArgs, env: Option<&str>) -> Result<Report, CliError> {
    let config = ChaseConfig {
        trace: args.trace,
        ..chase_config(&args.chase, env)?
    };
    let program = load_program(&args.input)?;
    let result = run_chase(&program, &config)?;
    let mut text = String::new();
    if args.trace {
        text.push_str(&result.render_trace());
    }
    text.push_str(&render_facts(&result.instance));
    let _ = writeln!(
        text,
        "levels={} terminated={} facts={}",
        result.levels_run,
        result.terminated,
        result.instance.len()
    );
    Ok(Report {
        text,
        diverged: false,
    })
}

fn check_mode_flags(mode: ModeArg, opts: &ChaseOpts) -> Result<(), CliError> {
    if mode == ModeArg::Rewrite && opts.max_level.is_some() {
        return Err(CliError::Usage(
            "--max-level has no effect with --mode rewrite".into(),
        ));
    }
    if mode == ModeArg::Rewrite && opts.strategy != StrategyArg::Restricted {
        return Err(CliError::Usage(
            "--strategy has no effect with --mode rewrite".into(),
        ));
    }
    Ok(())
}

fn cmd_answer(args: &AnswerArgs, env: Option<&str>) -> Result<Report, CliError> {
    check_mode_flags(args.mode, &args.chase)?;
    let config = chase_config(&args.chase, env)?;
    let program = load_program(&args.input)?;
    let q = load_query(&args.query, &program)?;
    let mode: EvalMode = args.scope.into();
    let format: BagFormat = args.format.into();

    let chase = if args.mode != ModeArg::Rewrite || args.verify {
        Some(run_chase(&program, &config)?)
    } else {
        None
    };
    let chase_bag = match (&chase, args.mode) {
        (Some(c), ModeArg::Chase | ModeArg::Both) => {
            Some(evaluate_over_chase(&q, &program, c, mode)?)
        }
        _ => None,
    };
    let rewriting =
        (args.mode != ModeArg::Chase).then(|| perfect_rewrite(&q, &program.dependencies));
    let rewrite_bag = match &rewriting {
        Some(rw) => Some(evaluate_rewriting(&q, rw, &program, mode)?),
        None => None,
    };

    let mut text = String::new();
    match args.mode {
        ModeArg::Chase => {
            text.push_str(&render_bag(chase_bag.as_ref().expect("chase mode"), format))
        }
        ModeArg::Rewrite => text.push_str(&render_bag(
            rewrite_bag.as_ref().expect("rewrite mode"),
            format,
        )),
        ModeArg::Both => {
            let (c, r) = (
                chase_bag.as_ref().expect("both"),
                rewrite_bag.as_ref().expect("both"),
            );
            text.push_str("## chase\n");
            text.push_str(&render_bag(c, format));
            text.push_str("## rewrite\n");
            text.push_str(&render_bag(r, format));
            text.push_str("## divergences\n");
            let divs = diff_bags(c, r, "chase vs rewrite")?;
            let divs = tgd_divergence_note(rewriting.as_ref().expect("both"), &program, &divs);
            divergence_lines(&mut text, &divs);
        }
    }

    let mut diverged = false;
    if args.verify {
        let oracle = brute_force_over_chase(
            &q,
            &program,
            chase.as_ref().expect("verify runs the chase"),
            mode,
        )?;
        let mut divs = Vec::new();
        if let Some(c) = &chase_bag {
            divs.extend(diff_bags(&oracle, c, "oracle vs chase")?);
        }
        if let Some(r) = &rewrite_bag {
            if program.dependencies.iter().any(|d| d.is_tgd()) {
                if !oracle.same_keys(r) {
                    let mut keys_only = AnswerBag::new(r.arity(), r.exactness());
                    for t in r.keys() {
                        keys_only.add(t.clone(), oracle.multiplicity(t).max(1u8.into()))?;
                    }
                    divs.extend(diff_bags(&oracle, &keys_only, "oracle vs rewrite keys")?);
                }
            } else {
                divs.extend(diff_bags(&oracle, r, "oracle vs rewrite")?);
            }
        }
        text.push_str("## verify\n");
        divergence_lines(&mut text, &divs);
        diverged = !divs.is_empty();
    }
    Ok(Report { text, diverged })
}

impl From<crate::model::ModelError> for CliError {
    fn from(e: crate::model::ModelError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

fn cmd_rewrite(args: &RewriteArgs) -> Result<Report, CliError> {
    let program = load_program(&args.input)?;
    let q = load_query(&args.query, &program)?;
    let rw = perfect_rewrite(&q, &program.dependencies);
    let mut text = format!(
        "# disjuncts={} iterations={} generated={}\n",
        rw.query.disjuncts().len(),
        rw.iterations,
        rw.disjuncts_generated
    );
    text.push_str(&render_query(&rw.query));
    Ok(Report {
        text,
        diverged: false,
    })
}

fn cmd_aggregate(args: &AggregateArgs, env: Option<&str>) -> Result<Report, CliError> {
    if args.mode == ModeArg::Both {
        return Err(CliError::Usage(
            "aggregate takes --mode chase or --mode rewrite".into(),
        ));
    }
    check_mode_flags(args.mode, &args.chase)?;
    let config = chase_config(&args.chase, env)?;
    let spec = AggregateSpec {
        func: args.func.into(),
        arg_position: args.arg,
    };
    let program = load_program(&args.input)?;
    let q = load_query(&args.query, &program)?;
    spec.validate(q.arity())?;
    let mode: EvalMode = args.scope.into();
    let bag = match args.mode {
        ModeArg::Rewrite => evaluate_rewriting(
            &q,
            &perfect_rewrite(&q, &program.dependencies),
            &program,
            mode,
        )?,
        _ => evaluate_over_chase(&q, &program, &run_chase(&program, &config)?, mode)?,
    };
    let value = aggregate(&bag, &spec)?;
    Ok(Report {
        text: format!("{}\n", render_aggregate(spec.func, &value)),
        diverged: false,
    })
}

fn execute<'a>(cli: &'a Cli, env: Option<&str>) -> Result<(Report, Option<&'a Path>), CliError> {
    Ok(match &cli.command {
        Command::Chase(a) => (cmd_chase(a, env)?, a.out.as_deref()),
        Command::Answer(a) => (cmd_answer(a, env)?, a.out.as_deref()),
        Command::Rewrite(a) => (cmd_rewrite(a)?, a.out.as_deref()),
        Command::Aggregate(a) => (cmd_aggregate(a, env)?, a.out.as_deref()),
    })
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code. `max_level_env` stands in for `$CHASEBAG_MAX_LEVEL`.
pub fn run_with_env<I, S>(
    args: I,
    max_level_env: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "{}", CliError::Usage(first.to_string()).render());
            return 1;
        }
    };
    let outcome = execute(&cli, max_level_env).and_then(|(report, out)| {
        match out {
            Some(path) => std::fs::write(path, &report.text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => stdout
                .write_all(report.text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?,
        }
        Ok(report.diverged)
    });
    match outcome {
        Ok(false) => 0,
        Ok(true) => {
            let _ = writeln!(stderr, "error[divergence]: verification found divergences");
            3
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.render());
            e.exit_code()
        }
    }
}

/// [`run_with_env`] reading the cap default from the process environment.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(MAX_LEVEL_ENV).ok();
    run_with_env(args, env.as_deref(), stdout, stderr)
}
