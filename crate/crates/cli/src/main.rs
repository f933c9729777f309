//! `disom`: single runs, preset sweeps, formula verification and plotting.
//!
//! Exit codes: 0 success, 1 runtime or check failure, 2 usage or config error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use disom::analysis::{gamblers_ruin_checks_for, verification_report, Check};
use disom::formula::ParamExpr;
use disom::harness::{figure1_sweep, figure2_sweep, SweepOptions, DEFAULT_N_LIST, DEFAULT_REPLICATIONS};
use disom::plot::{render_svg, summary_chart, trials_chart};
use disom::report::{
    figure1_summary, figure2_summary, read_summary_csv, read_trials_csv, summary_csv, trial_rows, trials_csv,
    SummaryKind, TRIAL_HEADER,
};
use disom::run_experiment;

use config::{usage, Algo, RunSettings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Parser)]
#[command(name = "disom", version, about = "Runtime lab for (1,λ)/(1+λ) EAs on distorted OneMax")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its per-trial CSV.
    Run(RunArgs),
    /// SA-(1,λ)-EA normalized runtime over a p-grid per n.
    Figure1(SweepArgs),
    /// Static comma, static plus and SA-(1,λ)-EA compared over n.
    Figure2(SweepArgs),
    /// Check the analysis formulas against their oracles.
    Verify(VerifyArgs),
    /// Render a trial or summary CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    /// Static λ; also feeds `(e/(e-1))^-lambda`.
    #[arg(long)]
    lambda: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<ParamExpr>,
    #[arg(long)]
    d: Option<ParamExpr>,
    #[arg(long = "k-star")]
    k_star: Option<ParamExpr>,
    #[arg(long = "F")]
    factor: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long = "lambda-max")]
    lambda_max: Option<ParamExpr>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    id: Option<String>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_N_LIST)]
    n: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    reps: u64,
    /// Evaluation budget per trial (preset if omitted).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Per-trial CSV output.
    #[arg(long)]
    trials: Option<PathBuf>,
    /// Summary CSV output (stdout if omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// SVG chart output.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to the gambler's-ruin checks for this down-step probability.
    #[arg(long)]
    q: Option<f64>,
    /// Band count for `--q` (default 10).
    #[arg(long)]
    beta: Option<u32>,
    /// Monte Carlo generations per clone check.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let base = match &args.config {
        Some(path) => RunSettings::from_file(path)?,
        None => RunSettings::default(),
    };
    let flags = RunSettings {
        experiment_id: args.id,
        algorithm: args.algo,
        lambda: args.lambda,
        n: args.n,
        p: args.p,
        d: args.d,
        k_star: args.k_star,
        factor: args.factor,
        s: args.s,
        lambda_max: args.lambda_max,
        budget: args.budget,
        replications: args.reps,
        base_seed: args.seed,
        parallelism: args.threads,
    };
    let config = base.overlay(flags).resolve()?;
    let records = run_experiment(&config).map_err(runtime)?;
    let rows = trial_rows([(&config, records.as_slice())]);
    write_output(args.out.as_deref(), &trials_csv(&rows))
}

fn sweep_options(args: &SweepArgs) -> Result<SweepOptions, CliError> {
    if args.n.is_empty() {
        return Err(CliError::Usage("invalid n: list is empty".into()));
    }
    if args.reps < 1 {
        return Err(CliError::Usage("invalid reps: must be >= 1".into()));
    }
    if args.threads < 1 {
        return Err(CliError::Usage("invalid threads: must be >= 1".into()));
    }
    if args.budget == Some(0) {
        return Err(CliError::Usage("invalid budget: must be >= 1".into()));
    }
    Ok(SweepOptions {
        replications: args.reps,
        budget: args.budget,
        base_seed: args.seed,
        parallelism: args.threads,
    })
}

fn finish_sweep(args: &SweepArgs, trials: String, kind: SummaryKind, lines: &[disom::report::SummaryLine]) -> Result<(), CliError> {
    if let Some(path) = &args.trials {
        write_output(Some(path), &trials)?;
    }
    if let Some(path) = &args.plot {
        write_output(Some(path), &render_svg(&summary_chart(kind, lines)))?;
    }
    write_output(args.summary.as_deref(), &summary_csv(kind, lines))
}

fn cmd_figure1(args: SweepArgs) -> Result<(), CliError> {
    let opts = sweep_options(&args)?;
    for &n in &args.n {
        disom::harness::default_p_grid(n).map_err(usage)?;
    }
    let rows = figure1_sweep(&args.n, None, &opts).map_err(runtime)?;
    let trials = trials_csv(&trial_rows(rows.iter().map(|r| (&r.config, r.records.as_slice()))));
    finish_sweep(&args, trials, SummaryKind::PSweep, &figure1_summary(&rows))
}

fn cmd_figure2(args: SweepArgs) -> Result<(), CliError> {
    let opts = sweep_options(&args)?;
    for &n in &args.n {
        disom::figure2_params(n).map_err(usage)?;
    }
    let table = figure2_sweep(&args.n, &opts).map_err(runtime)?;
    let trials = trials_csv(&trial_rows(table.rows.iter().map(|r| (&r.config, r.records.as_slice()))));
    finish_sweep(&args, trials, SummaryKind::AlgorithmComparison, &figure2_summary(&table))
}

fn print_check(c: &Check) {
    println!(
        "{} {}: formula={:.12e} oracle={:.12e} margin={:.3e}",
        if c.passed { "PASS" } else { "FAIL" },
        c.name,
        c.formula,
        c.oracle,
        c.margin
    );
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let checks = match (args.q, args.beta) {
        (None, None) => {
            if args.trials < 1 {
                return Err(CliError::Usage("invalid trials: must be >= 1".into()));
            }
            verification_report(args.trials, args.seed)
        }
        (q, beta) => {
            let beta = beta.unwrap_or(10);
            let qs = q.map(|q| vec![q]).unwrap_or_else(|| disom::analysis::RUIN_Q_GRID.to_vec());
            let mut out = Vec::new();
            for q in qs {
                out.extend(gamblers_ruin_checks_for(q, beta).map_err(usage)?);
            }
            out
        }
    };
    checks.iter().for_each(print_check);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    println!("{} of {} checks passed", checks.len() - failed.len(), checks.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("failed checks: {}", failed.join("; "))))
    }
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.input.display())))?;
    let chart = if text.lines().next() == Some(TRIAL_HEADER) {
        trials_chart(&read_trials_csv(&text).map_err(runtime)?)
    } else {
        let (kind, lines) = read_summary_csv(&text).map_err(runtime)?;
        summary_chart(kind, &lines)
    };
    write_output(Some(&args.out), &render_svg(&chart))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Figure1(a) => cmd_figure1(a),
        Command::Figure2(a) => cmd_figure2(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
