use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use potmask_core::pipeline::{eval_csv, evaluate_dirs, parse_config, run_batch};
use potmask_core::transport::{lp_oracle, sinkhorn, softmax, Marginals, SinkhornParams, EXACT_SIZE_LIMIT};

const OK: u8 = 0;
const ENTRY_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;

/// Unsupervised saliency masks from backbone features via prototype
/// optimal transport.
#[derive(Parser)]
#[command(name = "potmask", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Process every image listed in a manifest.
    Run(RunArgs),
    /// Score predicted maps against ground-truth masks.
    Eval(EvalArgs),
    /// Compare the entropic solver against the exact LP on random instances.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Lines of `features weights out_prefix [ground_truth]`.
    #[arg(long)]
    manifest: PathBuf,
    /// `key=value` settings file; a missing file means defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Entropic regularization strength.
    #[arg(long)]
    eps: Option<String>,
    /// CSV report path; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred_dir: PathBuf,
    #[arg(long)]
    gt_dir: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Rows per instance.
    #[arg(long)]
    n: usize,
    /// Columns per instance.
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.005)]
    eps: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest accepted relative objective gap.
    #[arg(long, default_value_t = 5e-3)]
    max_gap: f64,
}

fn emit(report: Option<&Path>, text: &str) -> Result<(), u8> {
    match report {
        Some(path) => fs::write(path, text).map_err(|e| {
            error!("cannot write {}: {e}", path.display());
            CONFIG_ERROR
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: &RunArgs) -> Result<u8, u8> {
    let overrides: Vec<(String, String)> = [
        ("tau", &args.tau),
        ("k", &args.k),
        ("rounds", &args.rounds),
        ("seed", &args.seed),
        ("eps", &args.eps),
    ]
    .into_iter()
    .filter_map(|(key, value)| value.as_ref().map(|v| (key.to_string(), v.clone())))
    .collect();
    let cfg = parse_config(args.config.as_deref(), &overrides).map_err(|e| {
        error!("{e}");
        CONFIG_ERROR
    })?;
    let report = run_batch(&args.manifest, &cfg).map_err(|e| {
        error!("{e}");
        CONFIG_ERROR
    })?;
    let csv = report.to_csv().map_err(|e| {
        error!("{e}");
        CONFIG_ERROR
    })?;
    emit(args.report.as_deref(), &csv)?;
    let failed = report.failures();
    if failed > 0 {
        error!("{failed} of {} entries failed", report.rows.len());
        return Ok(ENTRY_FAILED);
    }
    Ok(OK)
}

fn eval(args: &EvalArgs) -> Result<u8, u8> {
    let rows = evaluate_dirs(&args.pred_dir, &args.gt_dir).map_err(|e| {
        error!("{e}");
        CONFIG_ERROR
    })?;
    for row in &rows {
        eprintln!("{row}");
    }
    emit(args.report.as_deref(), &eval_csv(&rows))?;
    Ok(if rows.iter().any(|r| r.scores.is_err()) { ENTRY_FAILED } else { OK })
}

fn oracle(args: &OracleArgs) -> Result<u8, u8> {
    if args.n == 0 || args.p == 0 || args.n * args.p > EXACT_SIZE_LIMIT {
        error!("need 1 <= n * p <= {EXACT_SIZE_LIMIT}, got {} x {}", args.n, args.p);
        return Err(CONFIG_ERROR);
    }
    let params = SinkhornParams {
        epsilon: args.eps,
        max_iter: args.max_iter,
        ..SinkhornParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (mut worst_gap, mut worst_res, mut max_iters, mut bad) = (0.0f64, 0.0f64, 0, 0);
    for t in 0..args.trials {
        let s: Vec<f64> = (0..args.n * args.p).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let logits: Vec<f64> = (0..args.p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let solved = Marginals::uniform_rows(args.n, softmax(&logits, 1.0)).and_then(|m| {
            let exact = lp_oracle(&s, &m)?;
            let plan = sinkhorn(&s, &m, &params)?;
            Ok((exact, plan))
        });
        let (exact, plan) = solved.map_err(|e| {
            error!("trial {t}: {e}");
            CONFIG_ERROR
        })?;
        let gap = (plan.objective - exact.objective).abs() / exact.objective.abs().max(f64::MIN_POSITIVE);
        let res = plan.row_residual.max(plan.col_residual);
        if gap > args.max_gap || !plan.converged {
            bad += 1;
            eprintln!(
                "trial {t}: gap {gap:.3e}, residual {res:.3e}, {} iterations",
                plan.iterations
            );
        }
        worst_gap = worst_gap.max(gap);
        worst_res = worst_res.max(res);
        max_iters = max_iters.max(plan.iterations);
    }
    println!(
        "trials={} n={} p={} eps={} worst_gap={worst_gap:.3e} worst_residual={worst_res:.3e} max_iterations={max_iters} failed={bad}",
        args.trials, args.n, args.p, args.eps
    );
    Ok(if bad > 0 { ENTRY_FAILED } else { OK })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { CONFIG_ERROR } else { OK };
            return ExitCode::from(code);
        }
    };
    let code = match &cli.command {
        Command::Run(args) => run(args),
        Command::Eval(args) => eval(args),
        Command::Oracle(args) => oracle(args),
    };
    ExitCode::from(code.unwrap_or_else(|c| c))
}
