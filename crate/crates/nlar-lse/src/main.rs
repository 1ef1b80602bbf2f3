//! Command-line entry point.
//!
//! Exit codes: 0 when the run completed and every configured expectation
//! passed, 1 when an expectation failed, 2 on any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlar_lse::config::{parse_config, ExperimentConfig};
use nlar_lse::runner;

#[derive(Parser)]
#[command(
    name = "nlar-lse",
    about = "Simulation, recursive least-squares estimation, and excitation diagnostics \
             for nonlinear autoregressive models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (JSON; see SCHEMA.md).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the base seed from the config.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Replace the replicate count from the config.
    #[arg(long)]
    replicates: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write them as CSV with metadata sidecars.
    Simulate(CommonArgs),
    /// Simulate and estimate; write checkpointed estimation traces.
    Estimate(CommonArgs),
    /// Run the excitation certification block and write its report.
    Excite(CommonArgs),
    /// Re-ingest a run directory and recompute the diagnostics report.
    Report {
        /// Run directory containing config.json and estimate CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config whose out_dir names the run directory (when --out is absent).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Full pipeline: trajectories, estimation traces, diagnostics report,
    /// and excitation certification when configured.
    Run(CommonArgs),
}

fn load_config(args: &CommonArgs) -> nlar_lse::Result<(ExperimentConfig, PathBuf)> {
    let mut config = parse_config(&args.config)?;
    if let Some(seed) = args.seed_override {
        config.seed = seed;
    }
    if let Some(reps) = args.replicates {
        config.replicates = reps as i64;
        config.validate()?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            nlar_lse::Error::Config("no output directory: pass --out or set out_dir".into())
        })?;
    Ok((config, out))
}

fn print_verdicts(report: &nlar_lse::diagnostics::DiagnosticsReport) {
    for verdict in &report.criteria {
        println!(
            "[{}] {}: {}",
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.name,
            verdict.detail
        );
    }
}

fn cmd_simulate(args: &CommonArgs) -> nlar_lse::Result<bool> {
    let (config, out) = load_config(args)?;
    let model = config.build_model()?;
    let noise = config.build_noise()?;
    runner::write_config(&out, &config)?;
    for r in 0..config.replicates as usize {
        let seed = nlar_lse::rng::replicate_seed(config.seed, r as u64);
        let traj = nlar_lse::sim::simulate(
            &model,
            &noise,
            config.t_max as usize,
            seed,
            config.divergence_threshold,
        )?;
        runner::write_trajectory(&out, r, &traj, config.t_max as usize)?;
    }
    println!(
        "simulated {} replicate(s) of {} into {}",
        config.replicates,
        model.name(),
        out.display()
    );
    Ok(true)
}

fn cmd_estimate(args: &CommonArgs) -> nlar_lse::Result<bool> {
    let (config, out) = load_config(args)?;
    let model = config.build_model()?;
    let noise = config.build_noise()?;
    let checkpoints = config.checkpoint_times();
    runner::write_config(&out, &config)?;
    for r in 0..config.replicates as usize {
        let output = runner::run_replicate(&model, &noise, &config, &checkpoints, r)?;
        runner::write_estimate(&out, &output)?;
    }
    println!(
        "estimated {} replicate(s) into {}",
        config.replicates,
        out.display()
    );
    Ok(true)
}

fn cmd_excite(args: &CommonArgs) -> nlar_lse::Result<bool> {
    let (config, out) = load_config(args)?;
    let report = runner::certify_excitation(&config)?;
    runner::write_config(&out, &config)?;
    runner::write_excitation(&out, &report)?;
    match (report.certified, &report.delta_star) {
        (true, Some(delta)) => println!(
            "[{}] certified delta* = {delta} with direction infimum {}",
            if report.pass { "PASS" } else { "FAIL" },
            report.infimum_value
        ),
        _ => println!(
            "[{}] certification failed: {} (worst direction infimum {})",
            if report.pass { "PASS" } else { "FAIL" },
            report.failure.as_deref().unwrap_or("unknown"),
            report.infimum_value
        ),
    }
    Ok(report.pass)
}

fn cmd_report(out: Option<PathBuf>, config_path: Option<PathBuf>) -> nlar_lse::Result<bool> {
    let dir = match (out, &config_path) {
        (Some(dir), _) => dir,
        (None, Some(path)) => {
            let config = parse_config(path)?;
            PathBuf::from(config.out_dir.ok_or_else(|| {
                nlar_lse::Error::Config("config has no out_dir; pass --out".into())
            })?)
        }
        (None, None) => {
            return Err(nlar_lse::Error::Config(
                "report needs --out or --config".into(),
            ))
        }
    };
    let report = runner::report_from_dir(&dir)?;
    runner::write_report(&dir, &report)?;
    print_verdicts(&report);
    println!(
        "report over {} replicate(s): median final err2 = {:.6e}",
        report.replicate_count, report.median_final_err2
    );
    Ok(report.all_criteria_pass())
}

fn cmd_run(args: &CommonArgs) -> nlar_lse::Result<bool> {
    let (config, out) = load_config(args)?;
    let output = runner::run_experiment(&config)?;
    runner::write_run(&out, &config, &output)?;
    print_verdicts(&output.report);
    if let Some(cert) = &output.excitation {
        println!(
            "[{}] excitation: certified={} delta_star={:?} infimum={}",
            if cert.pass { "PASS" } else { "FAIL" },
            cert.certified,
            cert.delta_star,
            cert.infimum_value
        );
    }
    println!(
        "run complete: {} replicate(s), median final err2 = {:.6e}, artifacts in {}",
        output.report.replicate_count,
        output.report.median_final_err2,
        out.display()
    );
    Ok(output.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Excite(args) => cmd_excite(args),
        Command::Report { out, config } => cmd_report(out.clone(), config.clone()),
        Command::Run(args) => cmd_run(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
