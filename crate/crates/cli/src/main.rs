use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use marsrm::bench::{
    build_asset_instance, compare_modes, error_bound_table, format_comparison, load_config,
    oracle_mode, solve_mode, write_artifacts, AssetInstanceConfig, Mode, RunSettings, RunSnapshot,
};
use marsrm::sddp::{Sampling, TrainOptions};
use marsrm::Execution;

/// Risk-averse multistage asset allocation solved by SDDP.
#[derive(Parser)]
#[command(name = "marsrm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and write the bounds table, the bound series and a config snapshot.
    Solve(SolveArgs),
    /// Print the extensive-form value.
    Oracle(InstanceArgs),
    /// Train several modes on one lattice and print a comparison table.
    Compare(CompareArgs),
    /// Print the spectrum-projection error bound next to the measured error.
    Bound(BoundArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON or a run snapshot written by `solve`.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in benchmark instance with this horizon (2, 3, 5 or 10).
    #[arg(long)]
    preset: Option<usize>,
    #[arg(long, default_value = "marsrm")]
    mode: Mode,
    /// Overrides the lattice and sampling seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    iters: Option<usize>,
    /// Forward paths per iteration.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Visit every path of the scenario tree each iteration.
    #[arg(long)]
    enumerate: bool,
    /// Solve scenario subproblems on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// Comma-separated modes; all five by default.
    #[arg(long, value_delimiter = ',')]
    modes: Vec<Mode>,
    /// Also write the table as CSV into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Grid sizes to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
    cells: Vec<usize>,
}

fn load(args: &InstanceArgs) -> Result<(AssetInstanceConfig, Option<RunSettings>)> {
    let (mut cfg, run) = match (&args.config, args.preset) {
        (Some(path), _) => {
            load_config(path).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(t)) => (AssetInstanceConfig::reference(t, 0)?, None),
        (None, None) => bail!("give --config PATH or --preset T"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok((cfg, run))
}

fn options(base: Option<TrainOptions>, args: &TrainArgs, seed: Option<u64>) -> TrainOptions {
    let mut opts = base.unwrap_or_default();
    if let Some(v) = args.iters {
        opts.max_iters = v;
    }
    if let Some(v) = args.paths {
        opts.paths = v;
    }
    if let Some(v) = args.tol {
        opts.tol = v;
    }
    if let Some(v) = seed {
        opts.seed = v;
    }
    if args.enumerate {
        opts.sampling = Sampling::Enumerate;
    }
    if args.sequential {
        opts.execution = Execution::Sequential;
    }
    opts
}

fn solve(args: SolveArgs) -> Result<()> {
    let (cfg, run) = load(&args.instance)?;
    let train = options(run.map(|r| r.train), &args.train, args.instance.seed);
    let inst = build_asset_instance(&cfg)?;
    let mode = args.instance.mode;
    let report =
        solve_mode(&inst, &cfg, mode, &train).with_context(|| format!("training {mode}"))?;
    print!("{}", report.to_csv_string());
    let snapshot = RunSnapshot {
        instance: cfg,
        run: RunSettings { mode, train },
    };
    let art = write_artifacts(&args.out, &snapshot, &report)?;
    log::info!(
        "wrote {}, {} and {}",
        art.csv.display(),
        art.series.display(),
        art.config.display()
    );
    if !report.converged {
        eprintln!(
            "stopped after {} iterations with gap {:.3e}",
            report.rows.len(),
            report.gap()
        );
    }
    Ok(())
}

fn oracle(args: InstanceArgs) -> Result<()> {
    let (cfg, _) = load(&args)?;
    let inst = build_asset_instance(&cfg)?;
    let v = oracle_mode(&inst, &cfg, args.mode).context("extensive form")?;
    println!("{v:.10}");
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let (cfg, run) = load(&args.instance)?;
    let train = options(run.map(|r| r.train), &args.train, args.instance.seed);
    let modes = if args.modes.is_empty() {
        Mode::ALL.to_vec()
    } else {
        args.modes
    };
    let rows = compare_modes(&cfg, &modes, &train)?;
    print!("{}", format_comparison(&rows));
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir)?;
        let mut text = String::from("mode,lower,upper,gap,iterations,converged,time_s\n");
        for r in &rows {
            text += &format!(
                "{},{},{},{},{},{},{:.1}\n",
                r.mode, r.lower, r.upper, r.gap, r.iterations, r.converged, r.time_s
            );
        }
        std::fs::write(dir.join("compare.csv"), text)?;
    }
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    let (cfg, _) = load(&args.instance)?;
    let rows = error_bound_table(&cfg, args.instance.mode, &args.cells)?;
    println!("{:>6} {:>14} {:>14}", "cells", "bound", "measured");
    for r in rows {
        let measured = r.measured.map_or("-".to_string(), |m| format!("{m:.6e}"));
        println!("{:>6} {:>14.6e} {:>14}", r.cells, r.bound, measured);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::Compare(a) => compare(a),
        Command::Bound(a) => bound(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
