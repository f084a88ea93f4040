use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phunmix::{relative_error, solve, Instance, SolveOptions, SolverKind};
use phunmix_bench::{
    run_separation, run_sweep, summarize, write_csv, BenchError, Result, SeparationRun, SourceSet, SweepConfig,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "phunmix", version, about = "Phase unmixing benchmarks and separation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over (M, K, SNR) cells described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV report path; defaults to the config's `output` key.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-group summaries as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall-clock times (makes the report non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Separate a random gain/delay mixture given the true source magnitudes.
    Separate {
        /// Comma-separated mono WAV files, one per source.
        #[arg(long, value_delimiter = ',', conflicts_with = "synthetic", required_unless_present = "synthetic")]
        sources: Vec<PathBuf>,
        /// Use this many synthetic modulated-noise sources instead of files.
        #[arg(long)]
        synthetic: Option<usize>,
        /// Length of synthetic sources in samples.
        #[arg(long, default_value_t = 16_000)]
        length: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "nmwf,phunlift,phunlift+,rand")]
        solvers: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run one solver on one JSON instance and print the result as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Noise level for Wiener filters; defaults to the instance's own.
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn parse_solvers(names: &[String]) -> Result<Vec<SolverKind>> {
    names
        .iter()
        .map(|n| n.parse().map_err(|e: phunmix::PhunError| BenchError::Config(e.to_string())))
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| BenchError::io(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.flush().map_err(|e| BenchError::io(path, e))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Sweep {
            config,
            out,
            json,
            threads,
            timing,
        } => {
            let mut cfg = SweepConfig::load(&config)?;
            cfg.threads = threads.or(cfg.threads);
            cfg.timing |= timing;
            let out = out
                .or_else(|| cfg.output_path.clone())
                .ok_or_else(|| BenchError::Config("no output path: pass --out or set `output`".into()))?;
            let rows = run_sweep(&cfg)?;
            let mut w = create(&out)?;
            write_csv(&rows, &mut w)?;
            w.flush().map_err(|e| BenchError::io(&out, e))?;
            if let Some(path) = json {
                write_json(&path, &json!({ "master_seed": cfg.master_seed, "summary": summarize(&rows)? }))?;
            }
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Separate {
            sources,
            synthetic,
            length,
            m,
            solvers,
            seed,
            out,
            json,
        } => {
            let set = match synthetic {
                Some(k) => SourceSet::Synthetic {
                    k,
                    len: length,
                    sample_rate: 16_000,
                },
                None => SourceSet::Files(sources),
            };
            let run = SeparationRun::new(set, m, parse_solvers(&solvers)?, seed);
            let report = run_separation(&run)?;
            let mut w = create(&out)?;
            report.write_csv(&mut w)?;
            w.flush().map_err(|e| BenchError::io(&out, e))?;
            if let Some(path) = json {
                write_json(&path, &serde_json::to_value(&report)?)?;
            }
            for s in &report.scores {
                eprintln!("{:>10}  mean SDR {:7.2} dB", s.solver, s.mean_sdr_db);
            }
            Ok(())
        }
        Command::Solve {
            instance,
            solver,
            seed,
            sigma,
        } => {
            let text = std::fs::read_to_string(&instance).map_err(|e| BenchError::io(&instance, e))?;
            let inst = Instance::from_json(&text).map_err(|e| BenchError::Config(e.to_string()))?;
            let kind = parse_solvers(&[solver])?[0];
            let opts = SolveOptions {
                sigma_n: sigma,
                ..SolveOptions::default()
            };
            let r = solve(kind, &inst, &opts, seed)?;
            let rel = inst.ground_truth().map(|t| relative_error(&r.estimate, t)).transpose()?;
            let value = json!({
                "solver": kind.to_string(),
                "estimate": r.estimate.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "residual": r.residual,
                "relative_error": rel,
                "iterations": r.iterations,
                "converged": r.converged,
                "sdp_objective": r.sdp_objective,
                "lower_bound": r.lower_bound,
                "degenerate": r.degenerate,
            });
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(())
        }
    }
}
