//! `subwave` command line: run the displacement pipeline from a config file.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use subwave_cli::config::{Mode, PipelineConfig};
use subwave_cli::pipeline::{emit_outputs, run_pipeline, FailureKind};
use subwave_cli::report::fmt_meters;

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "subwave",
    about = "Sub-wavelength displacement estimation from two-antenna channel traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (key = value lines with a [simulate] section).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for displacement.csv, metrics.txt, windows.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the mode key: simulate or ingest.
    #[arg(long)]
    mode: Option<String>,
    /// Override the trace CSV path (ingest mode).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override the seed key.
    #[arg(long)]
    seed: Option<u64>,
    /// Use antenna 1 as the ratio denominator instead of antenna 2.
    #[arg(long)]
    swap_antennas: bool,
    /// Override any config key, e.g. --set snr_db=30 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(args: &RunArgs) -> Result<u8, (u8, String)> {
    let mut cfg =
        PipelineConfig::load(&args.config).map_err(|e| (EXIT_INPUT, format!("config: {e}")))?;
    if let Some(mode) = &args.mode {
        cfg.set("mode", mode)
            .map_err(|e| (EXIT_INPUT, format!("--mode: {e}")))?;
    }
    if let Some(trace) = &args.trace {
        cfg.trace = Some(trace.clone());
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.swap_antennas {
        cfg.denominator_antenna = 1;
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| (EXIT_INPUT, format!("--set `{kv}` is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())
            .map_err(|e| (EXIT_INPUT, format!("--set {k}: {e}")))?;
    }

    let report = run_pipeline(&cfg);

    if let Some(out_dir) = &args.out {
        let paths = emit_outputs(&report, out_dir)
            .map_err(|e| (EXIT_IO, format!("writing outputs: {e}")))?;
        println!("wrote {}", paths.metrics.display());
        if let Some(p) = &paths.displacement {
            println!("wrote {}", p.display());
        }
        if let Some(p) = &paths.windows {
            println!("wrote {}", p.display());
        }
        if let Some(p) = &paths.trace {
            println!("wrote {}", p.display());
        }
    }

    match cfg.mode {
        Mode::Simulate => println!("mode: simulate, seed {}", report.seed),
        Mode::Ingest => println!("mode: ingest"),
    }
    println!("samples: {}", report.n_samples);
    if let Some(b) = &report.baseline {
        println!(
            "baseline final displacement: {} m",
            fmt_meters(b.final_value())
        );
    }
    if let Some(c) = &report.corrected {
        println!(
            "corrected final displacement: {} m",
            fmt_meters(c.final_value())
        );
    }
    if let Some(m) = &report.baseline_metrics {
        println!(
            "baseline error vs truth: max {} m, median {} m, p90 {} m",
            fmt_meters(m.max_abs_m),
            fmt_meters(m.median_abs_m),
            fmt_meters(m.p90_abs_m)
        );
    }
    if let Some(m) = &report.corrected_metrics {
        println!(
            "corrected error vs truth: max {} m, median {} m, p90 {} m",
            fmt_meters(m.max_abs_m),
            fmt_meters(m.median_abs_m),
            fmt_meters(m.p90_abs_m)
        );
    }

    if let Some(f) = &report.failure {
        eprintln!(
            "pipeline failed at stage `{}`: {}",
            f.stage.as_str(),
            f.message
        );
        return Ok(match f.kind {
            FailureKind::Input => EXIT_INPUT,
            FailureKind::Numeric => EXIT_NUMERIC,
            FailureKind::Io => EXIT_IO,
        });
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(code) => ExitCode::from(code),
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(code)
            }
        },
    }
}
