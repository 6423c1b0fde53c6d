//! Command-line driver: dataset simulation, classification, and standalone
//! scoring of result files.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use polargmm::io::ReportValue;
use polargmm::pipeline::{self, ClassifyOptions, Config};

#[derive(Parser)]
#[command(name = "polargmm", version, about = "Steerable Fourier-Bessel PCA 2D classification")]
struct Cli {
    /// Configuration file with one key=value assignment per line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed from the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Caps the worker thread count (1 forces fully serial execution).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Renders a synthetic dataset to a stack file and ground-truth CSV.
    Simulate {
        /// Output image stack.
        stack: PathBuf,
        /// Output ground-truth CSV.
        truth: PathBuf,
    },
    /// Classifies an image stack and writes all artifacts into a directory.
    Classify {
        /// Input image stack.
        stack: PathBuf,
        /// Output directory.
        out_dir: PathBuf,
        /// Ground-truth CSV; enables the metric report.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Disables the translation search (rotation-only alignment).
        #[arg(long)]
        no_translation: bool,
        /// Skips the EM centering stage.
        #[arg(long)]
        no_center: bool,
        /// Freezes alignment at the identity pose (diagnostic mode).
        #[arg(long)]
        freeze_align: bool,
        /// Emits per-iteration batch log-likelihood.
        #[arg(long)]
        trace: bool,
    },
    /// Scores label (and optionally pose) files against ground truth.
    Report {
        /// Ground-truth CSV.
        truth: PathBuf,
        /// Predicted labels CSV.
        labels: PathBuf,
        /// Predicted poses CSV; enables AE-2/TE-2.
        #[arg(long)]
        poses: Option<PathBuf>,
    },
}

fn print_entries(entries: &[(String, ReportValue)]) {
    for (name, value) in entries {
        println!("{name}\t{}", value.render());
    }
}

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

fn run(cli: Cli) -> Result<(), u8> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| {
                eprintln!("error: could not configure thread pool: {e}");
                EXIT_USAGE
            })?;
    }

    let mut config = Config::default();
    if let Some(path) = &cli.config {
        config.load(path).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_USAGE
        })?;
    }
    if let Some(seed) = cli.seed {
        config.pipeline.seed = seed;
        config.simulate.seed = seed;
    }

    let data_err = |e: polargmm::Error| {
        eprintln!("error: {e}");
        EXIT_DATA
    };

    match cli.command {
        Command::Simulate { stack, truth } => {
            let entries =
                pipeline::cmd_simulate(&config.simulate, &stack, &truth).map_err(data_err)?;
            print_entries(&entries);
        }
        Command::Classify {
            stack,
            out_dir,
            truth,
            no_translation,
            no_center,
            freeze_align,
            trace,
        } => {
            if no_translation {
                config.pipeline.enable_translation = false;
            }
            let opts = ClassifyOptions {
                no_center,
                freeze_align,
                trace,
            };
            let result = pipeline::cmd_classify(
                &config.pipeline,
                opts,
                &stack,
                truth.as_deref(),
                &out_dir,
            )
            .map_err(data_err)?;
            print_entries(&result.report);
        }
        Command::Report {
            truth,
            labels,
            poses,
        } => {
            let entries =
                pipeline::cmd_report(&truth, &labels, poses.as_deref()).map_err(data_err)?;
            print_entries(&entries);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
