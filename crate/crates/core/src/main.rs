use atbench::cache::{ExpectedCounts, SynthKind};
use atbench::cli::{
    cmd_gen_synthetic, cmd_stats, cmd_validate, run_experiment, CliError, ExperimentConfig,
    EXIT_USAGE,
};
use atbench::opt::AlgorithmSpec;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "atbench",
    version,
    about = "Benchmark discrete auto-tuning optimizers against exhaustive measurement caches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a cache file; exit 0 when it is exhaustive and consistent.
    Validate {
        cache: PathBuf,
        /// Expected Cartesian size to check against.
        #[arg(long)]
        expect_cartesian: Option<u64>,
        /// Expected constrained size to check against.
        #[arg(long)]
        expect_constrained: Option<u64>,
        /// Expected dimension count to check against.
        #[arg(long)]
        expect_dims: Option<usize>,
    },
    /// Print search-space statistics and the budget at the cutoff.
    Stats {
        cache: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        cutoff: f64,
    },
    /// Generate a synthetic cache file.
    GenSynthetic {
        /// Landscape kind: bowl, rugged, or uniform_random.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        dims: u32,
        /// Values per parameter.
        #[arg(long)]
        points: u32,
        #[arg(long)]
        seed: u64,
        /// Output cache path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run algorithms against caches and write traces, report.csv, curve.csv.
    Run {
        /// Cache file; repeat the flag for several spaces.
        #[arg(long = "cache", required = true)]
        caches: Vec<PathBuf>,
        /// Algorithm spec NAME[,key=value...]; repeat for several algorithms.
        #[arg(long = "algo", required = true)]
        algos: Vec<String>,
        /// Seeded runs per (cache, algorithm) pair.
        #[arg(long, default_value_t = 100)]
        repeats: u64,
        /// Master seed; run i uses master ^ (i * 0x9E3779B97F4A7C15).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Budget cutoff as a fraction of the median-to-optimum distance.
        #[arg(long, default_value_t = 0.95)]
        cutoff: f64,
        /// Sampling points on the time grid.
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Validate {
            cache,
            expect_cartesian,
            expect_constrained,
            expect_dims,
        } => {
            let expected = (expect_cartesian.is_some()
                || expect_constrained.is_some()
                || expect_dims.is_some())
            .then_some(ExpectedCounts {
                cartesian_size: expect_cartesian,
                constrained_size: expect_constrained,
                dimensions: expect_dims,
            });
            cmd_validate(cache, expected)
        }
        Command::Stats { cache, cutoff } => cmd_stats(cache, cutoff),
        Command::GenSynthetic {
            kind,
            dims,
            points,
            seed,
            out,
        } => {
            let kind: SynthKind = kind.parse().map_err(CliError::Usage)?;
            cmd_gen_synthetic(kind, dims, points, seed, out)
        }
        Command::Run {
            caches,
            algos,
            repeats,
            seed,
            cutoff,
            points,
            out,
            workers,
        } => {
            let mut algorithms = Vec::with_capacity(algos.len());
            for spec in &algos {
                algorithms.push(
                    spec.parse::<AlgorithmSpec>()
                        .map_err(CliError::Usage)?,
                );
            }
            let config = ExperimentConfig {
                repeats,
                master_seed: seed,
                cutoff,
                grid_points: points,
                workers,
                ..ExperimentConfig::new(caches, algorithms, out)
            };
            let artifacts = run_experiment(&config)?;
            Ok(format!(
                "wrote {}\nwrote {}\nwrote {} trace file(s)",
                artifacts.report_path.display(),
                artifacts.curve_path.display(),
                artifacts.trace_paths.len()
            ))
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli.command) {
        Ok(output) => println!("{output}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
