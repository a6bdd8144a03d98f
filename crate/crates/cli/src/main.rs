mod commands;
mod load;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pvlab::experiments::{Centering, Moment};
use pvlab::halfspace::SlabParams;
use pvlab::PvError;

#[derive(Parser)]
#[command(name = "pvlab", version, about = "Poisson-Voronoi approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by the commands that run a config.
#[derive(Args, Clone, Default)]
pub struct RunArgs {
    /// Config file, or the name of a bundled config (see `pvlab configs`).
    #[arg(long)]
    pub config: Option<String>,
    /// Root seed as hex; overrides the config.
    #[arg(long)]
    pub seed: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "PVLAB_THREADS")]
    pub threads: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated intensities; overrides the config.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentArg {
    Mean,
    Variance,
}

#[derive(Clone, Copy, ValueEnum)]
enum CenteringArg {
    None,
    SubtractKnownLimit,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and fit the requested scaling laws.
    Simulate(RunArgs),
    /// Fit a power law to one column of a replicates.csv.
    Fit {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        statistic: String,
        #[arg(long, value_enum, default_value = "mean")]
        moment: MomentArg,
        #[arg(long, value_enum, default_value = "none")]
        centering: CenteringArg,
        /// Defaults to the directory of the table.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        min_replicates: usize,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
    /// Estimate half-space constants on periodic slabs.
    Constants {
        /// Score names, comma separated (surface, signed_volume, face_count_0, ...).
        #[arg(long, value_delimiter = ',', default_value = "surface")]
        score: Vec<String>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        lateral: Option<f64>,
        #[arg(long)]
        half_height: Option<f64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        intensity: Option<f64>,
        /// Skip the run at twice the half-height.
        #[arg(long)]
        no_doubling: bool,
        #[arg(long, default_value = "70766c6162")]
        seed: String,
        #[arg(long, env = "PVLAB_THREADS")]
        threads: Option<usize>,
        /// Also write constants.json and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate the approximation and test the predicted error growth.
    Iterate {
        #[command(flatten)]
        run: RunArgs,
        /// Number of iterations; overrides the config.
        #[arg(long)]
        depth: Option<usize>,
        /// constants.json holding the surface constant.
        #[arg(long, conflicts_with = "c2")]
        constants: Option<PathBuf>,
        /// Surface constant, used instead of estimating it.
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long, requires = "c2", default_value_t = 0.0)]
        c2_se: f64,
    },
    /// Like simulate, with zone statistics switched on.
    Zone(RunArgs),
    /// Like simulate, with maximal-point counts switched on.
    Maxima(RunArgs),
    /// Summarize a finished run directory into report.md and report.json.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Check the build against brute-force oracles.
    Selftest,
    /// List the bundled configs, or print one.
    Configs { name: Option<String> },
}

fn dispatch(cmd: Command) -> Result<commands::Outcome, PvError> {
    let clean = commands::Outcome { tainted: false };
    match cmd {
        Command::Simulate(a) => commands::simulate(&a, "simulate", |_| {}),
        Command::Zone(a) => commands::zone(&a),
        Command::Maxima(a) => commands::maxima(&a),
        Command::Fit { table, statistic, moment, centering, out, min_replicates, bootstrap } => {
            commands::fit(&commands::FitArgs {
                table,
                statistic,
                moment: match moment {
                    MomentArg::Mean => Moment::Mean,
                    MomentArg::Variance => Moment::Variance,
                },
                centering: match centering {
                    CenteringArg::None => Centering::None,
                    CenteringArg::SubtractKnownLimit => Centering::SubtractKnownLimit,
                },
                out,
                min_replicates,
                bootstrap,
            })
        }
        Command::Constants { score, d, lateral, half_height, replicates, intensity, no_doubling, seed, threads, out } => {
            let def = SlabParams::default();
            let params = SlabParams {
                dim: d,
                lateral: lateral.unwrap_or(def.lateral),
                half_height: half_height.unwrap_or(def.half_height),
                replicates: replicates.unwrap_or(def.replicates),
                intensity: intensity.unwrap_or(def.intensity),
                check_doubling: !no_doubling,
            };
            commands::constants(&commands::ConstantsArgs { scores: score, params, seed, threads, out })
        }
        Command::Iterate { run, depth, constants, c2, c2_se } => commands::iterate(&commands::IterateArgs {
            run,
            depth,
            constants,
            c2: c2.map(|c| (c, c2_se)),
        }),
        Command::Report { dir } => commands::report(&dir),
        Command::Selftest => {
            if selftest::run()? {
                Ok(clean)
            } else {
                Err(PvError::Precision("self-test failed".into()))
            }
        }
        Command::Configs { name: None } => {
            for (n, _) in load::BUNDLED {
                println!("{n}");
            }
            Ok(clean)
        }
        Command::Configs { name: Some(n) } => {
            let (text, _) = load::read_config(&n)?;
            print!("{text}");
            Ok(clean)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(o) if o.tainted => {
            eprintln!("warning: results are tainted (boundary contact above threshold); outputs are flagged");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                PvError::Config(_) | PvError::Usage(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
