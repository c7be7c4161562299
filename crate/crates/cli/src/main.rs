use clap::{Args, Parser, Subcommand};
use dissim_cli::commands::{clg, dissim, dtc, transport};
use dissim_cli::config::{resolve, FileConfig};
use dissim_cli::output::RunContext;
use dissim_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dissim",
    version,
    about = "Coarse-graining dissimilarity studies of lattice-gas, driven-spin, and spin-transport dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; every task derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key=value config file; flags win over file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also emit SVG plots next to each CSV.
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep lattice-gas density and tabulate trajectory metrics.
    ClgSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Ring length (default 64).
        #[arg(long)]
        sites: Option<usize>,
        /// Recorded sweeps per trajectory (default 1024).
        #[arg(long)]
        steps: Option<usize>,
        /// Independent starting configurations per density (default 100).
        #[arg(long)]
        seeds: Option<usize>,
        /// Lowest density scanned (default 0.30).
        #[arg(long)]
        rho_min: Option<f64>,
        /// Highest density scanned (default 0.95).
        #[arg(long)]
        rho_max: Option<f64>,
        /// Density grid spacing (default 0.05).
        #[arg(long)]
        rho_step: Option<f64>,
    },
    /// Compressed-density report for one chain state file (ASCII 0/1).
    ClgCid {
        #[command(flatten)]
        common: CommonArgs,
        /// File of 0/1 characters; whitespace ignored.
        state_file: Option<PathBuf>,
    },
    /// Dissimilarity versus drive imperfection, with a crossing estimate.
    DtcCurve {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain length (default 16).
        #[arg(long)]
        qubits: Option<usize>,
        /// Disorder realizations per imperfection value (default 512).
        #[arg(long)]
        realizations: Option<usize>,
        /// Drive cycles per realization (default 16).
        #[arg(long)]
        cycles: Option<usize>,
        /// Lowest imperfection scanned (default 0).
        #[arg(long)]
        eps_min: Option<f64>,
        /// Highest imperfection scanned (default 0.40).
        #[arg(long)]
        eps_max: Option<f64>,
        /// Imperfection grid spacing (default 0.01).
        #[arg(long)]
        eps_step: Option<f64>,
    },
    /// Echo-distance histograms at one even and one odd cycle.
    DtcHamming {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain length (default 16).
        #[arg(long)]
        qubits: Option<usize>,
        /// Independent disorder draws (default 512).
        #[arg(long)]
        circuits: Option<usize>,
        /// Drive cycles per circuit (default 64).
        #[arg(long)]
        cycles: Option<usize>,
        /// Flip imperfection (default 0.04).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Two comma-separated 1-based cycle numbers of opposite parity.
        #[arg(long)]
        steps: Option<String>,
    },
    /// Ensemble-averaged edge magnetization decay with a power-law fit.
    TransportMagnetization {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain length (default 16).
        #[arg(long)]
        qubits: Option<usize>,
        /// Independent experiments to average (default 128).
        #[arg(long)]
        experiments: Option<usize>,
        /// First sample time (default 0.01).
        #[arg(long)]
        t0: Option<f64>,
        /// Last sample time (default 126).
        #[arg(long)]
        horizon: Option<f64>,
        /// Sample times, geometrically spaced (default 4096).
        #[arg(long)]
        points: Option<usize>,
        /// Lower edge of the power-law fit window (default 5).
        #[arg(long)]
        fit_min: Option<f64>,
        /// Upper edge of the power-law fit window (default 14.7).
        #[arg(long)]
        fit_max: Option<f64>,
    },
    /// Monitored run: windowed dissimilarity of sampled bitstrings.
    TransportDissim {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain length (default 16).
        #[arg(long)]
        qubits: Option<usize>,
        /// Independent experiments to average (default 2048).
        #[arg(long)]
        experiments: Option<usize>,
        /// First sample time (default 0.01).
        #[arg(long)]
        t0: Option<f64>,
        /// Last sample time (default 126).
        #[arg(long)]
        horizon: Option<f64>,
        /// Sample times, geometrically spaced (default 4096).
        #[arg(long)]
        points: Option<usize>,
        /// Steps per dissimilarity window (default 16).
        #[arg(long)]
        window: Option<usize>,
        /// Drop the polarized reference spin (fully random start).
        #[arg(long)]
        control: bool,
    },
    /// Score a grid loaded from a header-free CSV file.
    Dissim {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated float grid; rows are space, columns are time.
        grid_file: Option<PathBuf>,
        /// Row block factor per coarsening step (default 2).
        #[arg(long)]
        lambda_x: Option<usize>,
        /// Column block factor per coarsening step (default 2).
        #[arg(long)]
        lambda_t: Option<usize>,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::ClgSweep { common, .. }
            | Command::ClgCid { common, .. }
            | Command::DtcCurve { common, .. }
            | Command::DtcHamming { common, .. }
            | Command::TransportMagnetization { common, .. }
            | Command::TransportDissim { common, .. }
            | Command::Dissim { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::ClgSweep { .. } => "clg-sweep",
            Command::ClgCid { .. } => "clg-cid",
            Command::DtcCurve { .. } => "dtc-curve",
            Command::DtcHamming { .. } => "dtc-hamming",
            Command::TransportMagnetization { .. } => "transport-magnetization",
            Command::TransportDissim { .. } => "transport-dissim",
            Command::Dissim { .. } => "dissim",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let cfg = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };
    let seed = resolve(common.seed, &cfg, "seed", 17u64)?;
    let out: PathBuf = resolve(common.out.clone(), &cfg, "out", PathBuf::from("out"))?;
    let plot = common.plot || cfg.get::<bool>("plot")?.unwrap_or(false);
    let workers = match common.workers {
        Some(n) => Some(n),
        None => cfg.get::<usize>("workers")?,
    };
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;
    }
    let mut ctx = RunContext::new(cli.command.name(), out, plot);

    match cli.command {
        Command::ClgSweep {
            sites,
            steps,
            seeds,
            rho_min,
            rho_max,
            rho_step,
            ..
        } => clg::run_sweep(
            &clg::SweepFlags {
                sites,
                steps,
                seeds,
                rho_min,
                rho_max,
                rho_step,
            },
            &cfg,
            seed,
            &mut ctx,
        ),
        Command::ClgCid { state_file, .. } => clg::run_cid(state_file, &cfg, &mut ctx),
        Command::DtcCurve {
            qubits,
            realizations,
            cycles,
            eps_min,
            eps_max,
            eps_step,
            ..
        } => dtc::run_curve(
            &dtc::CurveFlags {
                qubits,
                realizations,
                cycles,
                eps_min,
                eps_max,
                eps_step,
            },
            &cfg,
            seed,
            &mut ctx,
        ),
        Command::DtcHamming {
            qubits,
            circuits,
            cycles,
            epsilon,
            steps,
            ..
        } => dtc::run_hamming(
            &dtc::HammingFlags {
                qubits,
                circuits,
                cycles,
                epsilon,
                steps,
            },
            &cfg,
            seed,
            &mut ctx,
        ),
        Command::TransportMagnetization {
            qubits,
            experiments,
            t0,
            horizon,
            points,
            fit_min,
            fit_max,
            ..
        } => transport::run_magnetization_cmd(
            &transport::MagnetizationFlags {
                qubits,
                experiments,
                t0,
                horizon,
                points,
                fit_min,
                fit_max,
            },
            &cfg,
            seed,
            &mut ctx,
        ),
        Command::TransportDissim {
            qubits,
            experiments,
            t0,
            horizon,
            points,
            window,
            control,
            ..
        } => transport::run_dissim_cmd(
            &transport::DissimFlags {
                qubits,
                experiments,
                t0,
                horizon,
                points,
                window,
                control,
            },
            &cfg,
            seed,
            &mut ctx,
        ),
        Command::Dissim {
            grid_file,
            lambda_x,
            lambda_t,
            ..
        } => dissim::run_dissim_file(
            &dissim::DissimArgs {
                grid_file,
                lambda_x,
                lambda_t,
            },
            &cfg,
            &mut ctx,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap prints its own message; exit 2 on bad usage, 0 for --help/--version
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
