use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use ssh_hoti::config::{ExperimentConfig, Format};
use ssh_hoti::experiments::{self, Command};
use ssh_hoti::Error;

#[derive(Parser, Debug)]
#[command(version, about = "Extended 2D SSH lattice: topology, spectra, dynamics and entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config; default out/<command>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for disorder ensembles (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Table format (overrides the config)
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Band structure along Γ–X–M–Γ and gap report
    Bands,
    /// Rotation indices, corner charge and Wilson-loop polarization
    Invariants,
    /// Open-boundary spectrum, state labels and density maps
    Spectrum,
    /// Propagate the configured injection over the z grid
    Evolve,
    /// Ensemble statistics under bond disorder
    DisorderSweep,
    /// Star-coupler unitary and the corner superposition it prepares
    Coupler,
    /// Concurrence and purity after the lattice channel
    Entangle,
    /// All artifacts of one figure (fig1, fig2, fig3, fig4, entanglement, robustness)
    Reproduce { figure_id: String },
}

fn execute(cli: Cli) -> Result<PathBuf, Error> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }

    let command = match cli.command {
        Cmd::Bands => Command::Bands,
        Cmd::Invariants => Command::Invariants,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Evolve => Command::Evolve,
        Cmd::DisorderSweep => Command::DisorderSweep,
        Cmd::Coupler => Command::Coupler,
        Cmd::Entangle => Command::Entangle,
        Cmd::Reproduce { figure_id } => Command::Reproduce(figure_id),
    };
    let default_dir = || {
        let name = match &command {
            Command::Reproduce(id) => id.clone(),
            other => other.name(),
        };
        PathBuf::from("out").join(name)
    };
    let out = cli
        .out
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(default_dir);
    config.output.dir = Some(out.clone());

    let manifest = experiments::run(&command, &config, &out)?;
    info!("{} wrote {} files", manifest.command, manifest.outputs.len());
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(out) => {
            println!("{}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
