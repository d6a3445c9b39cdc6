//! Command-line pipeline: forward validation, surrogate training data and
//! training, synthetic observations, inference and reporting.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Backend, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "phaseless", version, about = "Shape reconstruction from phaseless far-field intensities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the stage being run, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Forward model used by `infer` and read by `report`.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<Backend>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the solver against the disc series and its self-convergence.
    ValidateForward,
    /// Solve for prior draws to build the surrogate training set.
    GenTrain,
    /// Fit the surrogate and time it against the solver.
    Train,
    /// Synthesise noisy intensities for the configured scatterer.
    GenObs,
    /// Run the griddy Gibbs sampler.
    Infer,
    /// Align the chain, summarise the shape and write plots.
    Report,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

/// Applies the command-line overrides to the config.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(b) = cli.backend {
        config.chain.backend = b;
    }
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot configure thread pool: {e}")))?;
    }
    let config = resolve_config(cli)?;
    if cli.command == Command::ShowConfig {
        config.validate()?;
        print!("{}", config.to_toml());
        return Ok(());
    }
    let backend = config.chain.backend;
    let ctx = commands::Context::new(config, cli.seed)?;
    match cli.command {
        Command::ValidateForward => {
            let r = commands::validate_forward(&ctx)?;
            for m in &r.mie {
                println!("disc k={:.6} n={}: relative error {:.3e}", m.wavenumber, m.nystrom_n, m.relative_error);
            }
            println!(
                "self-convergence over {} samples: max {:.3e}, mean {:.3e}",
                r.certificate.samples, r.certificate.max_error, r.certificate.mean_error
            );
        }
        Command::GenTrain => commands::gen_train(&ctx)?,
        Command::Train => commands::train_surrogate(&ctx)?,
        Command::GenObs => commands::gen_obs(&ctx)?,
        Command::Infer => {
            let chain = commands::infer(&ctx, backend)?;
            println!(
                "{} sweeps with the {} backend in {:.2} s ({} forward evaluations)",
                chain.len(),
                chain.backend,
                chain.elapsed_seconds,
                chain.counters.forward_evaluations
            );
        }
        Command::Report => {
            let r = commands::report(&ctx, backend)?;
            match r.mean_shape_l2 {
                Some(e) => println!("mean-shape relative L2 error {e:.4}"),
                None => println!("no truth available; summary written"),
            }
        }
        Command::ShowConfig => unreachable!(),
    }
    Ok(())
}
