use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use racing_gan::cli::{self, parse, Overrides};
use racing_gan::diffcore::OptimMethod;
use racing_gan::racing_losses::{Formulation, HingeConvention};
use racing_gan::trainer::Variant;

#[derive(Parser)]
#[command(
    name = "racing-gan",
    about = "Competitively coupled multi-generator adversarial training on quadratic-curve bands",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and analyze a single (variant, seed) run.
    Run {
        /// Configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Seed for this run; beats the config seed list.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the full benchmark: all four variants over the seed list.
    Bench {
        /// Configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Comma-separated seed list; beats the config seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Render loss-curve SVGs from trace CSVs.
    Plot {
        /// Trace CSV files produced by run/bench.
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Directory for the SVGs; defaults to next to each trace.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OverrideArgs {
    /// Experiment variant: gan1 | gan2 | gan3 | gan4 | custom.
    #[arg(long, value_parser = parse::variant)]
    variant: Option<Variant>,
    /// Training iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Batch size.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Optimizer: sgd | adam.
    #[arg(long, value_parser = parse::optimizer)]
    optimizer: Option<OptimMethod>,
    /// Discriminator learning rate.
    #[arg(long)]
    lr_d: Option<f64>,
    /// Generator learning rate.
    #[arg(long)]
    lr_g: Option<f64>,
    /// Latent dimension.
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Loss formulation: standard_bce | paper_literal.
    #[arg(long, value_parser = parse::formulation)]
    formulation: Option<Formulation>,
    /// Hinge convention: lag_penalty | lead_penalty.
    #[arg(long, value_parser = parse::hinge_convention)]
    hinge_convention: Option<HingeConvention>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Skip SVG plots.
    #[arg(long)]
    no_plots: bool,
}

impl OverrideArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            variant: self.variant,
            seed: None,
            seeds: None,
            iterations: self.iterations,
            batch_size: self.batch_size,
            optimizer: self.optimizer,
            lr_d: self.lr_d,
            lr_g: self.lr_g,
            latent_dim: self.latent_dim,
            formulation: self.formulation,
            hinge_convention: self.hinge_convention,
            out_dir: self.out_dir,
            no_plots: self.no_plots,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            overrides,
            seed,
        } => {
            let mut overrides = overrides.into_overrides();
            overrides.seed = seed;
            cli::cmd_run(&config, &overrides)
        }
        Command::Bench {
            config,
            overrides,
            seeds,
        } => {
            let mut overrides = overrides.into_overrides();
            overrides.seeds = seeds;
            cli::cmd_bench(&config, &overrides)
        }
        Command::Plot { traces, out_dir } => cli::cmd_plot(&traces, out_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
