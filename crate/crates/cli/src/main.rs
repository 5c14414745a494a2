//! `sattrack`: label maps, attention demo, scenario simulation, tracking with
//! or without motion refinement, and one-pass evaluation.

mod args;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{OmmrArgs, Switch};

#[derive(Debug, Parser)]
#[command(name = "sattrack", version, about = "Satellite video tracking toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classic and aspect-ratio-constrained centerness maps for one box (CSV + PGM).
    CenternessMap {
        /// Target box in image coordinates, center form `cx,cy,w,h`.
        #[arg(long = "box", value_name = "CX,CY,W,H", allow_hyphen_values = true)]
        bbox: String,
        /// Exponent of the aspect-ratio modulation.
        #[arg(long, env = "SATTRACK_GAMMA", default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 8)]
        stride: usize,
        #[arg(long, default_value_t = 25)]
        rows: usize,
        #[arg(long, default_value_t = 25)]
        cols: usize,
        #[arg(long, env = "SATTRACK_OUTPUT")]
        output: PathBuf,
    },
    /// Generates a synthetic scenario and writes its ground truth, raw model and response summaries.
    Simulate {
        /// Scenario TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long, env = "SATTRACK_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "SATTRACK_OUTPUT")]
        output: PathBuf,
    },
    /// Tracks a scenario and writes the trajectory and the per-frame confidence trace.
    Track {
        /// Scenario TOML file.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, env = "SATTRACK_OMMR", default_value = "on")]
        ommr: Switch,
        #[command(flatten)]
        params: OmmrArgs,
        /// Overrides the seed in the scenario.
        #[arg(long, env = "SATTRACK_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "SATTRACK_OUTPUT")]
        output: PathBuf,
    },
    /// Scores predictions against ground truth (files or directories of `<id>.txt`).
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// TOML mapping attribute name to a list of sequence ids.
        #[arg(long)]
        attributes: Option<PathBuf>,
        #[arg(long, env = "SATTRACK_OUTPUT")]
        output: PathBuf,
    },
    /// Runs the attention block once and writes the enhanced search features and template saliency.
    IfgaDemo {
        /// Search features in the binary feature-map format.
        #[arg(long, requires = "template", conflicts_with = "random")]
        search: Option<PathBuf>,
        #[arg(long, requires = "search", conflicts_with = "random")]
        template: Option<PathBuf>,
        /// Draw both feature maps from the seed instead of reading files.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 8)]
        channels: usize,
        /// Side of the square random search map.
        #[arg(long, default_value_t = 5)]
        search_size: usize,
        /// Side of the square random template map.
        #[arg(long, default_value_t = 3)]
        template_size: usize,
        /// Weights TOML file.
        #[arg(long, conflicts_with = "init")]
        weights: Option<PathBuf>,
        /// Draw weights from the seed instead of reading a file.
        #[arg(long)]
        init: bool,
        #[arg(long, default_value_t = sattrack_core::ifga::DEFAULT_REDUCTION)]
        reduction: usize,
        /// Residual scale; overrides the weights file or the seeded default of 0.
        #[arg(long, env = "SATTRACK_GAMMA")]
        gamma: Option<f64>,
        /// Search rows `start:end` whose attention is summed into the saliency (default all).
        #[arg(long)]
        mask_rows: Option<String>,
        /// Search columns `start:end` (default all).
        #[arg(long)]
        mask_cols: Option<String>,
        #[arg(long, env = "SATTRACK_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "SATTRACK_OUTPUT")]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let written = match cli.command {
        Command::CenternessMap { bbox, gamma, stride, rows, cols, output } => {
            commands::centerness_map(&bbox, gamma, stride, rows, cols, &output)?
        }
        Command::Simulate { config, seed, output } => commands::simulate(&config, seed, &output)?,
        Command::Track { scenario, ommr, params, seed, output } => {
            commands::track(&scenario, ommr == Switch::On, &params, seed, &output)?
        }
        Command::Eval { pred, gt, attributes, output } => {
            commands::eval(&pred, &gt, attributes.as_deref(), &output)?
        }
        Command::IfgaDemo {
            search,
            template,
            random,
            channels,
            search_size,
            template_size,
            weights,
            init,
            reduction,
            gamma,
            mask_rows,
            mask_cols,
            seed,
            output,
        } => {
            let features = match (search, template, random) {
                (Some(s), Some(t), false) => commands::Features::Files { search: s, template: t },
                (None, None, true) => commands::Features::Random { channels, search_size, template_size },
                _ => anyhow::bail!("give either --search and --template, or --random"),
            };
            let weights = match (weights, init) {
                (Some(w), false) => commands::Weights::File(w),
                (None, true) => commands::Weights::Seeded { reduction },
                _ => anyhow::bail!("give either --weights or --init"),
            };
            let demo = commands::IfgaDemo {
                features,
                weights,
                gamma,
                mask_rows: mask_rows.as_deref().map(args::parse_range).transpose()?,
                mask_cols: mask_cols.as_deref().map(args::parse_range).transpose()?,
                seed,
            };
            commands::ifga_demo(&demo, &output)?
        }
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
