use std::path::PathBuf;
use std::process::ExitCode;

use citescope::config::ExportFormat;
use citescope::{load_config, run_pipeline, stats, Overrides, PipelineError, RunOptions, Stage};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "citescope", version, about = "Backward citation-network analysis of a seed bibliography")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "citescope.toml")]
    config: PathBuf,
    /// Overrides the Louvain random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Weight reciprocal citation pairs 2 in the symmetrized network.
    #[arg(long, global = true)]
    weighted_symmetrize: bool,
    /// Start over when the output directory was produced with another config.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the seed bibliography and apply exclusions.
    Ingest,
    /// Resolve the seeds and crawl their backward citation network.
    Crawl,
    /// Largest weak component, 2-core and symmetrized view.
    Core,
    /// Louvain communities and sub-communities.
    Communities,
    /// Rank-size fit, inter-citation, chapter overlap and composition tables.
    Metrics {
        /// Also write long-format tables for plotting.
        #[arg(long)]
        plot_data: bool,
    },
    /// Write the core network for graph tools.
    Export {
        #[arg(long, value_enum)]
        format: Vec<Format>,
    },
    /// Run every stage.
    Run {
        #[arg(long)]
        plot_data: bool,
    },
    /// Summarize an output directory.
    Stats,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Graphml,
    Edgelist,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
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

fn run(cli: Cli) -> Result<(), PipelineError> {
    let plot_data = matches!(cli.command, Command::Metrics { plot_data: true } | Command::Run { plot_data: true });
    let overrides = Overrides { rng_seed: cli.seed, plot_data, weighted_symmetrize: cli.weighted_symmetrize };
    let mut loaded = load_config(&cli.config, &overrides)?;
    let stages = match &cli.command {
        Command::Ingest => vec![Stage::Ingest],
        Command::Crawl => vec![Stage::Crawl],
        Command::Core => vec![Stage::Component, Stage::Core, Stage::Symmetrize],
        Command::Communities => vec![Stage::Louvain, Stage::Subcommunities],
        Command::Metrics { .. } => vec![Stage::Metrics],
        Command::Export { format } => {
            // Output formats are a rendering choice; they do not enter the
            // config hash.
            if !format.is_empty() {
                loaded.config.export_formats = format
                    .iter()
                    .map(|f| match f {
                        Format::Graphml => ExportFormat::Graphml,
                        Format::Edgelist => ExportFormat::Edgelist,
                    })
                    .collect();
            }
            vec![Stage::Export]
        }
        Command::Run { .. } => Stage::ALL.to_vec(),
        Command::Stats => {
            print!("{}", stats(&loaded)?);
            return Ok(());
        }
    };
    let manifest = run_pipeline(&loaded, &RunOptions { stages, force: cli.force })?;
    let done: Vec<&str> = Stage::ALL.iter().map(|s| s.name()).filter(|s| manifest.is_complete(s)).collect();
    log::info!("completed stages: {}", done.join(", "));
    Ok(())
}
