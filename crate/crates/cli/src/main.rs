//! `qae`: prepare datasets, train and evaluate quantum and classical
//! autoencoder anomaly detectors, and run the benchmark grid.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::ModelSpec;
use config::{ModelKind, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "qae", version, about)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    dataset: Option<String>,
    /// Restrict the run to one subset.
    #[arg(long, global = true)]
    subset: Option<String>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,
    /// Autoencoder hidden sizes, e.g. `16,8`.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1)]
    hidden: Option<Vec<usize>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root; runs land in `<out>/<dataset>/<subset>/<model>/`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Train-score percentile used as the decision threshold.
    #[arg(long, global = true)]
    percentile: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, split, scale and window each subset into the prepared cache.
    Prepare,
    /// Train the selected model on each prepared subset.
    Train,
    /// Score test windows and write metrics, scores and violin data.
    Eval,
    /// Prepare, train and evaluate the full model grid on every subset.
    Benchmark,
    /// Re-render violin plots from existing reports.
    Plot,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<qae::Error>()) else {
        return 1;
    };
    match e.category() {
        "config" => 2,
        "index" | "input" => 3,
        "ingest" => 4,
        "dataset" => 5,
        "contract" => 6,
        "format" => 7,
        "io" => 8,
        _ => 1,
    }
}

fn category(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|c| c.downcast_ref::<qae::Error>())
        .map_or("error", qae::Error::category)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let overrides = Overrides {
        dataset: cli.dataset,
        subset: cli.subset,
        model: cli.model,
        hidden: cli.hidden,
        seed: cli.seed,
        out: cli.out,
        percentile: cli.percentile,
        epochs: cli.epochs,
    };
    let config = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let spec = ModelSpec::from_config(&config);
    let subsets = &config.dataset.subsets;

    match cli.command {
        Command::Prepare => {
            for s in subsets {
                let p = commands::prepare(&config, s)?;
                let m = &p.manifest;
                println!(
                    "{s}: train {} windows ({} before filtering), test {} windows ({} anomalous)",
                    m.train_windows, m.train_windows_total, m.test_windows, m.test_anomalous
                );
            }
        }
        Command::Train => {
            for s in subsets {
                let dir = commands::train(&config, s, &spec)?;
                println!("{s}: {} trained -> {}", spec.tag(), dir.display());
            }
        }
        Command::Eval => {
            println!("{}", qae::report::METRICS_CSV_HEADER);
            for s in subsets {
                let m = commands::eval(&config, s, &spec)?;
                println!(
                    "{}",
                    qae::report::metrics_csv_row(&config.dataset.name, s, &spec.tag(), &m)
                );
            }
        }
        Command::Benchmark => {
            let table = commands::benchmark(&config)?;
            print!("{}", table.to_csv());
            for f in &table.failures {
                eprintln!("failed {}/{}: {}", f.subset, f.model, f.error);
            }
        }
        Command::Plot => {
            for s in subsets {
                let path = commands::plot(&config, s, &spec)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", category(&e), commands::describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
