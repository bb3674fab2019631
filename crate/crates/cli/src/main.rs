//! `tae`: train, evaluate and apply twin auto-encoder representations.
//!
//! Log verbosity is read from `TAE_LOG` (default `info`); diagnostics go to
//! stderr and every result is written to files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use tae_core::data::{BlobConfig, LabelColumn};
use tae_core::nn::Activation;
use tae_core::pipeline::{self, Representation, RunConfig};

#[derive(Parser)]
#[command(
    name = "tae",
    version,
    about = "Twin auto-encoder representations for attack detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write model.json and history.csv.
    Train(RunArgs),
    /// Fit the decision-tree grid on a representation and write report.json/report.txt.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Model file; required unless the representation is `raw`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Map the rows of a CSV file to their learned representation.
    Transform(TransformArgs),
    /// Train and evaluate over the scale and latent-size grids.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated scale values, overriding `scale_grid`.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        /// Comma-separated latent sizes, overriding `latent_grid`.
        #[arg(long, value_delimiter = ',')]
        latents: Option<Vec<usize>>,
    },
    /// Write overlapping Gaussian blobs as a labeled CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// raw, ae-latent, tae-latent or tae-reconstruction.
    #[arg(long)]
    representation: Option<Representation>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Label column name, or zero-based index.
    #[arg(long)]
    label_column: Option<String>,
    /// Treat the first row as data rather than a header.
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    normal_class: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    activation: Option<Activation>,
    #[arg(long)]
    early_stop_threshold: Option<f64>,
    /// Comma-separated decision-tree depths.
    #[arg(long, value_delimiter = ',')]
    max_depth: Option<Vec<usize>>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(
            seed,
            out,
            representation,
            label_column,
            epochs,
            learning_rate,
            batch_size,
            scale,
            latent_dim,
            activation,
            early_stop_threshold,
            max_depth
        );
        if self.train.is_some() {
            cfg.train = self.train;
        }
        if self.test.is_some() {
            cfg.test = self.test;
        }
        if self.normal_class.is_some() {
            cfg.normal_class = self.normal_class;
        }
        if self.hidden.is_some() {
            cfg.hidden = self.hidden;
        }
        if self.no_header {
            cfg.header = false;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Column to drop from the input before transforming.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    no_header: bool,
    /// Defaults to the model's natural representation.
    #[arg(long)]
    representation: Option<Representation>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 400)]
    per_class: usize,
    #[arg(long, default_value_t = 6)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve()?;
            let s = pipeline::cmd_train(&cfg)?;
            log::info!(
                "trained {} epochs ({:?}), best epoch {}; model {}, history {}",
                s.epochs_run,
                s.stop,
                s.best_epoch,
                s.model_path.display(),
                s.history_path.display()
            );
        }
        Command::Eval { run, model } => {
            let cfg = run.resolve()?;
            let report = pipeline::cmd_eval(&cfg, model.as_deref())?;
            log::info!(
                "{}: accuracy {:.4}, f-score {:.4}; report in {}",
                report.representation,
                report.accuracy,
                report.f_score_macro,
                cfg.out.display()
            );
        }
        Command::Transform(args) => {
            let label = args
                .label_column
                .map(|s| s.parse::<LabelColumn>())
                .transpose()?;
            let n = pipeline::cmd_transform(
                &args.model,
                &args.input,
                &args.output,
                label.as_ref(),
                !args.no_header,
                args.representation,
            )?;
            log::info!("wrote {n} rows to {}", args.output.display());
        }
        Command::Sweep {
            run,
            scales,
            latents,
        } => {
            let mut cfg = run.resolve()?;
            if let Some(s) = scales {
                cfg.scale_grid = s;
            }
            if let Some(l) = latents {
                cfg.latent_grid = l;
            }
            let report = pipeline::cmd_sweep(&cfg)?;
            let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
            log::info!(
                "{} cells ({failed} failed); results in {}",
                report.rows.len(),
                cfg.out.display()
            );
        }
        Command::Synth(a) => {
            let cfg = BlobConfig {
                classes: a.classes,
                per_class: a.per_class,
                dim: a.dim,
                radius: a.radius,
                spread: a.spread,
                seed: a.seed,
            };
            let data = pipeline::cmd_synth(&cfg, &a.out)
                .with_context(|| format!("writing synthetic data to {}", a.out.display()))?;
            log::info!("wrote {} rows to {}", data.len(), a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TAE_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
