//! `commitvec` command-line front end.

mod commands;
mod config;
mod data;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use commitvec::scalar::Dtype;
use serde::Serialize;

use crate::config::Config;
use crate::run::{is_data_error, Run};

#[derive(Parser)]
#[command(name = "commitvec", version, about = "Commit representations and classifiers")]
struct Cli {
    /// Seed for every random choice; overrides the seeds in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML config with one section per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    BowSvm,
    Lstm,
    PathAttention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalModel {
    BowSvm,
    Lstm,
    PathAttention,
    PathAttentionPretrained,
}

impl EvalModel {
    pub fn name(self) -> &'static str {
        match self {
            EvalModel::BowSvm => "bow-svm",
            EvalModel::Lstm => "lstm",
            EvalModel::PathAttention => "path-attention",
            EvalModel::PathAttentionPretrained => "path-attention-pretrained",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Precision {
    F32,
    #[default]
    F64,
}

impl From<Precision> for Dtype {
    fn from(p: Precision) -> Self {
        match p {
            Precision::F32 => Dtype::F32,
            Precision::F64 => Dtype::F64,
        }
    }
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Scan repositories, link commits to issues and label them.
    Mine {
        /// Use only the issue cache.
        #[arg(long)]
        offline: bool,
    },
    /// Build the path-context corpus from mined commits.
    Extract {
        /// `mined.jsonl` from `mine`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the token corpus from mined commits.
    Tokenize {
        #[arg(long)]
        input: PathBuf,
        /// Keep only commits present in this path-context corpus.
        #[arg(long)]
        keep: Option<PathBuf>,
    },
    /// Train the path-attention network on a multi-class corpus.
    Pretrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        precision: Precision,
    },
    /// Train one model on a whole corpus.
    Train {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        precision: Precision,
    },
    /// Fine-tune a pretrained path-attention network on a pos/neg corpus.
    Finetune {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory written by `pretrain`.
        #[arg(long)]
        pretrained: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        precision: Precision,
    },
    /// k-fold cross validation.
    Evaluate {
        #[arg(long, value_enum)]
        model: EvalModel,
        #[arg(long)]
        folds: Option<usize>,
        /// Token corpus for bow-svm and lstm, path-context corpus otherwise.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pretrained: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        precision: Precision,
    },
    /// Repeated training on one fixed split with varying seeds.
    Variability {
        #[arg(long, value_enum)]
        model: EvalModel,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pretrained: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        precision: Precision,
    },
    /// Write the code vector of every commit as CSV.
    ExportVectors {
        /// Directory written by `train`, `pretrain` or `finetune`.
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Per-class reference and valid counts from `extract.jsonl`.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mine { .. } => "mine",
            Command::Extract { .. } => "extract",
            Command::Tokenize { .. } => "tokenize",
            Command::Pretrain { .. } => "pretrain",
            Command::Train { .. } => "train",
            Command::Finetune { .. } => "finetune",
            Command::Evaluate { .. } => "evaluate",
            Command::Variability { .. } => "variability",
            Command::ExportVectors { .. } => "export-vectors",
            Command::Stats { .. } => "stats",
        }
    }
}

macro_rules! by_precision {
    ($p:expr, $f:ident($($arg:expr),*)) => {
        match $p {
            Precision::F32 => $f::<f32>($($arg),*),
            Precision::F64 => $f::<f64>($($arg),*),
        }
    };
}

fn execute(cli: Cli) -> Result<()> {
    use commands::evaluate::{evaluate, variability};
    use commands::mining;
    use commands::models::{export_vectors, finetune, pretrain, train};

    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli.seed.unwrap_or(config.train.seed);
    let config = config.with_seed(seed);
    let args = serde_json::to_value(&cli.command)?;
    let mut run = Run::new(cli.out.clone(), cli.command.name(), args, seed, config)?;
    if let Some(p) = &cli.config {
        run.input(p)?;
    }
    let r = &mut run;
    match &cli.command {
        Command::Mine { offline } => mining::mine(r, *offline)?,
        Command::Extract { input } => mining::extract(r, input)?,
        Command::Tokenize { input, keep } => mining::tokenize(r, input, keep.as_deref())?,
        Command::Pretrain { corpus, precision } => by_precision!(precision, pretrain(r, corpus, (*precision).into()))?,
        Command::Train { model, corpus, precision } => {
            by_precision!(precision, train(r, *model, corpus, (*precision).into()))?
        }
        Command::Finetune { corpus, pretrained, precision } => {
            by_precision!(precision, finetune(r, corpus, pretrained, (*precision).into()))?
        }
        Command::Evaluate { model, folds, corpus, pretrained, precision } => {
            by_precision!(precision, evaluate(r, *model, corpus, pretrained.as_deref(), *folds))?
        }
        Command::Variability { model, runs, corpus, pretrained, precision } => {
            by_precision!(precision, variability(r, *model, corpus, pretrained.as_deref(), *runs))?
        }
        Command::ExportVectors { model_dir, corpus } => export_vectors::<f64>(r, model_dir, corpus)?,
        Command::Stats { input } => mining::stats(r, input)?,
    }
    run.finish()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_data_error(&e) { 2 } else { 3 })
        }
    }
}
