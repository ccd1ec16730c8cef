use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};
use synsem_cli::ablate::{ablate, Grid};
use synsem_cli::convert::{convert, InputFormat, Summary};
use synsem_cli::demo::demo;
use synsem_cli::train::{cmd_eval, cmd_train};
use synsem_cli::{CliError, CliResult, RunConfig};
use synsem_core::ingest::{read_jsonl, write_jsonl, Corpus};
use synsem_core::Model;

#[derive(Parser)]
#[command(name = "synsem", version, about = "Joint Chinese segmentation and POS tagging with relation-graph GCNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert CoNLL-U or bracketed trees to JSONL.
    Convert {
        input: PathBuf,
        #[arg(long, default_value = "conllu")]
        format: String,
        /// Bracketed trees supplying constituent labels.
        #[arg(long)]
        trees: Option<PathBuf>,
        /// Role columns supplying semantic roles.
        #[arg(long)]
        roles: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model from a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Metrics JSON path, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a checkpoint on a JSONL corpus.
    Eval {
        checkpoint: PathBuf,
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and score every row of an ablation grid.
    Ablate {
        /// `components` or `fusion`.
        grid: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a baseline and a graph checkpoint on the first sentence of a JSONL file.
    Demo {
        baseline: PathBuf,
        graph: PathBuf,
        sentence: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
}

fn load_corpus(path: &Path) -> CliResult<Corpus> {
    read_jsonl(path).map_err(|e| CliError::from(e).context(path.display()))
}

fn load_model(path: &Path) -> CliResult<Model> {
    Model::load(path).map_err(|e| CliError::from(e).context(path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).map_err(|e| CliError::from(e).context(path.display()))
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Convert {
            input,
            format,
            trees,
            roles,
            out,
        } => {
            let corpus = convert(format.parse::<InputFormat>()?, &input, trees.as_deref(), roles.as_deref())?;
            write_jsonl(&out, &corpus).map_err(|e| CliError::from(e).context(out.display()))?;
            let s = Summary::of(&corpus);
            println!("sentences {}  words {}  chars {}  tags {}", s.sentences, s.words, s.chars, s.tags);
        }
        Command::Train { config, seed, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if out.is_some() {
                cfg.metrics = out;
            }
            let outcome = cmd_train(&cfg)?;
            println!("{:>5} {:>10} {:>8} {:>8}", "epoch", "loss", "dev CWS", "dev joint");
            for r in &outcome.metrics.epochs {
                println!(
                    "{:>5} {:>10.4} {:>8.4} {:>8.4}",
                    r.epoch, r.loss, r.dev_cws_f1, r.dev_joint_f1
                );
            }
            if let Some(t) = &outcome.metrics.test {
                println!("test CWS F1 {:.4}  joint F1 {:.4}", t.cws.f1, t.joint.f1);
            }
        }
        Command::Eval { checkpoint, data, out } => {
            let report = cmd_eval(&checkpoint, &data)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(out) = out {
                write_json(&out, &report)?;
            }
        }
        Command::Ablate {
            grid,
            config,
            seed,
            repeats,
            out,
        } => {
            let grid: Grid = grid.parse()?;
            let mut cfg = RunConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let train = load_corpus(
                cfg.train
                    .as_deref()
                    .ok_or_else(|| CliError::usage("config has no `train` path"))?,
            )?;
            let dev = cfg.dev.as_deref().map(load_corpus).transpose()?;
            let test = cfg.test.as_deref().map(load_corpus).transpose()?;
            let outcome = ablate(&cfg, grid, repeats, &train, dev.as_ref(), test.as_ref())?;
            print!("{}", outcome.table.render());
            if let Some(out) = out {
                write_json(&out, &outcome.table)?;
            }
        }
        Command::Demo {
            baseline,
            graph,
            sentence,
            format,
        } => {
            let corpus = load_corpus(&sentence)?;
            let first = corpus
                .sentences
                .first()
                .ok_or_else(|| CliError::data(format!("{}: no sentences", sentence.display())))?;
            let report = demo(&load_model(&baseline)?, &load_model(&graph)?, first)?;
            match format.as_deref() {
                None | Some("text") => print!("{}", report.render()),
                Some("json") => println!("{}", serde_json::to_string_pretty(&report)?),
                Some(other) => return Err(CliError::usage(format!("unknown demo format {other:?}"))),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(line));
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
