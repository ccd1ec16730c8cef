use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use synsem_core::ingest::{read_jsonl, AnnotatedSentence, Corpus};
use synsem_core::metrics::{Counts, CorpusCounts};
use synsem_core::model::{ModelInput, Vocab};
use synsem_core::numcore::{Adam, Optimizer, Sgd};
use synsem_core::{Model, Tape};

use crate::config::{OptimizerKind, RunConfig};
use crate::error::{CliError, CliResult};

/// Precision, recall and F1 of one task.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

impl From<Counts> for Prf {
    fn from(c: Counts) -> Self {
        let s = c.score();
        Prf {
            p: s.precision,
            r: s.recall,
            f1: s.f1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cws: Prf,
    pub joint: Prf,
    pub sentences: usize,
    pub words: usize,
}

impl EvalReport {
    pub fn new(counts: CorpusCounts, corpus: &Corpus) -> Self {
        EvalReport {
            cws: counts.cws.into(),
            joint: counts.joint.into(),
            sentences: corpus.len(),
            words: corpus.num_words(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    /// Mean training loss over the epoch's sentences.
    pub loss: f64,
    pub dev_cws_f1: f64,
    pub dev_joint_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestScores {
    pub cws: Prf,
    pub joint: Prf,
}

/// The metrics JSON written by `train`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub config: RunConfig,
    pub epochs: Vec<EpochRow>,
    pub best_epoch: Option<usize>,
    pub test: Option<TestScores>,
}

pub struct TrainOutcome {
    /// Weights from the epoch with the best dev joint F1.
    pub model: Model,
    pub metrics: Metrics,
}

fn load_corpus(path: &Path) -> CliResult<Corpus> {
    read_jsonl(path).map_err(|e| CliError::from(e).context(path.display()))
}

/// Rejects corpora using POS tags the model was not built with.
pub fn check_tagset(model: &Model, corpus: &Corpus) -> CliResult<()> {
    let known = model.alphabet.pos_tagset();
    match corpus.pos_tagset.iter().find(|t| !known.contains(t)) {
        Some(tag) => Err(CliError::data(format!(
            "tagset mismatch: tag {tag:?} is not among the model's {} tags",
            known.len()
        ))),
        None => Ok(()),
    }
}

pub fn evaluate(model: &Model, corpus: &Corpus) -> CliResult<CorpusCounts> {
    let mut counts = CorpusCounts::default();
    for s in &corpus.sentences {
        let gold: Vec<_> = s.words.iter().copied().zip(s.pos.iter().cloned()).collect();
        counts.add_sentence(&gold, &model.predict(s)?);
    }
    Ok(counts)
}

/// Loss of one sentence without dropout.
pub fn sentence_loss(model: &Model, sentence: &AnnotatedSentence) -> CliResult<f64> {
    let input = model.prepare(sentence)?;
    let gold = model.gold_labels(sentence)?;
    let mut tape = Tape::new();
    let loss = model.network.loss(&mut tape, &model.store, &input, &gold, None)?;
    Ok(tape.value(loss).data()[0])
}

fn optimizer(cfg: &RunConfig) -> Box<dyn Optimizer<f64>> {
    let lr = cfg.model.learning_rate;
    match cfg.optimizer {
        OptimizerKind::Adam => Box::new(Adam::new(lr, cfg.beta1, cfg.beta2, cfg.adam_eps)),
        OptimizerKind::Sgd => Box::new(Sgd { lr }),
    }
}

/// Builds a model from the training corpus and trains it in memory.
///
/// `dev` selects the kept weights; without it the training set does.
pub fn train(cfg: &RunConfig, train: &Corpus, dev: Option<&Corpus>) -> CliResult<TrainOutcome> {
    if train.is_empty() {
        return Err(CliError::data("training corpus is empty"));
    }
    let mut model = Model::new(cfg.model.clone(), Vocab::from_corpus(train), train.pos_tagset.clone(), cfg.seed)?;
    let dev = dev.unwrap_or(train);
    check_tagset(&model, dev)?;

    let examples: Vec<(ModelInput<f64>, Vec<usize>)> = train
        .sentences
        .iter()
        .map(|s| Ok((model.prepare(s)?, model.gold_labels(s)?)))
        .collect::<synsem_core::Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut opt = optimizer(cfg);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rows = Vec::new();
    let mut best: Option<(f64, usize, synsem_core::ParamStore)> = None;

    for epoch in 1..=cfg.model.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (input, gold) = &examples[i];
            let (net, store) = model.parts_mut();
            store.zero_grad();
            let mut tape = Tape::new();
            let loss = net.loss(&mut tape, store, input, gold, Some(&mut rng))?;
            let value = tape.value(loss).data()[0];
            if !value.is_finite() {
                return Err(CliError::numeric(format!(
                    "non-finite loss {value} at training sentence {i} in epoch {epoch}"
                )));
            }
            tape.backward(loss, store)?;
            opt.step(store);
            total += value;
        }
        let counts = evaluate(&model, dev)?;
        let row = EpochRow {
            epoch,
            loss: total / examples.len() as f64,
            dev_cws_f1: counts.cws.score().f1,
            dev_joint_f1: counts.joint.score().f1,
        };
        if best.as_ref().is_none_or(|b| row.dev_joint_f1 > b.0) {
            best = Some((row.dev_joint_f1, epoch, model.store.clone()));
        }
        let done = cfg.target_dev_f1.is_some_and(|t| row.dev_joint_f1 >= t);
        rows.push(row);
        if done {
            break;
        }
    }

    let best_epoch = best.map(|(_, epoch, store)| {
        model.store = store;
        epoch
    });
    Ok(TrainOutcome {
        model,
        metrics: Metrics {
            config: cfg.clone(),
            epochs: rows,
            best_epoch,
            test: None,
        },
    })
}

/// Trains from the configured files, writing the checkpoint and metrics
/// when their paths are set.
pub fn cmd_train(cfg: &RunConfig) -> CliResult<TrainOutcome> {
    let train_path = cfg
        .train
        .as_deref()
        .ok_or_else(|| CliError::usage("config has no `train` path"))?;
    let train_corpus = load_corpus(train_path)?;
    let dev = cfg.dev.as_deref().map(load_corpus).transpose()?;
    let mut outcome = train(cfg, &train_corpus, dev.as_ref())?;
    if let Some(test_path) = &cfg.test {
        let test = load_corpus(test_path)?;
        check_tagset(&outcome.model, &test)?;
        let counts = evaluate(&outcome.model, &test)?;
        outcome.metrics.test = Some(TestScores {
            cws: counts.cws.into(),
            joint: counts.joint.into(),
        });
    }
    if let Some(path) = &cfg.checkpoint {
        outcome
            .model
            .save(path)
            .map_err(|e| CliError::from(e).context(path.display()))?;
    }
    if let Some(path) = &cfg.metrics {
        std::fs::write(path, serde_json::to_string_pretty(&outcome.metrics)?)
            .map_err(|e| CliError::from(e).context(path.display()))?;
    }
    Ok(outcome)
}

/// Scores a saved checkpoint on a JSONL corpus.
pub fn cmd_eval(checkpoint: &Path, data: &Path) -> CliResult<EvalReport> {
    let model = Model::load(checkpoint).map_err(|e| CliError::from(e).context(checkpoint.display()))?;
    let corpus = load_corpus(data)?;
    check_tagset(&model, &corpus)?;
    Ok(EvalReport::new(evaluate(&model, &corpus)?, &corpus))
}
