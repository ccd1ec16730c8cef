//! Flat `key = value` run configuration.
//!
//! Keys naming published hyper-parameters are spelled exactly as in the
//! hyper-parameter table (`Word embedding size`, `1st GCN layer size`, ...);
//! the rest are snake_case. `#` starts a comment. Relative paths are resolved
//! against the config file's directory.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synsem_core::model::{EncoderKind, Fusion, ModelConfig};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub seed: u64,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Stop once the dev joint F1 reaches this value.
    pub target_dev_f1: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::desk(),
            seed: 42,
            train: None,
            dev: None,
            test: None,
            checkpoint: None,
            metrics: None,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            target_dev_f1: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("line {line}: {key:?} expects a number, got {value:?}")))
}

fn parse_bool(key: &str, value: &str, line: usize) -> CliResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(CliError::usage(format!("line {line}: {key:?} expects true or false, got {value:?}"))),
    }
}

fn set_layer(cfg: &mut ModelConfig, index: usize, size: usize) {
    if cfg.gcn_layer_dims.len() <= index {
        cfg.gcn_layer_dims.resize(index + 1, size);
    }
    cfg.gcn_layer_dims[index] = size;
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: Option<&Path>) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        let path = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            }
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::usage(format!("line {line}: expected `key = value`")))?;
            if !seen.insert(key.to_string()) {
                return Err(CliError::usage(format!("line {line}: duplicate key {key:?}")));
            }
            let m = &mut cfg.model;
            match key {
                "Word embedding size" => m.embed_dim = parse_num(key, value, line)?,
                "1st GCN layer size" => set_layer(m, 0, parse_num(key, value, line)?),
                "2nd GCN layer size" => set_layer(m, 1, parse_num(key, value, line)?),
                "GCN learning rate" => m.learning_rate = parse_num(key, value, line)?,
                "GCN dropout" => m.dropout = parse_num(key, value, line)?,
                "Epochs" => m.epochs = parse_num(key, value, line)?,
                "σ" => {
                    if !value.eq_ignore_ascii_case("relu") {
                        return Err(CliError::usage(format!("line {line}: only Relu is supported for σ")));
                    }
                }
                "use_dep" => m.use_dep = parse_bool(key, value, line)?,
                "use_syn" => m.use_syn = parse_bool(key, value, line)?,
                "use_sem" => m.use_sem = parse_bool(key, value, line)?,
                "use_gating" => m.use_gating = parse_bool(key, value, line)?,
                "fusion" => {
                    m.fusion = match value {
                        "concat" => Fusion::Concat,
                        "sum" => Fusion::Sum,
                        _ => return Err(CliError::usage(format!("line {line}: fusion must be concat or sum"))),
                    }
                }
                "encoder" => {
                    m.encoder = match value {
                        "contextual" => EncoderKind::Contextual,
                        "embedding" => EncoderKind::Embedding,
                        _ => {
                            return Err(CliError::usage(format!(
                                "line {line}: encoder must be contextual or embedding"
                            )))
                        }
                    }
                }
                "seed" => cfg.seed = parse_num(key, value, line)?,
                "train" => cfg.train = Some(path(value)),
                "dev" => cfg.dev = Some(path(value)),
                "test" => cfg.test = Some(path(value)),
                "checkpoint" => cfg.checkpoint = Some(path(value)),
                "metrics" => cfg.metrics = Some(path(value)),
                "optimizer" => {
                    cfg.optimizer = match value {
                        "adam" => OptimizerKind::Adam,
                        "sgd" => OptimizerKind::Sgd,
                        _ => return Err(CliError::usage(format!("line {line}: optimizer must be adam or sgd"))),
                    }
                }
                "beta1" => cfg.beta1 = parse_num(key, value, line)?,
                "beta2" => cfg.beta2 = parse_num(key, value, line)?,
                "adam_eps" => cfg.adam_eps = parse_num(key, value, line)?,
                "target_dev_f1" => cfg.target_dev_f1 = Some(parse_num(key, value, line)?),
                _ => return Err(CliError::usage(format!("line {line}: unknown key {key:?}"))),
            }
        }
        cfg.model.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent()).map_err(|e| e.context(path.display()))
    }

    /// Serializes back to the `key = value` format.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("Word embedding size", m.embed_dim.to_string());
        kv("σ", "Relu".into());
        for (i, d) in m.gcn_layer_dims.iter().enumerate().take(2) {
            kv(if i == 0 { "1st GCN layer size" } else { "2nd GCN layer size" }, d.to_string());
        }
        kv("GCN learning rate", m.learning_rate.to_string());
        kv("GCN dropout", m.dropout.to_string());
        kv("Epochs", m.epochs.to_string());
        kv("use_dep", m.use_dep.to_string());
        kv("use_syn", m.use_syn.to_string());
        kv("use_sem", m.use_sem.to_string());
        kv("use_gating", m.use_gating.to_string());
        kv("fusion", if m.fusion == Fusion::Concat { "concat" } else { "sum" }.into());
        kv("encoder", if m.encoder == EncoderKind::Contextual { "contextual" } else { "embedding" }.into());
        kv("seed", self.seed.to_string());
        kv("optimizer", if self.optimizer == OptimizerKind::Adam { "adam" } else { "sgd" }.into());
        kv("beta1", self.beta1.to_string());
        kv("beta2", self.beta2.to_string());
        kv("adam_eps", self.adam_eps.to_string());
        for (k, p) in [
            ("train", &self.train),
            ("dev", &self.dev),
            ("test", &self.test),
            ("checkpoint", &self.checkpoint),
            ("metrics", &self.metrics),
        ] {
            if let Some(p) = p {
                kv(k, p.display().to_string());
            }
        }
        if let Some(t) = self.target_dev_f1 {
            kv("target_dev_f1", t.to_string());
        }
        out
    }
}
