use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Scalar, Tensor};

use super::{ModelConfig, SynSemGcn, Vocab};

const FORMAT: &str = "synsem-checkpoint/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedParam {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// On-disk model: everything needed to rebuild and run a [`SynSemGcn`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub format: String,
    pub config: ModelConfig,
    pub vocab: Vec<char>,
    pub pos_tagset: Vec<String>,
    pub params: Vec<SavedParam>,
}

impl<T: Scalar> SynSemGcn<T> {
    pub fn to_checkpoint(&self) -> CheckpointFile {
        CheckpointFile {
            format: FORMAT.to_string(),
            config: self.config().clone(),
            vocab: self.vocab.chars().to_vec(),
            pos_tagset: self.alphabet.pos_tagset().to_vec(),
            params: self
                .store
                .iter()
                .map(|p| SavedParam {
                    name: p.name.clone(),
                    shape: p.value.shape().to_vec(),
                    values: p.value.data().iter().map(|v| v.as_f64()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &CheckpointFile) -> Result<Self> {
        if ckpt.format != FORMAT {
            return Err(Error::Checkpoint(format!("unsupported format {:?}", ckpt.format)));
        }
        let vocab = Vocab::new(ckpt.vocab.iter().copied());
        if vocab.chars().len() != ckpt.vocab.len() {
            return Err(Error::Checkpoint("vocabulary contains duplicates".into()));
        }
        let mut model = Self::new(ckpt.config.clone(), vocab, ckpt.pos_tagset.clone(), 0)?;
        if model.store.len() != ckpt.params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameters, found {}",
                model.store.len(),
                ckpt.params.len()
            )));
        }
        let ids: Vec<_> = model.store.ids().collect();
        for (id, saved) in ids.into_iter().zip(&ckpt.params) {
            let p = model.store.get(id);
            if p.name != saved.name || p.value.shape() != saved.shape.as_slice() {
                return Err(Error::Checkpoint(format!(
                    "parameter {:?} {:?} does not match expected {:?} {:?}",
                    saved.name,
                    saved.shape,
                    p.name,
                    p.value.shape()
                )));
            }
            let value = Tensor::new(saved.shape.clone(), saved.values.iter().map(|&v| T::of(v)).collect())
                .map_err(|e| Error::Checkpoint(format!("parameter {:?}: {e}", saved.name)))?;
            model.store.set_value(id, value)?;
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ckpt: CheckpointFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_checkpoint(&ckpt)
    }
}
