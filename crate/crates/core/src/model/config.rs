use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Relation;

/// How encoder and graph features are combined per character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    Concat,
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// Embedding lookup only.
    Embedding,
    /// Embedding followed by two width-3 residual convolutions.
    Contextual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub gcn_layer_dims: Vec<usize>,
    pub use_dep: bool,
    pub use_syn: bool,
    pub use_sem: bool,
    pub use_gating: bool,
    pub fusion: Fusion,
    pub encoder: EncoderKind,
    pub learning_rate: f64,
    pub dropout: f64,
    pub epochs: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ModelConfig {
    /// Small dimensions suited to CPU-only experiments.
    pub fn desk() -> Self {
        ModelConfig {
            embed_dim: 32,
            gcn_layer_dims: vec![16, 32],
            use_dep: true,
            use_syn: true,
            use_sem: true,
            use_gating: true,
            fusion: Fusion::Concat,
            encoder: EncoderKind::Contextual,
            learning_rate: 1e-2,
            dropout: 0.5,
            epochs: 30,
        }
    }

    /// The published hyper-parameters (768-dim transformer features).
    pub fn paper() -> Self {
        ModelConfig {
            embed_dim: 768,
            gcn_layer_dims: vec![128, 768],
            learning_rate: 2e-5,
            ..Self::desk()
        }
    }

    /// Encoder only, no graph module.
    pub fn baseline(mut self) -> Self {
        self.use_dep = false;
        self.use_syn = false;
        self.use_sem = false;
        self
    }

    pub fn gcn_enabled(&self) -> bool {
        self.use_dep || self.use_syn || self.use_sem
    }

    /// Relations with their own weights, in accumulation order.
    pub fn active_relations(&self) -> Vec<Relation> {
        let mut out = Vec::new();
        if self.use_dep {
            out.extend([Relation::DepIn, Relation::DepOut]);
        }
        if self.use_syn {
            out.push(Relation::Syn);
        }
        if self.use_sem {
            out.push(Relation::Sem);
        }
        out
    }

    /// Width of the fused per-character features fed to the CRF.
    pub fn fused_dim(&self) -> usize {
        match (self.gcn_enabled(), self.fusion) {
            (false, _) | (true, Fusion::Sum) => self.embed_dim,
            (true, Fusion::Concat) => self.embed_dim + self.gcn_layer_dims.last().copied().unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 {
            return Err(Error::Config("embed_dim must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.gcn_enabled() {
            if self.gcn_layer_dims.is_empty() || self.gcn_layer_dims.contains(&0) {
                return Err(Error::Config("GCN layer sizes must be positive".into()));
            }
            let last = *self.gcn_layer_dims.last().unwrap();
            if self.fusion == Fusion::Sum && last != self.embed_dim {
                return Err(Error::Config(format!(
                    "sum fusion needs the last GCN layer size ({last}) to equal the embedding size ({})",
                    self.embed_dim
                )));
            }
        }
        Ok(())
    }
}
