use serde::{Deserialize, Serialize};
use synsem_core::ingest::Corpus;
use synsem_core::model::{Fusion, ModelConfig};
use synsem_core::Model;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::train::{evaluate, train};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// Baseline, then dependency, constituent and role graphs added in turn.
    Components,
    /// Gating off/on crossed with sum/concat fusion.
    Fusion,
}

impl std::str::FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "components" => Ok(Grid::Components),
            "fusion" => Ok(Grid::Fusion),
            _ => Err(CliError::usage(format!("unknown grid {s:?}; expected components or fusion"))),
        }
    }
}

impl Grid {
    /// Row names and model configurations, in table order.
    pub fn rows(self, base: &ModelConfig) -> Vec<(String, ModelConfig)> {
        match self {
            Grid::Components => {
                let with = |dep, syn, sem| ModelConfig {
                    use_dep: dep,
                    use_syn: syn,
                    use_sem: sem,
                    ..base.clone()
                };
                vec![
                    ("baseline".into(), base.clone().baseline()),
                    ("+dep".into(), with(true, false, false)),
                    ("+dep+syn".into(), with(true, true, false)),
                    ("+dep+syn+sem".into(), with(true, true, true)),
                ]
            }
            Grid::Fusion => [(false, Fusion::Sum), (false, Fusion::Concat), (true, Fusion::Sum), (true, Fusion::Concat)]
                .into_iter()
                .map(|(gating, fusion)| {
                    let name = format!("gate {} / {fusion:?}", if gating { "on" } else { "off" }).to_lowercase();
                    let cfg = ModelConfig {
                        use_dep: true,
                        use_syn: true,
                        use_sem: true,
                        use_gating: gating,
                        fusion,
                        ..base.clone()
                    };
                    (name, cfg)
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub id: usize,
    pub name: String,
    pub use_dep: bool,
    pub use_syn: bool,
    pub use_sem: bool,
    pub use_gating: bool,
    pub fusion: Fusion,
    pub parameters: usize,
    /// Means over the repeats.
    pub cws_f1: f64,
    pub joint_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub grid: Grid,
    pub repeats: usize,
    /// Which corpus the F1 columns were computed on.
    pub evaluated_on: String,
    pub rows: Vec<AblationRow>,
}

pub struct AblationOutcome {
    pub table: AblationTable,
    /// One trained model per row, from the first repeat.
    pub models: Vec<Model>,
}

/// Trains every grid row `repeats` times with seeds `seed, seed + 1, ...`.
///
/// Scores come from `test`, else `dev`, else the training corpus.
pub fn ablate(
    cfg: &RunConfig,
    grid: Grid,
    repeats: usize,
    train_corpus: &Corpus,
    dev: Option<&Corpus>,
    test: Option<&Corpus>,
) -> CliResult<AblationOutcome> {
    if repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let (eval_name, eval_corpus) = match (test, dev) {
        (Some(t), _) => ("test", t),
        (None, Some(d)) => ("dev", d),
        (None, None) => ("train", train_corpus),
    };
    let mut rows = Vec::new();
    let mut models = Vec::new();
    for (id, (name, model_cfg)) in grid.rows(&cfg.model).into_iter().enumerate() {
        model_cfg.validate().map_err(|e| CliError::from(e).context(&name))?;
        let (mut cws, mut joint) = (0.0, 0.0);
        let mut parameters = 0;
        for r in 0..repeats {
            let run = RunConfig {
                model: model_cfg.clone(),
                seed: cfg.seed + r as u64,
                ..cfg.clone()
            };
            let outcome = train(&run, train_corpus, dev)?;
            crate::train::check_tagset(&outcome.model, eval_corpus)?;
            let counts = evaluate(&outcome.model, eval_corpus)?;
            cws += counts.cws.score().f1;
            joint += counts.joint.score().f1;
            parameters = outcome.model.num_parameters();
            if r == 0 {
                models.push(outcome.model);
            }
        }
        rows.push(AblationRow {
            id: id + 1,
            name,
            use_dep: model_cfg.use_dep,
            use_syn: model_cfg.use_syn,
            use_sem: model_cfg.use_sem,
            use_gating: model_cfg.use_gating,
            fusion: model_cfg.fusion,
            parameters,
            cws_f1: cws / repeats as f64,
            joint_f1: joint / repeats as f64,
        });
    }
    Ok(AblationOutcome {
        table: AblationTable {
            grid,
            repeats,
            evaluated_on: eval_name.into(),
            rows,
        },
        models,
    })
}

impl AblationTable {
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<3} {:<16} {:>10} {:>8} {:>8}\n",
            "ID", "row", "params", "CWS", "joint"
        );
        for r in &self.rows {
            out += &format!(
                "{:<3} {:<16} {:>10} {:>8.2} {:>8.2}\n",
                r.id,
                r.name,
                r.parameters,
                100.0 * r.cws_f1,
                100.0 * r.joint_f1
            );
        }
        out
    }
}
