//! Encoder, gated multi-relation GCN, feature fusion and the CRF head.

mod checkpoint;
mod config;
mod layers;

use std::collections::HashMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crf::{self, CrfParams};
use crate::error::{Error, Result};
use crate::graphs::{Relation, SentenceGraphs, NUM_LABEL_NODES};
use crate::ingest::{AnnotatedSentence, Corpus};
use crate::metrics::JointLabelAlphabet;
use crate::numcore::{ParamId, ParamStore, Scalar, Tape, Tensor, Var};
use crate::Span;

pub use checkpoint::{CheckpointFile, SavedParam};
pub use config::{EncoderKind, Fusion, ModelConfig};
pub use layers::{fuse, gate, gcn_layer, init_node_states, RelationTerm};

/// Character vocabulary; id 0 is reserved for unknown characters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl Vocab {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Self {
        let mut v = Vocab::default();
        for c in chars {
            if !v.index.contains_key(&c) {
                v.chars.push(c);
                v.index.insert(c, v.chars.len());
            }
        }
        v
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::new(corpus.sentences.iter().flat_map(|s| s.chars.iter().copied()))
    }

    /// Number of embedding rows, including the unknown row.
    pub fn len(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, c: char) -> usize {
        self.index.get(&c).copied().unwrap_or(0)
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}

#[derive(Clone, Debug)]
struct ConvParams {
    prev: ParamId,
    center: ParamId,
    next: ParamId,
    bias: ParamId,
}

#[derive(Clone, Debug)]
struct Encoder {
    embedding: ParamId,
    convs: Vec<ConvParams>,
}

#[derive(Clone, Debug)]
struct RelationParams {
    relation: Relation,
    weight: ParamId,
    gate: Option<(ParamId, ParamId)>,
}

/// Parameter layout of a model; values live in a separate [`ParamStore`] so
/// that the store can be perturbed or optimized while the layout is borrowed.
#[derive(Clone, Debug)]
pub struct Network {
    config: ModelConfig,
    encoder: Encoder,
    label_table: Option<ParamId>,
    layers: Vec<Vec<RelationParams>>,
    crf: CrfParams,
}

/// Per-sentence inputs: character ids and the sentence's relation graphs.
#[derive(Clone, Debug)]
pub struct ModelInput<T> {
    pub char_ids: Vec<usize>,
    pub graphs: Option<SentenceGraphs<T>>,
}

fn uniform<T: Scalar>(rng: &mut impl Rng, shape: &[usize], bound: f64) -> Tensor<T> {
    let n = shape.iter().product();
    let data = (0..n).map(|_| T::of(rng.gen_range(-bound..=bound))).collect();
    Tensor::new(shape.to_vec(), data).expect("positive shape")
}

fn xavier<T: Scalar>(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor<T> {
    uniform(rng, &[rows, cols], (6.0 / (rows + cols) as f64).sqrt())
}

impl Network {
    fn new<T: Scalar>(
        config: &ModelConfig,
        vocab_len: usize,
        num_labels: usize,
        store: &mut ParamStore<T>,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.embed_dim;
        let embed_bound = (3.0 / d as f64).sqrt();
        let embedding = store.add("encoder.embedding", uniform(rng, &[vocab_len, d], embed_bound));
        let conv_layers = match config.encoder {
            EncoderKind::Embedding => 0,
            EncoderKind::Contextual => 2,
        };
        let convs = (0..conv_layers)
            .map(|k| ConvParams {
                prev: store.add(format!("encoder.conv{k}.prev"), xavier(rng, d, d)),
                center: store.add(format!("encoder.conv{k}.center"), xavier(rng, d, d)),
                next: store.add(format!("encoder.conv{k}.next"), xavier(rng, d, d)),
                bias: store.add(format!("encoder.conv{k}.bias"), Tensor::zeros(&[1, d])),
            })
            .collect();

        let mut label_table = None;
        let mut layers = Vec::new();
        if config.gcn_enabled() {
            label_table = Some(store.add("labels.embedding", uniform(rng, &[NUM_LABEL_NODES, d], embed_bound)));
            let mut d_in = d;
            for (l, &d_out) in config.gcn_layer_dims.iter().enumerate() {
                let layer = config
                    .active_relations()
                    .into_iter()
                    .map(|relation| {
                        let prefix = format!("gcn.{l}.{}", relation.name());
                        let weight = store.add(format!("{prefix}.weight"), xavier(rng, d_in, d_out));
                        let gate = config.use_gating.then(|| {
                            (
                                store.add(format!("{prefix}.gate_weight"), xavier(rng, d_in, 1)),
                                store.add(format!("{prefix}.gate_bias"), Tensor::zeros(&[1, 1])),
                            )
                        });
                        RelationParams { relation, weight, gate }
                    })
                    .collect();
                layers.push(layer);
                d_in = d_out;
            }
        }
        let crf = CrfParams::new(store, config.fused_dim(), num_labels, rng);
        Ok(Network {
            config: config.clone(),
            encoder: Encoder { embedding, convs },
            label_table,
            layers,
            crf,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn crf(&self) -> &CrfParams {
        &self.crf
    }

    /// Character features `E` (`N×d`).
    pub fn encode<T: Scalar>(&self, tape: &mut Tape<T>, store: &ParamStore<T>, char_ids: &[usize]) -> Result<Var> {
        if char_ids.is_empty() {
            return Err(Error::InvalidArgument("cannot encode an empty sentence".into()));
        }
        let table = tape.param(store, self.encoder.embedding);
        let mut e = tape.gather_rows(table, char_ids)?;
        if self.encoder.convs.is_empty() {
            return Ok(e);
        }
        let n = char_ids.len();
        let prev_shift = tape.constant(layers::shift_matrix(n, -1));
        let next_shift = tape.constant(layers::shift_matrix(n, 1));
        let ones = tape.constant(Tensor::ones(&[n, 1]));
        for conv in &self.encoder.convs {
            let w_prev = tape.param(store, conv.prev);
            let w_center = tape.param(store, conv.center);
            let w_next = tape.param(store, conv.next);
            let bias = tape.param(store, conv.bias);

            let left = tape.matmul(prev_shift, e)?;
            let left = tape.matmul(left, w_prev)?;
            let mid = tape.matmul(e, w_center)?;
            let right = tape.matmul(next_shift, e)?;
            let right = tape.matmul(right, w_next)?;
            let b = tape.matmul(ones, bias)?;
            let pre = tape.add(left, mid)?;
            let pre = tape.add(pre, right)?;
            let pre = tape.add(pre, b)?;
            let act = tape.relu(pre)?;
            e = tape.add(e, act)?;
        }
        Ok(e)
    }

    /// Fused features `V` (`N×d_v`). Dropout on GCN hidden states is applied
    /// only when `dropout_rng` is given.
    pub fn forward<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        input: &ModelInput<T>,
        mut dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<Var> {
        let e = self.encode(tape, store, &input.char_ids)?;
        let Some(label_table) = self.label_table else {
            return Ok(e);
        };
        let graphs = input
            .graphs
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("graph model needs sentence graphs".into()))?;
        if graphs.nodes().n_chars != input.char_ids.len() {
            return Err(Error::InvalidArgument(format!(
                "graphs built for {} characters, sentence has {}",
                graphs.nodes().n_chars,
                input.char_ids.len()
            )));
        }
        let labels = tape.param(store, label_table);
        let mut h = init_node_states(tape, e, labels)?;
        let adjacency: HashMap<Relation, Var> = self.config
            .active_relations()
            .into_iter()
            .map(|r| (r, tape.constant(graphs.get(r).normalized_adjacency.clone())))
            .collect();
        for layer in &self.layers {
            let terms: Vec<RelationTerm> = layer
                .iter()
                .map(|rp| RelationTerm {
                    adjacency: adjacency[&rp.relation],
                    weight: tape.param(store, rp.weight),
                    gate: rp.gate.map(|(w, b)| (tape.param(store, w), tape.param(store, b))),
                })
                .collect();
            h = gcn_layer(tape, h, &terms)?;
            if let Some(rng) = dropout_rng.as_deref_mut() {
                h = self.dropout(tape, h, rng)?;
            }
        }
        fuse(tape, e, h, self.config.fusion)
    }

    fn dropout<T: Scalar>(&self, tape: &mut Tape<T>, h: Var, rng: &mut dyn RngCore) -> Result<Var> {
        let p = self.config.dropout;
        if p == 0.0 {
            return Ok(h);
        }
        let keep = T::of(1.0 / (1.0 - p));
        let shape = tape.value(h).shape().to_vec();
        let n = shape.iter().product();
        let mask = (0..n)
            .map(|_| if rng.gen::<f64>() < p { T::zero() } else { keep })
            .collect();
        let mask = tape.constant(Tensor::new(shape, mask)?);
        tape.mul(h, mask)
    }

    pub fn emissions<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        input: &ModelInput<T>,
        dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<Var> {
        let v = self.forward(tape, store, input, dropout_rng)?;
        self.crf.emissions(tape, store, v)
    }

    /// CRF negative log-likelihood of `gold` label indices.
    pub fn loss<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        input: &ModelInput<T>,
        gold: &[usize],
        dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<Var> {
        let em = self.emissions(tape, store, input, dropout_rng)?;
        let vars = self.crf.vars(tape, store);
        crf::nll(tape, em, gold, &vars)
    }

    /// Viterbi label indices.
    pub fn decode<T: Scalar>(&self, store: &ParamStore<T>, input: &ModelInput<T>) -> Result<Vec<usize>> {
        let mut tape = Tape::new();
        let em = self.emissions(&mut tape, store, input, None)?;
        let (path, _) = crf::viterbi(tape.value(em), &self.crf.scores(store))?;
        Ok(path)
    }
}

/// A complete model: configuration, vocabularies, layout and parameter values.
#[derive(Clone, Debug)]
pub struct SynSemGcn<T> {
    pub vocab: Vocab,
    pub alphabet: JointLabelAlphabet,
    pub network: Network,
    pub store: ParamStore<T>,
}

impl<T: Scalar> SynSemGcn<T> {
    pub fn new(config: ModelConfig, vocab: Vocab, pos_tagset: Vec<String>, seed: u64) -> Result<Self> {
        let alphabet = JointLabelAlphabet::new(pos_tagset)?;
        if alphabet.is_empty() {
            return Err(Error::InvalidArgument("POS tagset is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let network = Network::new(&config, vocab.len(), alphabet.len(), &mut store, &mut rng)?;
        Ok(SynSemGcn {
            vocab,
            alphabet,
            network,
            store,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.network.config
    }

    pub fn num_parameters(&self) -> usize {
        self.store.num_scalars()
    }

    /// Character ids plus graphs (only when the graph module is enabled).
    pub fn prepare(&self, sentence: &AnnotatedSentence) -> Result<ModelInput<T>> {
        let char_ids = sentence.chars.iter().map(|&c| self.vocab.id(c)).collect();
        let graphs = if self.config().gcn_enabled() {
            Some(SentenceGraphs::build(sentence)?)
        } else {
            None
        };
        Ok(ModelInput { char_ids, graphs })
    }

    /// Gold joint-label indices of a sentence.
    pub fn gold_labels(&self, sentence: &AnnotatedSentence) -> Result<Vec<usize>> {
        self.alphabet.encode(&sentence.words, &sentence.pos)
    }

    pub fn forward(&self, tape: &mut Tape<T>, input: &ModelInput<T>) -> Result<Var> {
        self.network.forward(tape, &self.store, input, None)
    }

    pub fn decode(&self, input: &ModelInput<T>) -> Result<Vec<usize>> {
        self.network.decode(&self.store, input)
    }

    /// Predicted words with POS tags.
    pub fn predict(&self, sentence: &AnnotatedSentence) -> Result<Vec<(Span, String)>> {
        let input = self.prepare(sentence)?;
        Ok(self.alphabet.decode(&self.decode(&input)?))
    }

    /// Splits the layout from the mutable parameter values.
    pub fn parts_mut(&mut self) -> (&Network, &mut ParamStore<T>) {
        (&self.network, &mut self.store)
    }
}
