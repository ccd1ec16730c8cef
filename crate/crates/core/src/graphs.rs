//! Character-level relation graphs.
//!
//! Every graph of a sentence lives on the same node set: the `N` characters,
//! then the 12 constituent labels, then the 24 semantic-role labels. Label
//! nodes are shared by all words that carry the label and stay in the node
//! set (with only a self-loop) when unused.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AnnotatedSentence;
use crate::numcore::{Scalar, Tensor};
use crate::Span;

pub const SYN_LABELS: [&str; 12] = [
    "ADJP", "ADVP", "CLP", "DNP", "DP", "DVP", "LCP", "LST", "NP", "PP", "QP", "VP",
];

pub const SEM_LABELS: [&str; 24] = [
    "A0", "A1", "A2", "A3", "A4", "ADV", "BNF", "CND", "CRD", "DGR", "DIR", "DIS", "EXT", "FRQ",
    "LOC", "MNR", "PRP", "QTY", "TMP", "TPC", "PRD", "PSR", "PSE", "ROOT",
];

pub const NUM_LABEL_NODES: usize = SYN_LABELS.len() + SEM_LABELS.len();

pub fn syn_label_index(label: &str) -> Option<usize> {
    SYN_LABELS.iter().position(|&l| l == label)
}

pub fn sem_label_index(label: &str) -> Option<usize> {
    SEM_LABELS.iter().position(|&l| l == label)
}

/// Index space of a sentence's graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeSet {
    pub n_chars: usize,
}

impl NodeSet {
    pub fn new(n_chars: usize) -> Self {
        NodeSet { n_chars }
    }

    pub fn len(&self) -> usize {
        self.n_chars + NUM_LABEL_NODES
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn syn_node(&self, label: usize) -> usize {
        self.n_chars + label
    }

    pub fn sem_node(&self, label: usize) -> usize {
        self.n_chars + SYN_LABELS.len() + label
    }

    pub fn is_char(&self, node: usize) -> bool {
        node < self.n_chars
    }

    pub fn is_syn(&self, node: usize) -> bool {
        (self.n_chars..self.n_chars + SYN_LABELS.len()).contains(&node)
    }

    pub fn is_sem(&self, node: usize) -> bool {
        (self.n_chars + SYN_LABELS.len()..self.len()).contains(&node)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Dependent characters → head characters.
    DepIn,
    /// Head characters → dependent characters.
    DepOut,
    Syn,
    Sem,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::DepIn, Relation::DepOut, Relation::Syn, Relation::Sem];

    pub fn name(self) -> &'static str {
        match self {
            Relation::DepIn => "dep_in",
            Relation::DepOut => "dep_out",
            Relation::Syn => "syn",
            Relation::Sem => "sem",
        }
    }
}

/// One relation type over a sentence's node set.
///
/// An edge `(i, j)` sets `A[i][j] = 1`; a node aggregates over the nodes its
/// row points at.
#[derive(Clone, Debug)]
pub struct RelationGraph<T> {
    pub relation: Relation,
    pub nodes: NodeSet,
    pub edges: BTreeSet<(usize, usize)>,
    pub normalized_adjacency: Tensor<T>,
}

impl<T: Scalar> RelationGraph<T> {
    pub fn new(relation: Relation, nodes: NodeSet, edges: BTreeSet<(usize, usize)>) -> Result<Self> {
        let n = nodes.len();
        let mut adj = Tensor::zeros(&[n, n]);
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) outside {n} nodes")));
            }
            adj.set(i, j, T::one());
        }
        let normalized_adjacency = sym_normalize(&add_self_loops(&adj)?)?;
        Ok(RelationGraph {
            relation,
            nodes,
            edges,
            normalized_adjacency,
        })
    }
}

/// `A' = A + I`: forces the diagonal to one.
pub fn add_self_loops<T: Scalar>(adjacency: &Tensor<T>) -> Result<Tensor<T>> {
    let (r, c) = adjacency.dims2("add_self_loops")?;
    if r != c {
        return Err(Error::InvalidShape {
            shape: adjacency.shape().to_vec(),
            reason: "adjacency must be square".into(),
        });
    }
    let mut out = adjacency.clone();
    for i in 0..r {
        out.set(i, i, T::one());
    }
    Ok(out)
}

/// `D^{-1/2} A' D^{-1/2}` with `D` the diagonal of row sums.
pub fn sym_normalize<T: Scalar>(a_prime: &Tensor<T>) -> Result<Tensor<T>> {
    let (r, c) = a_prime.dims2("sym_normalize")?;
    if r != c {
        return Err(Error::InvalidShape {
            shape: a_prime.shape().to_vec(),
            reason: "adjacency must be square".into(),
        });
    }
    let mut inv_sqrt = Vec::with_capacity(r);
    for i in 0..r {
        let d: T = a_prime.row(i).iter().copied().sum();
        if !(d > T::zero()) {
            return Err(Error::ZeroDegree { node: i });
        }
        inv_sqrt.push(T::one() / d.sqrt());
    }
    let mut out = a_prime.clone();
    for i in 0..r {
        for j in 0..r {
            out.set(i, j, a_prime.get(i, j) * inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    Ok(out)
}

/// Checks that `spans` tile `[0, n_chars)` in order.
pub fn validate_spans(n_chars: usize, spans: &[Span]) -> Result<()> {
    let mut expected = 0;
    for (w, &(s, e)) in spans.iter().enumerate() {
        if s != expected {
            let kind = if s < expected { "overlaps" } else { "leaves a gap before" };
            return Err(Error::InvalidSpans(format!("word {w} ({s}, {e}) {kind} position {expected}")));
        }
        if e <= s {
            return Err(Error::InvalidSpans(format!("word {w} ({s}, {e}) is empty")));
        }
        expected = e;
    }
    if expected != n_chars {
        return Err(Error::InvalidSpans(format!(
            "spans cover {expected} of {n_chars} characters"
        )));
    }
    Ok(())
}

/// Builds the incoming and outgoing dependency graphs.
///
/// For a head word `h` with dependent `d`, every character of `h` gets an
/// outgoing edge to every character of `d`; the incoming graph holds the
/// reversed pairs. Root words (`None`) contribute nothing.
pub fn build_dependency_graphs<T: Scalar>(
    n_chars: usize,
    spans: &[Span],
    heads: &[Option<usize>],
) -> Result<(RelationGraph<T>, RelationGraph<T>)> {
    validate_spans(n_chars, spans)?;
    if heads.len() != spans.len() {
        return Err(Error::InvalidArgument(format!(
            "{} heads for {} words",
            heads.len(),
            spans.len()
        )));
    }
    let mut out_edges = BTreeSet::new();
    for (dep, head) in heads.iter().enumerate() {
        let Some(head) = *head else { continue };
        if head >= spans.len() || head == dep {
            return Err(Error::InvalidArgument(format!("word {dep} has invalid head {head}")));
        }
        let (hs, he) = spans[head];
        let (ds, de) = spans[dep];
        for h in hs..he {
            for d in ds..de {
                out_edges.insert((h, d));
            }
        }
    }
    let in_edges = out_edges.iter().map(|&(h, d)| (d, h)).collect();
    let nodes = NodeSet::new(n_chars);
    Ok((
        RelationGraph::new(Relation::DepIn, nodes, in_edges)?,
        RelationGraph::new(Relation::DepOut, nodes, out_edges)?,
    ))
}

fn build_label_graph<T: Scalar>(
    relation: Relation,
    n_chars: usize,
    spans: &[Span],
    labels: &[Option<String>],
) -> Result<RelationGraph<T>> {
    validate_spans(n_chars, spans)?;
    if labels.len() != spans.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} words",
            labels.len(),
            spans.len()
        )));
    }
    let nodes = NodeSet::new(n_chars);
    let mut edges = BTreeSet::new();
    for (&(s, e), label) in spans.iter().zip(labels) {
        let Some(label) = label else { continue };
        let node = match relation {
            Relation::Syn => syn_label_index(label).map(|i| nodes.syn_node(i)),
            _ => sem_label_index(label).map(|i| nodes.sem_node(i)),
        }
        .ok_or_else(|| Error::UnknownLabel {
            kind: relation.name(),
            label: label.clone(),
        })?;
        for c in s..e {
            edges.insert((c, node));
            edges.insert((node, c));
        }
    }
    RelationGraph::new(relation, nodes, edges)
}

/// Links every character of a word to the node of the word's first
/// in-set constituent ancestor.
pub fn build_constituent_graph<T: Scalar>(
    n_chars: usize,
    spans: &[Span],
    first_ancestor: &[Option<String>],
) -> Result<RelationGraph<T>> {
    build_label_graph(Relation::Syn, n_chars, spans, first_ancestor)
}

/// Links every character of a word to the node of the word's semantic role.
pub fn build_srl_graph<T: Scalar>(
    n_chars: usize,
    spans: &[Span],
    roles: &[Option<String>],
) -> Result<RelationGraph<T>> {
    build_label_graph(Relation::Sem, n_chars, spans, roles)
}

/// All four relation graphs of one sentence.
#[derive(Clone, Debug)]
pub struct SentenceGraphs<T> {
    pub dep_in: RelationGraph<T>,
    pub dep_out: RelationGraph<T>,
    pub syn: RelationGraph<T>,
    pub sem: RelationGraph<T>,
}

impl<T: Scalar> SentenceGraphs<T> {
    pub fn build(sentence: &AnnotatedSentence) -> Result<Self> {
        let n = sentence.chars.len();
        let (dep_in, dep_out) = build_dependency_graphs(n, &sentence.words, &sentence.heads)?;
        Ok(SentenceGraphs {
            dep_in,
            dep_out,
            syn: build_constituent_graph(n, &sentence.words, &sentence.syn)?,
            sem: build_srl_graph(n, &sentence.words, &sentence.sem)?,
        })
    }

    pub fn get(&self, relation: Relation) -> &RelationGraph<T> {
        match relation {
            Relation::DepIn => &self.dep_in,
            Relation::DepOut => &self.dep_out,
            Relation::Syn => &self.syn,
            Relation::Sem => &self.sem,
        }
    }

    pub fn nodes(&self) -> NodeSet {
        self.dep_in.nodes
    }
}
