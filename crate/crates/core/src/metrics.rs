//! Joint BMES×POS labels and span-level F1.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    B,
    M,
    E,
    S,
}

impl Position {
    pub const ALL: [Position; 4] = [Position::B, Position::M, Position::E, Position::S];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Position::B => "B",
            Position::M => "M",
            Position::E => "E",
            Position::S => "S",
        }
    }
}

/// A BMES position crossed with a POS tag index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JointLabel {
    pub position: Position,
    pub tag: usize,
}

/// Bijection between joint labels and CRF label indices:
/// `index = 4 · tag + position`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointLabelAlphabet {
    pos_tagset: Vec<String>,
    tag_index: HashMap<String, usize>,
}

impl JointLabelAlphabet {
    pub fn new(pos_tagset: Vec<String>) -> Result<Self> {
        let mut tag_index = HashMap::new();
        for (i, t) in pos_tagset.iter().enumerate() {
            if tag_index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate POS tag {t:?}")));
            }
        }
        Ok(JointLabelAlphabet {
            pos_tagset,
            tag_index,
        })
    }

    pub fn len(&self) -> usize {
        4 * self.pos_tagset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos_tagset.is_empty()
    }

    pub fn pos_tagset(&self) -> &[String] {
        &self.pos_tagset
    }

    pub fn tag(&self, pos: &str) -> Option<usize> {
        self.tag_index.get(pos).copied()
    }

    pub fn index(&self, label: JointLabel) -> usize {
        4 * label.tag + label.position.index()
    }

    pub fn label(&self, index: usize) -> JointLabel {
        JointLabel {
            position: Position::ALL[index % 4],
            tag: index / 4,
        }
    }

    pub fn name(&self, label: JointLabel) -> String {
        format!("{}-{}", label.position.as_str(), self.pos_tagset[label.tag])
    }

    /// Gold label indices for a segmentation with POS strings.
    pub fn encode(&self, words: &[Span], pos: &[String]) -> Result<Vec<usize>> {
        let tags = pos
            .iter()
            .map(|p| {
                self.tag(p).ok_or_else(|| Error::UnknownLabel {
                    kind: "POS",
                    label: p.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(labels_from_segmentation(words, &tags)
            .into_iter()
            .map(|l| self.index(l))
            .collect())
    }

    /// Decoded `(span, POS)` words from label indices.
    pub fn decode(&self, indices: &[usize]) -> Vec<(Span, String)> {
        let labels: Vec<_> = indices.iter().map(|&i| self.label(i)).collect();
        spans_from_labels(&labels)
            .into_iter()
            .map(|(span, tag)| (span, self.pos_tagset[tag].clone()))
            .collect()
    }
}

/// Single-character words get `S`; longer words `B M… E`.
pub fn labels_from_segmentation(words: &[Span], tags: &[usize]) -> Vec<JointLabel> {
    let mut out = Vec::new();
    for (&(s, e), &tag) in words.iter().zip(tags) {
        let len = e - s;
        for k in 0..len {
            let position = match (len, k) {
                (1, _) => Position::S,
                (_, 0) => Position::B,
                (_, k) if k == len - 1 => Position::E,
                _ => Position::M,
            };
            out.push(JointLabel { position, tag });
        }
    }
    out
}

/// Inverse of [`labels_from_segmentation`], total on every label sequence.
///
/// Invalid sequences are repaired greedily: a `B` or `S` closes any open
/// word, an orphan `M` or `E` starts a word, and a word still open at the end
/// is closed there. A word's tag is the tag of its first character.
pub fn spans_from_labels(labels: &[JointLabel]) -> Vec<(Span, usize)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for (i, l) in labels.iter().enumerate() {
        match l.position {
            Position::B => {
                if let Some((s, tag)) = open.take() {
                    out.push(((s, i), tag));
                }
                open = Some((i, l.tag));
            }
            Position::M => {
                open.get_or_insert((i, l.tag));
            }
            Position::E => {
                let (s, tag) = open.take().unwrap_or((i, l.tag));
                out.push(((s, i + 1), tag));
            }
            Position::S => {
                if let Some((s, tag)) = open.take() {
                    out.push(((s, i), tag));
                }
                out.push(((i, i + 1), l.tag));
            }
        }
    }
    if let Some((s, tag)) = open {
        out.push(((s, labels.len()), tag));
    }
    out
}

/// Integer match counts; add them across sentences for micro-averaging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub gold: u64,
    pub predicted: u64,
    pub correct: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            gold: self.gold + o.gold,
            predicted: self.predicted + o.predicted,
            correct: self.correct + o.correct,
        }
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        iter.fold(Counts::default(), |a, b| a + b)
    }
}

impl Counts {
    /// Matches between two sets of items (duplicates within a side collapse).
    pub fn matching<X: Eq + Hash>(gold: &[X], pred: &[X]) -> Counts {
        let g: HashSet<&X> = gold.iter().collect();
        let p: HashSet<&X> = pred.iter().collect();
        Counts {
            gold: g.len() as u64,
            predicted: p.len() as u64,
            correct: p.intersection(&g).count() as u64,
        }
    }

    pub fn precision_exact(&self) -> Ratio<u64> {
        ratio_or_zero(self.correct, self.predicted)
    }

    pub fn recall_exact(&self) -> Ratio<u64> {
        ratio_or_zero(self.correct, self.gold)
    }

    /// `2PR/(P+R)`, which equals `2·correct/(gold+predicted)`.
    pub fn f1_exact(&self) -> Ratio<u64> {
        ratio_or_zero(2 * self.correct, self.gold + self.predicted)
    }

    pub fn score(&self) -> ScoredResult {
        let f = |r: Ratio<u64>| *r.numer() as f64 / *r.denom() as f64;
        ScoredResult {
            precision: f(self.precision_exact()),
            recall: f(self.recall_exact()),
            f1: f(self.f1_exact()),
            counts: *self,
        }
    }
}

fn ratio_or_zero(n: u64, d: u64) -> Ratio<u64> {
    if d == 0 || n == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(n, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
}

/// Segmentation F1: a predicted word is correct iff its span is in gold.
pub fn f1_cws(gold: &[Span], pred: &[Span]) -> ScoredResult {
    Counts::matching(gold, pred).score()
}

/// Joint F1: span and POS must both match.
pub fn f1_joint<P: Eq + Hash>(gold: &[(Span, P)], pred: &[(Span, P)]) -> ScoredResult {
    Counts::matching(gold, pred).score()
}

/// Corpus-level accumulator for both tasks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub cws: Counts,
    pub joint: Counts,
}

impl CorpusCounts {
    pub fn add_sentence(&mut self, gold: &[(Span, String)], pred: &[(Span, String)]) {
        let gs: Vec<Span> = gold.iter().map(|w| w.0).collect();
        let ps: Vec<Span> = pred.iter().map(|w| w.0).collect();
        self.cws += Counts::matching(&gs, &ps);
        self.joint += Counts::matching(gold, pred);
    }
}
