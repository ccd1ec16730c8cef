use std::fmt::Write as _;

use serde::Serialize;
use synsem_core::ingest::AnnotatedSentence;
use synsem_core::{Model, SentenceGraphs, Span};

use crate::error::CliResult;

/// Side-by-side predictions of two models on one sentence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub text: String,
    pub gold: Vec<String>,
    pub baseline: Vec<String>,
    pub graph: Vec<String>,
    /// Word-level arcs as `(head, dependent)`.
    pub word_arcs: Vec<(String, String)>,
    /// Character-level outgoing dependency edges as `(head char, dependent char)`.
    pub char_edges: Vec<(char, char)>,
}

fn tagged(s: &AnnotatedSentence, words: &[(Span, String)]) -> Vec<String> {
    words
        .iter()
        .map(|&((a, b), ref pos)| format!("{}/{pos}", s.chars[a..b].iter().collect::<String>()))
        .collect()
}

pub fn demo(baseline: &Model, graph: &Model, sentence: &AnnotatedSentence) -> CliResult<DemoReport> {
    sentence.validate()?;
    let gold: Vec<_> = sentence.words.iter().copied().zip(sentence.pos.iter().cloned()).collect();
    let graphs: SentenceGraphs = SentenceGraphs::build(sentence)?;
    let word_arcs = sentence
        .heads
        .iter()
        .enumerate()
        .filter_map(|(d, h)| h.map(|h| (sentence.word(h), sentence.word(d))))
        .collect();
    let char_edges = graphs
        .dep_out
        .edges
        .iter()
        .map(|&(h, d)| (sentence.chars[h], sentence.chars[d]))
        .collect();
    Ok(DemoReport {
        text: sentence.text(),
        gold: tagged(sentence, &gold),
        baseline: tagged(sentence, &baseline.predict(sentence)?),
        graph: tagged(sentence, &graph.predict(sentence)?),
        word_arcs,
        char_edges,
    })
}

impl DemoReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "sentence  {}", self.text).unwrap();
        writeln!(out, "gold      {}", self.gold.join(" ")).unwrap();
        writeln!(out, "baseline  {}", self.baseline.join(" ")).unwrap();
        writeln!(out, "graph     {}", self.graph.join(" ")).unwrap();
        writeln!(out, "dependency arcs (head -> dependent)").unwrap();
        if self.word_arcs.is_empty() {
            writeln!(out, "  none; graphs hold self-loops only").unwrap();
        }
        for (h, d) in &self.word_arcs {
            writeln!(out, "  {h} -> {d}").unwrap();
        }
        let edges: Vec<String> = self.char_edges.iter().map(|(h, d)| format!("{h}->{d}")).collect();
        writeln!(out, "character edges  {}", edges.join(" ")).unwrap();
        out
    }
}
