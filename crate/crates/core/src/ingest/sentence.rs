use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{sem_label_index, syn_label_index, validate_spans};
use crate::Span;

/// One sentence at the character level with word-level annotations.
///
/// `heads[w]` is the index of word `w`'s head, `None` for the root. `syn[w]`
/// is the first in-set constituent ancestor of word `w`, `sem[w]` its
/// semantic role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub chars: Vec<char>,
    pub words: Vec<Span>,
    pub pos: Vec<String>,
    pub heads: Vec<Option<usize>>,
    pub syn: Vec<Option<String>>,
    pub sem: Vec<Option<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep_source: Option<String>,
}

impl AnnotatedSentence {
    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, w: usize) -> String {
        let (s, e) = self.words[w];
        self.chars[s..e].iter().collect()
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field, message: String| Error::InvalidSentence { field, message };
        if self.chars.is_empty() {
            return Err(invalid("chars", "sentence is empty".into()));
        }
        validate_spans(self.chars.len(), &self.words).map_err(|e| invalid("words", e.to_string()))?;
        let n = self.words.len();
        for (field, len) in [
            ("pos", self.pos.len()),
            ("heads", self.heads.len()),
            ("syn", self.syn.len()),
            ("sem", self.sem.len()),
        ] {
            if len != n {
                return Err(invalid(field, format!("{len} entries for {n} words")));
            }
        }
        for (w, h) in self.heads.iter().enumerate() {
            if let Some(h) = *h {
                if h >= n || h == w {
                    return Err(invalid("heads", format!("word {w} has invalid head {h}")));
                }
            }
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(h) = self.heads[cur] {
                cur = h;
                steps += 1;
                if steps > n {
                    return Err(invalid("heads", format!("cycle through word {start}")));
                }
            }
        }
        if let Some(l) = self.syn.iter().flatten().find(|l| syn_label_index(l).is_none()) {
            return Err(invalid("syn", format!("unknown constituent label {l:?}")));
        }
        if let Some(l) = self.sem.iter().flatten().find(|l| sem_label_index(l).is_none()) {
            return Err(invalid("sem", format!("unknown semantic role {l:?}")));
        }
        Ok(())
    }
}

/// Word-level form produced by the toolkit readers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordSentence {
    pub words: Vec<String>,
    pub pos: Vec<String>,
    pub heads: Vec<Option<usize>>,
    pub syn: Vec<Option<String>>,
    pub sem: Vec<Option<String>>,
    pub dep_source: Option<String>,
}

impl WordSentence {
    /// Words and tags only; every structural annotation left empty.
    pub fn plain(words: Vec<String>, pos: Vec<String>) -> Self {
        let n = words.len();
        WordSentence {
            words,
            pos,
            heads: vec![None; n],
            syn: vec![None; n],
            sem: vec![None; n],
            dep_source: None,
        }
    }
}

/// Character spans from cumulative word lengths; annotations pass through.
pub fn to_char_level(sentence: &WordSentence) -> Result<AnnotatedSentence> {
    let mut chars = Vec::new();
    let mut words = Vec::with_capacity(sentence.words.len());
    for w in &sentence.words {
        let start = chars.len();
        chars.extend(w.chars());
        words.push((start, chars.len()));
    }
    let out = AnnotatedSentence {
        chars,
        words,
        pos: sentence.pos.clone(),
        heads: sentence.heads.clone(),
        syn: sentence.syn.clone(),
        sem: sentence.sem.clone(),
        dep_source: sentence.dep_source.clone(),
    };
    out.validate()?;
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<AnnotatedSentence>,
    /// Unique POS tags in order of first appearance.
    pub pos_tagset: Vec<String>,
}

impl Corpus {
    pub fn new(sentences: Vec<AnnotatedSentence>) -> Self {
        let mut pos_tagset: Vec<String> = Vec::new();
        for tag in sentences.iter().flat_map(|s| &s.pos) {
            if !pos_tagset.contains(tag) {
                pos_tagset.push(tag.clone());
            }
        }
        Corpus {
            sentences,
            pos_tagset,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn num_words(&self) -> usize {
        self.sentences.iter().map(|s| s.words.len()).sum()
    }

    pub fn num_chars(&self) -> usize {
        self.sentences.iter().map(|s| s.chars.len()).sum()
    }
}
