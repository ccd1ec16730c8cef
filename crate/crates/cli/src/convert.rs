use std::path::Path;

use serde::Serialize;
use synsem_core::ingest::{
    first_ancestor_labels, parse_bracket_trees, parse_conllu, parse_role_columns, to_char_level, Corpus, WordSentence,
};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Conllu,
    Bracket,
}

impl std::str::FromStr for InputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "conllu" => Ok(InputFormat::Conllu),
            "bracket" => Ok(InputFormat::Bracket),
            _ => Err(CliError::usage(format!("unknown format {s:?}; expected conllu or bracket"))),
        }
    }
}

/// Sentence, word and tagset counts of a converted corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub sentences: usize,
    pub words: usize,
    pub chars: usize,
    pub tags: usize,
}

impl Summary {
    pub fn of(corpus: &Corpus) -> Self {
        Summary {
            sentences: corpus.len(),
            words: corpus.num_words(),
            chars: corpus.num_chars(),
            tags: corpus.pos_tagset.len(),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))
}

fn mismatch(what: &str, i: usize, ours: &[String], theirs: &[String]) -> CliError {
    CliError::data(format!(
        "{what} sentence {} has words {theirs:?} but the primary input has {ours:?}",
        i + 1
    ))
}

fn from_trees(text: &str) -> CliResult<Vec<WordSentence>> {
    parse_bracket_trees(text)?
        .iter()
        .map(|tree| {
            let (words, pos): (Vec<_>, Vec<_>) = tree.tagged_leaves().into_iter().unzip();
            if let Some(w) = pos.iter().position(String::is_empty) {
                return Err(CliError::data(format!("word {:?} has no part-of-speech preterminal", words[w])));
            }
            let mut ws = WordSentence::plain(words, pos);
            ws.syn = first_ancestor_labels(tree);
            Ok(ws)
        })
        .collect()
}

/// Reads word-level sentences from `input`, optionally merging constituent
/// labels from bracketed `trees` and roles from `roles` columns.
pub fn convert(format: InputFormat, input: &Path, trees: Option<&Path>, roles: Option<&Path>) -> CliResult<Corpus> {
    let text = read(input)?;
    let mut sentences = match format {
        InputFormat::Conllu => parse_conllu(&text)
            .map_err(|e| CliError::from(e).context(input.display()))?
            .into_iter()
            .map(|s| {
                let mut ws = s.into_word_sentence();
                ws.dep_source = Some("conllu".into());
                ws
            })
            .collect(),
        InputFormat::Bracket => from_trees(&text).map_err(|e| e.context(input.display()))?,
    };

    if let Some(path) = trees {
        let parsed = from_trees(&read(path)?).map_err(|e| e.context(path.display()))?;
        if parsed.len() != sentences.len() {
            return Err(CliError::data(format!(
                "{}: {} trees for {} sentences",
                path.display(),
                parsed.len(),
                sentences.len()
            )));
        }
        for (i, (ws, t)) in sentences.iter_mut().zip(parsed).enumerate() {
            if t.words != ws.words {
                return Err(mismatch("tree", i, &ws.words, &t.words).context(path.display()));
            }
            ws.syn = t.syn;
        }
    }

    if let Some(path) = roles {
        let parsed = parse_role_columns(&read(path)?).map_err(|e| CliError::from(e).context(path.display()))?;
        if parsed.len() != sentences.len() {
            return Err(CliError::data(format!(
                "{}: {} role blocks for {} sentences",
                path.display(),
                parsed.len(),
                sentences.len()
            )));
        }
        for (i, (ws, (words, sem))) in sentences.iter_mut().zip(parsed).enumerate() {
            if words != ws.words {
                return Err(mismatch("role", i, &ws.words, &words).context(path.display()));
            }
            ws.sem = sem;
        }
    }

    let annotated = sentences
        .iter()
        .enumerate()
        .map(|(i, ws)| to_char_level(ws).map_err(|e| CliError::from(e).context(format!("sentence {}", i + 1))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Corpus::new(annotated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_input_takes_tags_from_preterminals() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.txt");
        std::fs::write(&p, "(IP (NP (PN 他)) (VP (VV 来)))\n(NP (NN 书))").unwrap();
        let c = convert(InputFormat::Bracket, &p, None, None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.sentences[0].pos, ["PN", "VV"]);
        assert_eq!(c.sentences[0].syn, [Some("NP".into()), Some("VP".into())]);
        assert_eq!(Summary::of(&c).tags, 3);

        std::fs::write(&p, "(IP 他 (VP (VV 来)))").unwrap();
        let e = convert(InputFormat::Bracket, &p, None, None).unwrap_err();
        assert!(e.message.contains("preterminal"), "{e}");
    }
}
