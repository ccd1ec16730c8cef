use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::{AnnotatedSentence, Corpus};

const REQUIRED: [&str; 6] = ["chars", "words", "pos", "heads", "syn", "sem"];

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, line: usize, name: &str) -> Result<T> {
    let value = obj.get(name).ok_or_else(|| Error::Schema {
        line,
        field: name.into(),
        message: "missing".into(),
    })?;
    serde_json::from_value(value.clone()).map_err(|e| Error::Schema {
        line,
        field: name.into(),
        message: e.to_string(),
    })
}

fn parse_line(text: &str, line: usize) -> Result<AnnotatedSentence> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema {
        line,
        field: String::new(),
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(Error::Schema {
            line,
            field: String::new(),
            message: "expected a JSON object".into(),
        });
    };
    if let Some(missing) = REQUIRED.iter().find(|f| !obj.contains_key(**f)) {
        return Err(Error::Schema {
            line,
            field: missing.to_string(),
            message: "missing".into(),
        });
    }
    let sentence = AnnotatedSentence {
        chars: field(&obj, line, "chars")?,
        words: field(&obj, line, "words")?,
        pos: field(&obj, line, "pos")?,
        heads: field(&obj, line, "heads")?,
        syn: field(&obj, line, "syn")?,
        sem: field(&obj, line, "sem")?,
        dep_source: match obj.get("dep_source") {
            None | Some(Value::Null) => None,
            Some(_) => Some(field(&obj, line, "dep_source")?),
        },
    };
    sentence.validate().map_err(|e| match e {
        Error::InvalidSentence { field, message } => Error::Schema {
            line,
            field: field.into(),
            message,
        },
        other => other,
    })?;
    Ok(sentence)
}

/// Parses one sentence per non-blank line. Line numbers in errors are 1-based.
pub fn corpus_from_jsonl(text: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        sentences.push(parse_line(line, i + 1)?);
    }
    Ok(Corpus::new(sentences))
}

/// Canonical serialization: fixed field order, one compact object per line.
pub fn corpus_to_jsonl(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for s in &corpus.sentences {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
    corpus_from_jsonl(&fs::read_to_string(path)?)
}

pub fn write_jsonl(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    fs::write(path, corpus_to_jsonl(corpus)?)?;
    Ok(())
}
