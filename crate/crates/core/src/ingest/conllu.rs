use crate::error::{Error, Result};

use super::WordSentence;

/// The CoNLL-U columns this crate uses, per syntactic word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConlluSentence {
    pub words: Vec<String>,
    pub pos: Vec<String>,
    /// 0-based head word index; `None` for the root.
    pub heads: Vec<Option<usize>>,
    pub deprels: Vec<String>,
}

impl ConlluSentence {
    pub fn into_word_sentence(self) -> WordSentence {
        let mut ws = WordSentence::plain(self.words, self.pos);
        ws.heads = self.heads;
        ws
    }
}

struct Pending {
    sentence: ConlluSentence,
    raw_heads: Vec<(usize, usize)>,
}

impl Pending {
    fn new() -> Self {
        Pending {
            sentence: ConlluSentence::default(),
            raw_heads: Vec::new(),
        }
    }

    fn finish(mut self) -> Result<Option<ConlluSentence>> {
        let n = self.sentence.words.len();
        if n == 0 {
            return Ok(None);
        }
        for (head, line) in self.raw_heads {
            if head > n {
                return Err(Error::Parse {
                    line,
                    message: format!("HEAD {head} out of range for {n} words"),
                });
            }
            self.sentence.heads.push(head.checked_sub(1));
        }
        Ok(Some(self.sentence))
    }
}

/// Parses CoNLL-U text. Comment lines, multiword-token ranges (`1-2`) and
/// empty nodes (`1.1`) are skipped; `HEAD = 0` marks the root.
pub fn parse_conllu(text: &str) -> Result<Vec<ConlluSentence>> {
    let mut out = Vec::new();
    let mut cur = Pending::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            out.extend(std::mem::replace(&mut cur, Pending::new()).finish()?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let expected = cur.sentence.words.len() + 1;
        match id.parse::<usize>() {
            Ok(n) if n == expected => {}
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("ID {id:?} where {expected} was expected"),
                })
            }
        }
        let head: usize = cols[6].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("HEAD {:?} is not an integer", cols[6]),
        })?;
        let pos = if cols[3] == "_" { cols[4] } else { cols[3] };
        cur.sentence.words.push(cols[1].to_string());
        cur.sentence.pos.push(pos.to_string());
        cur.sentence.deprels.push(cols[7].to_string());
        cur.raw_heads.push((head, line_no));
    }
    out.extend(cur.finish()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_word_sentence() {
        let text = "1\t武汉市\t_\tNN\t_\t_\t2\tnmod\t_\t_\n2\t大桥\t_\tNN\t_\t_\t0\troot\t_\t_\n";
        let s = parse_conllu(text).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].words, vec!["武汉市", "大桥"]);
        assert_eq!(s[0].heads, vec![Some(1), None]);
    }

    #[test]
    fn empty_and_comment_only() {
        assert!(parse_conllu("").unwrap().is_empty());
        assert!(parse_conllu("# sent_id = 1\n# text = x\n\n").unwrap().is_empty());
    }

    #[test]
    fn multiword_and_empty_nodes_skipped() {
        let text = "# text = ab\n1-2\tab\t_\t_\t_\t_\t_\t_\t_\t_\n1\ta\ta\tNOUN\tNN\t_\t2\tnsubj\t_\t_\n1.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n2\tb\tb\tVERB\tVV\t_\t0\troot\t_\t_\n";
        let s = parse_conllu(text).unwrap();
        assert_eq!(s[0].words, vec!["a", "b"]);
        assert_eq!(s[0].pos, vec!["NOUN", "VERB"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let ragged = "1\ta\t_\tNN\t_\t_\t0\troot\t_\t_\n2\tb\tNN\n";
        assert!(matches!(parse_conllu(ragged), Err(Error::Parse { line: 2, .. })));
        let bad_head = "1\ta\t_\tNN\t_\t_\tx\troot\t_\t_\n";
        assert!(matches!(parse_conllu(bad_head), Err(Error::Parse { line: 1, .. })));
        let far = "1\ta\t_\tNN\t_\t_\t0\troot\t_\t_\n2\tb\t_\tNN\t_\t_\t5\tdep\t_\t_\n";
        assert!(matches!(parse_conllu(far), Err(Error::Parse { line: 2, .. })));
    }
}
