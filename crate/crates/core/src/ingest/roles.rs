use crate::error::{Error, Result};

/// Maps common role spellings onto the label inventory: the predicate (`V`)
/// becomes `ROOT`, `ARGn` becomes `An`, and `ARGM-`/`AM-` prefixes are dropped.
pub fn normalize_role(label: &str) -> String {
    if matches!(label, "V" | "rel" | "PRED") {
        return "ROOT".into();
    }
    let bare = label
        .strip_prefix("ARGM-")
        .or_else(|| label.strip_prefix("AM-"))
        .unwrap_or(label);
    match bare.strip_prefix("ARG") {
        Some(n) if n.len() == 1 && n.chars().all(|c| c.is_ascii_digit()) => format!("A{n}"),
        _ => bare.to_string(),
    }
}

/// Words of one sentence with the role of each.
pub type RoleBlock = (Vec<String>, Vec<Option<String>>);

/// Parses word-per-line role columns in star-bracket notation, one column per
/// predicate frame:
///
/// ```text
/// 他    (A0*)
/// 将    (ADV*)
/// 来    (V*)
/// ```
///
/// Sentences are separated by blank lines. A word inside an argument span
/// takes the span's role; when frames disagree, the leftmost frame wins.
/// Returns `(words, roles)` per sentence.
pub fn parse_role_columns(text: &str) -> Result<Vec<RoleBlock>> {
    let mut out = Vec::new();
    let mut words: Vec<String> = Vec::new();
    let mut roles: Vec<Option<String>> = Vec::new();
    let mut open: Vec<Option<String>> = Vec::new();
    let mut n_frames: Option<usize> = None;

    let mut flush = |words: &mut Vec<String>,
                     roles: &mut Vec<Option<String>>,
                     open: &mut Vec<Option<String>>,
                     n_frames: &mut Option<usize>,
                     line: usize|
     -> Result<()> {
        if let Some(label) = open.iter().flatten().next() {
            return Err(Error::Parse {
                line,
                message: format!("argument span {label:?} is never closed"),
            });
        }
        if !words.is_empty() {
            out.push((std::mem::take(words), std::mem::take(roles)));
        }
        open.clear();
        *n_frames = None;
        Ok(())
    };

    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let cols: Vec<&str> = raw.split_whitespace().collect();
        if cols.is_empty() {
            flush(&mut words, &mut roles, &mut open, &mut n_frames, line_no)?;
            continue;
        }
        if cols[0].starts_with('#') {
            continue;
        }
        let frames = cols.len() - 1;
        match n_frames {
            None => {
                n_frames = Some(frames);
                open = vec![None; frames];
            }
            Some(k) if k != frames => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("{frames} frame columns where {k} were expected"),
                })
            }
            _ => {}
        }
        let mut role = None;
        for (f, item) in cols[1..].iter().enumerate() {
            let mut rest = *item;
            if let Some(body) = rest.strip_prefix('(') {
                let star = body.find('*').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("malformed role item {item:?}"),
                })?;
                if open[f].is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("nested span {item:?}"),
                    });
                }
                open[f] = Some(normalize_role(&body[..star]));
                rest = &body[star..];
            }
            let closes = match rest {
                "*" => false,
                "*)" => true,
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("malformed role item {item:?}"),
                    })
                }
            };
            if role.is_none() {
                role = open[f].clone();
            }
            if closes {
                if open[f].is_none() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("{item:?} closes no span"),
                    });
                }
                open[f] = None;
            }
        }
        words.push(cols[0].to_string());
        roles.push(role);
    }
    flush(&mut words, &mut roles, &mut open, &mut n_frames, last_line)?;
    Ok(out)
}
