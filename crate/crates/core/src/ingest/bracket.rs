use crate::error::{Error, Result};
use crate::graphs::syn_label_index;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    Phrase { label: String, children: Vec<TreeNode> },
    Word(String),
}

/// A rooted constituency tree whose leaves are the sentence's words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstituencyTree {
    pub root: TreeNode,
}

impl ConstituencyTree {
    /// Words in surface order, excluding `-NONE-` empty elements.
    pub fn leaves(&self) -> Vec<String> {
        fn walk(node: &TreeNode, out: &mut Vec<String>) {
            match node {
                TreeNode::Word(w) => out.push(w.clone()),
                TreeNode::Phrase { label, .. } if label == "-NONE-" => {}
                TreeNode::Phrase { children, .. } => children.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// `(word, preterminal label)` pairs in surface order; a word attached
    /// directly to a phrase with siblings gets an empty tag.
    pub fn tagged_leaves(&self) -> Vec<(String, String)> {
        fn walk(node: &TreeNode, parent: &str, only_child: bool, out: &mut Vec<(String, String)>) {
            match node {
                TreeNode::Word(w) => out.push((w.clone(), if only_child { parent.to_string() } else { String::new() })),
                TreeNode::Phrase { label, .. } if label == "-NONE-" => {}
                TreeNode::Phrase { label, children } => {
                    children.iter().for_each(|c| walk(c, label, children.len() == 1, out))
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, "", false, &mut out);
        out
    }
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        let is_delim = ch == '(' || ch == ')' || ch.is_whitespace();
        if is_delim {
            if let Some(s) = start.take() {
                out.push((s, Token::Atom(&text[s..i])));
            }
            match ch {
                '(' => out.push((i, Token::Open)),
                ')' => out.push((i, Token::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Token::Atom(&text[s..])));
    }
    out
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Tree {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn phrase(&mut self) -> Result<TreeNode> {
        let open_at = self.offset();
        match self.tokens.get(self.pos) {
            Some((_, Token::Open)) => self.pos += 1,
            _ => return Err(self.err("expected '('")),
        }
        let label = match self.tokens.get(self.pos) {
            Some((_, Token::Atom(a))) => {
                self.pos += 1;
                a.to_string()
            }
            _ => String::new(),
        };
        let mut children = Vec::new();
        loop {
            match self.tokens.get(self.pos) {
                None => {
                    return Err(Error::Tree {
                        offset: open_at,
                        message: "unbalanced '(' is never closed".into(),
                    })
                }
                Some((_, Token::Close)) => {
                    self.pos += 1;
                    break;
                }
                Some((_, Token::Open)) => children.push(self.phrase()?),
                Some((_, Token::Atom(a))) => {
                    children.push(TreeNode::Word(a.to_string()));
                    self.pos += 1;
                }
            }
        }
        if children.is_empty() {
            return Err(Error::Tree {
                offset: open_at,
                message: format!("empty constituent {label:?}"),
            });
        }
        Ok(TreeNode::Phrase { label, children })
    }
}

/// Parses every bracketed tree in `text`, in order.
pub fn parse_bracket_trees(text: &str) -> Result<Vec<ConstituencyTree>> {
    let mut p = Parser {
        tokens: tokenize(text),
        pos: 0,
        end: text.len(),
    };
    let mut out = Vec::new();
    while p.pos < p.tokens.len() {
        match p.tokens[p.pos].1 {
            Token::Open => out.push(ConstituencyTree { root: p.phrase()? }),
            Token::Close => return Err(p.err("unbalanced ')'")),
            Token::Atom(_) => return Err(p.err("token outside any constituent")),
        }
    }
    Ok(out)
}

/// Parses exactly one bracketed tree, e.g. `(NP (NR 武汉))`.
pub fn parse_bracket_tree(text: &str) -> Result<ConstituencyTree> {
    let mut trees = parse_bracket_trees(text)?;
    match trees.len() {
        1 => Ok(trees.remove(0)),
        0 => Err(Error::Tree {
            offset: 0,
            message: "no tree".into(),
        }),
        n => Err(Error::Tree {
            offset: 0,
            message: format!("expected one tree, found {n}"),
        }),
    }
}

/// `NP-SBJ` → `NP`, `NP=2` → `NP`. Labels that start with `-` are kept.
pub fn strip_function_tags(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    label.split(['-', '=']).next().unwrap_or(label)
}

/// For each leaf, the first label in the 12-label set found walking upward
/// from its parent, after stripping function tags.
pub fn first_ancestor_labels(tree: &ConstituencyTree) -> Vec<Option<String>> {
    fn walk<'t>(node: &'t TreeNode, stack: &mut Vec<&'t str>, out: &mut Vec<Option<String>>) {
        match node {
            TreeNode::Word(_) => {
                let hit = stack
                    .iter()
                    .rev()
                    .map(|l| strip_function_tags(l))
                    .find(|l| syn_label_index(l).is_some());
                out.push(hit.map(str::to_string));
            }
            TreeNode::Phrase { label, .. } if label == "-NONE-" => {}
            TreeNode::Phrase { label, children } => {
                stack.push(label);
                children.iter().for_each(|c| walk(c, stack, out));
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf() {
        let t = parse_bracket_tree("(NP (NR 武汉))").unwrap();
        assert_eq!(t.leaves(), vec!["武汉"]);
    }

    #[test]
    fn nested_leaves_in_order() {
        let t = parse_bracket_tree("(NP (NR 武汉市) (NP (NR 长江) (NN 大桥)))").unwrap();
        assert_eq!(t.leaves(), vec!["武汉市", "长江", "大桥"]);
        let tagged = t.tagged_leaves();
        assert_eq!(tagged[0], ("武汉市".to_string(), "NR".to_string()));
        assert_eq!(tagged[2], ("大桥".to_string(), "NN".to_string()));
        assert_eq!(first_ancestor_labels(&t), vec![Some("NP".to_string()); 3]);
    }

    #[test]
    fn unbalanced_and_empty() {
        assert!(matches!(parse_bracket_tree("((A b)"), Err(Error::Tree { offset: 0, .. })));
        assert!(matches!(parse_bracket_tree("(A b))"), Err(Error::Tree { offset: 5, .. })));
        assert!(matches!(parse_bracket_tree("(A (B))"), Err(Error::Tree { offset: 3, .. })));
        assert!(parse_bracket_tree("()").is_err());
    }

    #[test]
    fn first_ancestor_rules() {
        let t = parse_bracket_tree("(IP (VP (VV 建成)))").unwrap();
        assert_eq!(first_ancestor_labels(&t), vec![Some("VP".to_string())]);
        let t = parse_bracket_tree("(ROOT (IP (PU 。)))").unwrap();
        assert_eq!(first_ancestor_labels(&t), vec![None]);
        let t = parse_bracket_tree("(IP (NP-OBJ (NN 书)))").unwrap();
        assert_eq!(first_ancestor_labels(&t), vec![Some("NP".to_string())]);
    }

    #[test]
    fn ptb_wrapper_and_traces() {
        let t = parse_bracket_tree("( (IP (NP-SBJ (-NONE- *pro*)) (VP (VV 来))))").unwrap();
        assert_eq!(t.leaves(), vec!["来"]);
        assert_eq!(first_ancestor_labels(&t), vec![Some("VP".to_string())]);
    }
}
