//! Readers for toolkit output formats and the unified JSONL corpus.

mod bracket;
mod conllu;
mod jsonl;
mod roles;
mod sentence;

pub use bracket::{first_ancestor_labels, parse_bracket_tree, parse_bracket_trees, strip_function_tags, ConstituencyTree, TreeNode};
pub use conllu::{parse_conllu, ConlluSentence};
pub use jsonl::{corpus_from_jsonl, corpus_to_jsonl, read_jsonl, write_jsonl};
pub use roles::{normalize_role, parse_role_columns, RoleBlock};
pub use sentence::{to_char_level, AnnotatedSentence, Corpus, WordSentence};
