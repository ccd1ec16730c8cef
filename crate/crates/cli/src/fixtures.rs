//! Deterministic synthetic corpus used by the overfit check and examples.
//!
//! Every lexicon word has characters of its own, so segmentation and tagging
//! are learnable from character identity alone. Heads, constituent labels
//! and roles follow fixed rules over the POS sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synsem_core::ingest::{to_char_level, AnnotatedSentence, Corpus, WordSentence};

pub const TAGS: [&str; 6] = ["NN", "NR", "PN", "VV", "AD", "P"];

const WORDS_PER_TAG: usize = 4;

fn syn_label(tag: &str) -> &'static str {
    match tag {
        "VV" => "VP",
        "AD" => "ADVP",
        "P" => "PP",
        _ => "NP",
    }
}

fn lexicon() -> Vec<Vec<String>> {
    let mut next = 0x4e00u32;
    let mut take = |len: usize| -> String {
        (0..len)
            .map(|_| {
                next += 7;
                char::from_u32(next).unwrap()
            })
            .collect()
    };
    TAGS.iter()
        .enumerate()
        .map(|(t, _)| (0..WORDS_PER_TAG).map(|w| take(1 + (t + w) % 3)).collect())
        .collect()
}

fn annotate(words: Vec<String>, tags: Vec<usize>) -> AnnotatedSentence {
    let n = words.len();
    let root = tags.iter().position(|&t| TAGS[t] == "VV").unwrap_or(n - 1);
    let heads = (0..n).map(|w| (w != root).then_some(root)).collect();
    let syn = tags.iter().map(|&t| Some(syn_label(TAGS[t]).to_string())).collect();
    let mut seen_subject = false;
    let sem = (0..n)
        .map(|w| {
            let role = match TAGS[tags[w]] {
                _ if w == root => "ROOT",
                "AD" => "TMP",
                "P" => "LOC",
                _ if w > root => "A1",
                _ if !seen_subject => {
                    seen_subject = true;
                    "A0"
                }
                _ => "TPC",
            };
            Some(role.to_string())
        })
        .collect();
    let pos = tags.iter().map(|&t| TAGS[t].to_string()).collect();
    to_char_level(&WordSentence {
        words,
        pos,
        heads,
        syn,
        sem,
        dep_source: None,
    })
    .expect("synthetic sentences are valid")
}

/// `count` sentences of 3 to 7 words drawn with a fixed seed.
pub fn synthetic_corpus(count: usize) -> Corpus {
    let lex = lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e_17);
    let sentences = (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=7);
            let tags: Vec<usize> = (0..n).map(|_| rng.gen_range(0..TAGS.len())).collect();
            let words = tags
                .iter()
                .map(|&t| lex[t][rng.gen_range(0..WORDS_PER_TAG)].clone())
                .collect();
            annotate(words, tags)
        })
        .collect();
    Corpus::new(sentences)
}

/// The bundled 40-sentence overfit corpus.
pub fn overfit_corpus() -> Corpus {
    synthetic_corpus(40)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn corpus_shape() {
        let c = overfit_corpus();
        assert_eq!(c.len(), 40);
        assert_eq!(c.pos_tagset.len(), 6);
        assert_eq!(c, overfit_corpus());
        for s in &c.sentences {
            s.validate().unwrap();
        }
    }

    #[test]
    fn characters_belong_to_one_word() {
        let mut owner: HashMap<char, String> = HashMap::new();
        for s in &overfit_corpus().sentences {
            for w in 0..s.num_words() {
                let word = s.word(w);
                for c in word.chars() {
                    assert_eq!(owner.entry(c).or_insert_with(|| word.clone()), &word);
                }
            }
        }
    }
}
