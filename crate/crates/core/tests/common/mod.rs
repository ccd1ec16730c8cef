#![allow(dead_code)]

pub mod oracle;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use synsem_core::graphs::{SEM_LABELS, SYN_LABELS};
use synsem_core::ingest::{to_char_level, AnnotatedSentence, WordSentence};

pub const ALPHABET: &str = "他将来中国武汉市长江大桥建成我们的人民日报在上海工作学生";
pub const TAGS: [&str; 6] = ["NN", "VV", "PN", "AD", "NR", "DEG"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Head indices forming a single tree: a random order, each word attached to
/// an earlier word in that order.
pub fn random_heads(rng: &mut impl Rng, n: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut heads = vec![None; n];
    for i in 1..n {
        heads[order[i]] = Some(order[rng.gen_range(0..i)]);
    }
    heads
}

/// A valid, fully annotated sentence of `1..=max_words` words.
pub fn random_sentence(rng: &mut impl Rng, max_words: usize, max_word_len: usize) -> AnnotatedSentence {
    let alphabet: Vec<char> = ALPHABET.chars().collect();
    let n = rng.gen_range(1..=max_words);
    let words = (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=max_word_len);
            (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect::<String>()
        })
        .collect();
    let pos = (0..n).map(|_| TAGS.choose(rng).unwrap().to_string()).collect();
    let pick = |rng: &mut dyn rand::RngCore, set: &[&str]| {
        rng.gen_bool(0.6).then(|| set.choose(rng).unwrap().to_string())
    };
    let ws = WordSentence {
        words,
        pos,
        heads: random_heads(rng, n),
        syn: (0..n).map(|_| pick(rng, &SYN_LABELS)).collect(),
        sem: (0..n).map(|_| pick(rng, &SEM_LABELS)).collect(),
        dep_source: rng.gen_bool(0.5).then(|| "ltp".to_string()),
    };
    to_char_level(&ws).unwrap()
}

/// The worked example: 武汉市/长江/大桥/建成. The only dependency is
/// 大桥 → 长江; 建成 sits under VP and is the predicate.
pub fn fig2_sentence() -> AnnotatedSentence {
    to_char_level(&WordSentence {
        words: ["武汉市", "长江", "大桥", "建成"].map(String::from).to_vec(),
        pos: ["NN", "NN", "NN", "VV"].map(String::from).to_vec(),
        heads: vec![None, Some(2), None, None],
        syn: vec![Some("NP".into()), Some("NP".into()), Some("NP".into()), Some("VP".into())],
        sem: vec![None, None, None, Some("ROOT".into())],
        dep_source: None,
    })
    .unwrap()
}
