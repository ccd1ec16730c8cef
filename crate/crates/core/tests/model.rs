mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synsem_core::ingest::{to_char_level, AnnotatedSentence, Corpus, WordSentence};
use synsem_core::model::{gcn_layer, EncoderKind, Fusion, ModelConfig, RelationTerm, Vocab};
use synsem_core::numcore::grad_check;
use synsem_core::{Model, Tape, Tensor};

use common::oracle;

/// 他/将/来/京 with every relation populated.
fn four_chars() -> AnnotatedSentence {
    let s = |v: &[&str]| v.iter().map(|x| Some(x.to_string())).collect::<Vec<_>>();
    to_char_level(&WordSentence {
        words: ["他", "将", "来", "京"].map(String::from).to_vec(),
        pos: ["PN", "AD", "VV", "NR"].map(String::from).to_vec(),
        heads: vec![Some(2), Some(2), None, Some(2)],
        syn: s(&["NP", "ADVP", "VP", "NP"]),
        sem: s(&["A0", "TMP", "ROOT", "A1"]),
        dep_source: None,
    })
    .unwrap()
}

fn build(cfg: ModelConfig, sentences: &[AnnotatedSentence], seed: u64) -> Model {
    let corpus = Corpus::new(sentences.to_vec());
    Model::new(cfg, Vocab::from_corpus(&corpus), corpus.pos_tagset, seed).unwrap()
}

fn features(model: &Model, s: &AnnotatedSentence) -> Tensor {
    let input = model.prepare(s).unwrap();
    let mut tape = Tape::new();
    let v = model.forward(&mut tape, &input).unwrap();
    tape.value(v).clone()
}

fn rows(t: &Tensor) -> oracle::Matrix {
    (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
}

#[test]
fn full_model_gradients() {
    let s = four_chars();
    let mut model = build(ModelConfig::desk(), &[s.clone()], 11);
    let input = model.prepare(&s).unwrap();
    let gold = model.gold_labels(&s).unwrap();
    let (net, store) = model.parts_mut();
    let report = grad_check(store, 1e-5, |tape, store| net.loss(tape, store, &input, &gold, None)).unwrap();
    assert!(report.max_relative_error < 1e-4, "{report:?}");
}

#[test]
fn ungated_forward_matches_reference() {
    let mut rng = common::rng(21);
    let sentences: Vec<_> = (0..6).map(|_| common::random_sentence(&mut rng, 5, 3)).collect();
    for (i, fusion) in [Fusion::Concat, Fusion::Sum].into_iter().enumerate() {
        for (dep, syn, sem) in [(true, false, false), (true, true, false), (true, true, true), (false, false, true)] {
            let cfg = ModelConfig {
                use_gating: false,
                use_dep: dep,
                use_syn: syn,
                use_sem: sem,
                fusion,
                ..ModelConfig::desk()
            };
            let model = build(cfg, &sentences, 100 + i as u64);
            for s in &sentences {
                let err = oracle::max_abs_diff(&rows(&features(&model, s)), &oracle::ungated_features(&model, s));
                assert!(err < 1e-10, "{fusion:?} {dep} {syn} {sem}: {err}");
            }
        }
    }
}

#[test]
fn parameter_ledger() {
    let s = four_chars();
    let vocab_rows = Vocab::new(s.chars.iter().copied()).len();
    let mut previous = 0;
    for (dep, syn, sem) in [(false, false, false), (true, false, false), (true, true, false), (true, true, true)] {
        for gating in [false, true] {
            for encoder in [EncoderKind::Embedding, EncoderKind::Contextual] {
                let cfg = ModelConfig {
                    use_dep: dep,
                    use_syn: syn,
                    use_sem: sem,
                    use_gating: gating,
                    encoder,
                    ..ModelConfig::desk()
                };
                let model = build(cfg.clone(), &[s.clone()], 1);
                assert_eq!(model.num_parameters(), oracle::parameter_count(&cfg, vocab_rows, 4));
            }
        }
        let n = build(ModelConfig { use_dep: dep, use_syn: syn, use_sem: sem, ..ModelConfig::desk() }, &[s.clone()], 1)
            .num_parameters();
        assert!(n > previous);
        previous = n;
    }
    let m = build(ModelConfig::desk(), &[s.clone()], 1);
    let gcn: Vec<_> = m.store.iter().filter(|p| p.name.starts_with("gcn.0.")).map(|p| p.name.clone()).collect();
    assert_eq!(gcn.len(), 12);
    assert!(gcn.contains(&"gcn.0.dep_in.gate_weight".to_string()));
}

#[test]
fn relation_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut t = |r: usize, c: usize| {
        Tensor::new(vec![r, c], (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    };
    let (h, adj, w, gw, gb) = (
        t(10, 6),
        (0..4).map(|_| t(10, 10)).collect::<Vec<_>>(),
        (0..4).map(|_| t(6, 5)).collect::<Vec<_>>(),
        (0..4).map(|_| t(6, 1)).collect::<Vec<_>>(),
        (0..4).map(|_| t(1, 1)).collect::<Vec<_>>(),
    );
    let run = |order: &[usize]| {
        let mut tape = Tape::new();
        let hv = tape.constant(h.clone());
        let terms: Vec<_> = order
            .iter()
            .map(|&i| RelationTerm {
                adjacency: tape.constant(adj[i].clone()),
                weight: tape.constant(w[i].clone()),
                gate: Some((tape.constant(gw[i].clone()), tape.constant(gb[i].clone()))),
            })
            .collect();
        let out = gcn_layer(&mut tape, hv, &terms).unwrap();
        tape.value(out).clone()
    };
    let base = run(&[0, 1, 2, 3]);
    for order in [[3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]] {
        assert!(base.max_abs_diff(&run(&order)).unwrap() < 1e-12);
    }
}

#[test]
fn forward_is_deterministic() {
    let s = common::fig2_sentence();
    let model = build(ModelConfig::desk(), &[s.clone()], 3);
    let a = features(&model, &s);
    let b = features(&model, &s);
    assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.shape(), [9, 64]);
}

#[test]
fn dropout_only_with_an_rng() {
    let s = four_chars();
    let model = build(ModelConfig::desk(), &[s.clone()], 3);
    let input = model.prepare(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut tape = Tape::new();
    let dropped = model.network.forward(&mut tape, &model.store, &input, Some(&mut rng)).unwrap();
    assert_ne!(tape.value(dropped), &features(&model, &s));
}

#[test]
fn self_loop_only_relation_still_changes_features() {
    let mut s = four_chars();
    s.sem = vec![None; 4];
    let base = build(ModelConfig::desk().baseline(), &[s.clone()], 8);
    let cfg = ModelConfig {
        use_dep: false,
        use_syn: false,
        use_sem: true,
        fusion: Fusion::Sum,
        ..ModelConfig::desk()
    };
    let graph = build(cfg, &[s.clone()], 8);
    assert_eq!(base.store.value(base.store.find("encoder.embedding").unwrap()),
               graph.store.value(graph.store.find("encoder.embedding").unwrap()));
    assert_ne!(features(&base, &s), features(&graph, &s));
    assert_eq!(features(&base, &s), {
        let input = base.prepare(&s).unwrap();
        let mut tape = Tape::new();
        let e = base.network.encode(&mut tape, &base.store, &input.char_ids).unwrap();
        tape.value(e).clone()
    });
}

#[test]
fn label_rows_are_shared_between_sentences() {
    let a = four_chars();
    let b = common::fig2_sentence();
    let model = build(ModelConfig::desk(), &[a.clone(), b.clone()], 2);
    let table = model.store.value(model.store.find("labels.embedding").unwrap()).clone();
    for s in [&a, &b] {
        let input = model.prepare(s).unwrap();
        let mut tape = Tape::new();
        let e = model.network.encode(&mut tape, &model.store, &input.char_ids).unwrap();
        let labels = tape.constant(table.clone());
        let h = synsem_core::model::init_node_states(&mut tape, e, labels).unwrap();
        let h = tape.value(h);
        assert_eq!(h.rows(), s.chars.len() + 36);
        assert_eq!(h.slice_rows(s.chars.len(), h.rows()).unwrap(), table);
    }
}

#[test]
fn single_precision_model_runs() {
    let s = common::fig2_sentence();
    let corpus = Corpus::new(vec![s.clone()]);
    let model = synsem_core::Model32::new(ModelConfig::desk(), Vocab::from_corpus(&corpus), corpus.pos_tagset, 4).unwrap();
    let words = model.predict(&s).unwrap();
    assert_eq!(words.last().unwrap().0 .1, 9);
}
