//! Plain-loop reimplementations used as references for the library code.
//! Nothing here goes through the tape or the library's graph builders.

#![allow(dead_code)]

use synsem_core::graphs::{SEM_LABELS, SYN_LABELS};
use synsem_core::ingest::AnnotatedSentence;
use synsem_core::model::{EncoderKind, Fusion};
use synsem_core::Model;

pub type Matrix = Vec<Vec<f64>>;

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            for t in 0..k {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

fn relu(a: &Matrix) -> Matrix {
    a.iter().map(|r| r.iter().map(|&v| v.max(0.0)).collect()).collect()
}

/// `D^{-1/2} (A + I) D^{-1/2}` via explicit diagonal matrices.
pub fn normalize(adjacency: &Matrix) -> Matrix {
    let n = adjacency.len();
    let mut a = adjacency.clone();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        d[i][i] = 1.0 / a[i].iter().sum::<f64>().sqrt();
    }
    matmul(&matmul(&d, &a), &d)
}

/// Adjacency matrices `[dep_in, dep_out, syn, sem]` straight from the
/// sentence annotations.
pub fn adjacencies(s: &AnnotatedSentence) -> [Matrix; 4] {
    let n = s.chars.len();
    let v = n + SYN_LABELS.len() + SEM_LABELS.len();
    let empty = vec![vec![0.0; v]; v];
    let (mut din, mut dout, mut syn, mut sem) = (empty.clone(), empty.clone(), empty.clone(), empty);
    for (dep, head) in s.heads.iter().enumerate() {
        if let Some(h) = *head {
            for hc in s.words[h].0..s.words[h].1 {
                for dc in s.words[dep].0..s.words[dep].1 {
                    dout[hc][dc] = 1.0;
                    din[dc][hc] = 1.0;
                }
            }
        }
    }
    for (w, &(a, b)) in s.words.iter().enumerate() {
        if let Some(l) = &s.syn[w] {
            let node = n + SYN_LABELS.iter().position(|x| x == l).unwrap();
            for c in a..b {
                syn[c][node] = 1.0;
                syn[node][c] = 1.0;
            }
        }
        if let Some(l) = &s.sem[w] {
            let node = n + SYN_LABELS.len() + SEM_LABELS.iter().position(|x| x == l).unwrap();
            for c in a..b {
                sem[c][node] = 1.0;
                sem[node][c] = 1.0;
            }
        }
    }
    [din, dout, syn, sem]
}

fn param(model: &Model, name: &str) -> Matrix {
    let id = model.store.find(name).unwrap_or_else(|| panic!("no parameter {name}"));
    let t = model.store.value(id);
    (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
}

fn has(model: &Model, name: &str) -> bool {
    model.store.find(name).is_some()
}

/// Encoder output `E`.
pub fn encode(model: &Model, s: &AnnotatedSentence) -> Matrix {
    let table = param(model, "encoder.embedding");
    let mut e: Matrix = s.chars.iter().map(|&c| table[model.vocab.id(c)].clone()).collect();
    if model.config().encoder == EncoderKind::Embedding {
        return e;
    }
    let n = e.len();
    let d = e[0].len();
    for k in 0..2 {
        let w: Vec<Matrix> = ["prev", "center", "next"]
            .iter()
            .map(|p| param(model, &format!("encoder.conv{k}.{p}")))
            .collect();
        let bias = param(model, &format!("encoder.conv{k}.bias"))[0].clone();
        let mut next = e.clone();
        for i in 0..n {
            for j in 0..d {
                let mut z = bias[j];
                for (off, wm) in [-1isize, 0, 1].iter().zip(&w) {
                    let src = i as isize + off;
                    if src < 0 || src >= n as isize {
                        continue;
                    }
                    for t in 0..d {
                        z += e[src as usize][t] * wm[t][j];
                    }
                }
                next[i][j] = e[i][j] + z.max(0.0);
            }
        }
        e = next;
    }
    e
}

/// Fused features `V` of an ungated model:
/// `H⁽ˡ⁺¹⁾ = ReLU(Σ_τ Ã_τ H⁽ˡ⁾ W_τ⁽ˡ⁾)`, then concat or sum with `E`.
pub fn ungated_features(model: &Model, s: &AnnotatedSentence) -> Matrix {
    let cfg = model.config();
    assert!(!cfg.use_gating, "the reference covers the ungated layer only");
    let e = encode(model, s);
    if !cfg.gcn_enabled() {
        return e;
    }
    let [din, dout, syn, sem] = adjacencies(s);
    let mut relations = Vec::new();
    if cfg.use_dep {
        relations.push(("dep_in", normalize(&din)));
        relations.push(("dep_out", normalize(&dout)));
    }
    if cfg.use_syn {
        relations.push(("syn", normalize(&syn)));
    }
    if cfg.use_sem {
        relations.push(("sem", normalize(&sem)));
    }
    let mut h = e.clone();
    h.extend(param(model, "labels.embedding"));
    for l in 0..cfg.gcn_layer_dims.len() {
        assert!(!has(model, &format!("gcn.{l}.{}.gate_weight", relations[0].0)));
        let mut acc: Option<Matrix> = None;
        for (name, adj) in &relations {
            let w = param(model, &format!("gcn.{l}.{name}.weight"));
            let term = matmul(adj, &matmul(&h, &w));
            acc = Some(match acc {
                None => term,
                Some(a) => add(&a, &term),
            });
        }
        h = relu(&acc.unwrap());
    }
    let n = e.len();
    match cfg.fusion {
        Fusion::Concat => (0..n).map(|i| [e[i].clone(), h[i].clone()].concat()).collect(),
        Fusion::Sum => add(&e, &h[..n].to_vec()),
    }
}

/// Closed-form count of trainable scalars for a configuration.
pub fn parameter_count(cfg: &synsem_core::model::ModelConfig, vocab_rows: usize, num_tags: usize) -> usize {
    let d = cfg.embed_dim;
    let k = 4 * num_tags;
    let mut total = vocab_rows * d;
    if cfg.encoder == EncoderKind::Contextual {
        total += 2 * (3 * d * d + d);
    }
    let relations = 2 * cfg.use_dep as usize + cfg.use_syn as usize + cfg.use_sem as usize;
    if relations > 0 {
        total += 36 * d;
        let mut d_in = d;
        for &d_out in &cfg.gcn_layer_dims {
            let per_relation = d_in * d_out + if cfg.use_gating { d_in + 1 } else { 0 };
            total += relations * per_relation;
            d_in = d_out;
        }
    }
    let dv = match (relations > 0, cfg.fusion) {
        (true, Fusion::Concat) => d + cfg.gcn_layer_dims.last().unwrap(),
        _ => d,
    };
    total + dv * k + k + k * k + 2 * k
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}
