//! Linear-chain CRF over joint labels.
//!
//! A path `y` over `N` steps scores
//! `start[y₀] + Σ emissions[t, y_t] + Σ transitions[y_{t−1}, y_t] + stop[y_{N−1}]`.
//! Training minimizes `log Z − score(gold)`, with `log Z` from the forward
//! recursion in log space; decoding is Viterbi with lowest-index tie breaking.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::{ParamId, ParamStore, Scalar, Tape, Tensor, Var};

/// Parameter handles of the CRF head, including the emission projection.
#[derive(Clone, Debug)]
pub struct CrfParams {
    pub emission_weight: ParamId,
    pub emission_bias: ParamId,
    pub transitions: ParamId,
    pub start: ParamId,
    pub stop: ParamId,
    pub num_labels: usize,
}

impl CrfParams {
    pub fn new<T: Scalar>(store: &mut ParamStore<T>, input_dim: usize, num_labels: usize, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / (input_dim + num_labels) as f64).sqrt();
        let mut uniform = |shape: &[usize], b: f64| {
            let n = shape.iter().product();
            let data = (0..n).map(|_| T::of(rng.gen_range(-b..=b))).collect();
            Tensor::new(shape.to_vec(), data).expect("positive shape")
        };
        CrfParams {
            emission_weight: store.add("crf.emission.weight", uniform(&[input_dim, num_labels], bound)),
            emission_bias: store.add("crf.emission.bias", Tensor::zeros(&[1, num_labels])),
            transitions: store.add("crf.transitions", uniform(&[num_labels, num_labels], 0.1)),
            start: store.add("crf.start", uniform(&[1, num_labels], 0.1)),
            stop: store.add("crf.stop", uniform(&[1, num_labels], 0.1)),
            num_labels,
        }
    }

    pub fn num_parameters(input_dim: usize, num_labels: usize) -> usize {
        input_dim * num_labels + num_labels + num_labels * num_labels + 2 * num_labels
    }

    /// Emission scores `V·W + b` for features `V` of shape `N×d_v`.
    pub fn emissions<T: Scalar>(&self, tape: &mut Tape<T>, store: &ParamStore<T>, features: Var) -> Result<Var> {
        let w = tape.param(store, self.emission_weight);
        let b = tape.param(store, self.emission_bias);
        emissions(tape, features, w, b)
    }

    pub fn vars<T: Scalar>(&self, tape: &mut Tape<T>, store: &ParamStore<T>) -> CrfVars {
        CrfVars {
            transitions: tape.param(store, self.transitions),
            start: tape.param(store, self.start),
            stop: tape.param(store, self.stop),
        }
    }

    pub fn scores<'a, T: Scalar>(&self, store: &'a ParamStore<T>) -> CrfScores<'a, T> {
        CrfScores {
            transitions: store.value(self.transitions),
            start: store.value(self.start),
            stop: store.value(self.stop),
        }
    }
}

/// Transition, start and stop scores recorded on a tape.
#[derive(Clone, Copy, Debug)]
pub struct CrfVars {
    pub transitions: Var,
    pub start: Var,
    pub stop: Var,
}

/// Plain-value view of the structural scores, for decoding.
#[derive(Clone, Copy, Debug)]
pub struct CrfScores<'a, T> {
    pub transitions: &'a Tensor<T>,
    /// `1×K`
    pub start: &'a Tensor<T>,
    /// `1×K`
    pub stop: &'a Tensor<T>,
}

impl<T: Scalar> CrfScores<'_, T> {
    fn num_labels(&self) -> usize {
        self.start.numel()
    }

    fn check(&self, emissions: &Tensor<T>) -> Result<(usize, usize)> {
        let (n, k) = emissions.dims2("crf")?;
        if self.transitions.shape() != [k, k] {
            return Err(Error::shape("crf transitions", self.transitions.shape(), &[k, k]));
        }
        if self.start.numel() != k || self.stop.numel() != k {
            return Err(Error::shape("crf start/stop", self.start.shape(), &[1, k]));
        }
        Ok((n, k))
    }
}

/// `features · weight + 1·bias`.
pub fn emissions<T: Scalar>(tape: &mut Tape<T>, features: Var, weight: Var, bias: Var) -> Result<Var> {
    let n = tape.value(features).rows();
    let proj = tape.matmul(features, weight)?;
    let ones = tape.constant(Tensor::ones(&[n, 1]));
    let spread = tape.matmul(ones, bias)?;
    tape.add(proj, spread)
}

/// Column-wise `log Σ_i exp(x[i, j])`, stabilized by the (constant) column max.
fn logsumexp_cols<T: Scalar>(tape: &mut Tape<T>, x: Var) -> Result<Var> {
    let v = tape.value(x);
    let (r, c) = v.dims2("logsumexp")?;
    let maxes: Vec<T> = (0..c)
        .map(|j| (0..r).map(|i| v.get(i, j)).fold(T::neg_infinity(), T::max))
        .collect();
    let shift = Tensor::from_rows(&vec![maxes.clone(); r])?;
    let shift = tape.constant(shift);
    let centered = tape.sub(x, shift)?;
    let e = tape.exp(centered)?;
    let ones = tape.constant(Tensor::ones(&[1, r]));
    let s = tape.matmul(ones, e)?;
    let l = tape.log(s)?;
    let m = tape.constant(Tensor::new(vec![1, c], maxes)?);
    tape.add(l, m)
}

/// `log Z` via the forward recursion.
pub fn log_partition<T: Scalar>(tape: &mut Tape<T>, emissions: Var, crf: &CrfVars) -> Result<Var> {
    let (n, k) = tape.value(emissions).dims2("log_partition")?;
    if tape.value(crf.transitions).shape() != [k, k] {
        return Err(Error::shape("log_partition", tape.value(crf.transitions).shape(), &[k, k]));
    }
    let ones_row = tape.constant(Tensor::ones(&[1, k]));
    let first = tape.slice_rows(emissions, 0, 1)?;
    let mut alpha = tape.add(crf.start, first)?;
    for t in 1..n {
        let col = tape.transpose(alpha)?;
        let spread = tape.matmul(col, ones_row)?;
        let scores = tape.add(spread, crf.transitions)?;
        let lse = logsumexp_cols(tape, scores)?;
        let e = tape.slice_rows(emissions, t, t + 1)?;
        alpha = tape.add(lse, e)?;
    }
    let last = tape.add(alpha, crf.stop)?;
    let col = tape.transpose(last)?;
    logsumexp_cols(tape, col)
}

/// Score of one label path, summed in the same order as the forward recursion.
pub fn gold_score<T: Scalar>(tape: &mut Tape<T>, emissions: Var, gold: &[usize], crf: &CrfVars) -> Result<Var> {
    let (n, k) = tape.value(emissions).dims2("gold_score")?;
    if gold.len() != n {
        return Err(Error::InvalidArgument(format!("{} gold labels for {n} steps", gold.len())));
    }
    if let Some(&bad) = gold.iter().find(|&&y| y >= k) {
        return Err(Error::InvalidArgument(format!("gold label {bad} outside [0, {k})")));
    }
    let s0 = tape.element(crf.start, 0, gold[0])?;
    let e0 = tape.element(emissions, 0, gold[0])?;
    let mut score = tape.add(s0, e0)?;
    for t in 1..n {
        let tr = tape.element(crf.transitions, gold[t - 1], gold[t])?;
        score = tape.add(score, tr)?;
        let e = tape.element(emissions, t, gold[t])?;
        score = tape.add(score, e)?;
    }
    let stop = tape.element(crf.stop, 0, gold[n - 1])?;
    tape.add(score, stop)
}

/// Negative log-likelihood `log Z − score(gold)` as a `1×1` value.
pub fn nll<T: Scalar>(tape: &mut Tape<T>, emissions: Var, gold: &[usize], crf: &CrfVars) -> Result<Var> {
    let score = gold_score(tape, emissions, gold, crf)?;
    let log_z = log_partition(tape, emissions, crf)?;
    tape.sub(log_z, score)
}

/// Score of `path` under plain values.
pub fn path_score<T: Scalar>(emissions: &Tensor<T>, scores: &CrfScores<T>, path: &[usize]) -> T {
    let mut s = scores.start.data()[path[0]] + emissions.get(0, path[0]);
    for t in 1..path.len() {
        s = s + scores.transitions.get(path[t - 1], path[t]) + emissions.get(t, path[t]);
    }
    s + scores.stop.data()[path[path.len() - 1]]
}

/// Highest-scoring path and its score. Ties go to the lowest label index.
pub fn viterbi<T: Scalar>(emissions: &Tensor<T>, scores: &CrfScores<T>) -> Result<(Vec<usize>, T)> {
    let (n, k) = scores.check(emissions)?;
    let mut delta: Vec<T> = (0..k).map(|j| scores.start.data()[j] + emissions.get(0, j)).collect();
    let mut back = vec![vec![0usize; k]; n];
    for t in 1..n {
        let mut next = vec![T::zero(); k];
        for j in 0..k {
            let mut best = 0;
            let mut best_score = delta[0] + scores.transitions.get(0, j);
            for (i, &d) in delta.iter().enumerate().skip(1) {
                let s = d + scores.transitions.get(i, j);
                if s > best_score {
                    best = i;
                    best_score = s;
                }
            }
            back[t][j] = best;
            next[j] = best_score + emissions.get(t, j);
        }
        delta = next;
    }
    let mut last = 0;
    let mut best = delta[0] + scores.stop.data()[0];
    for j in 1..k {
        let s = delta[j] + scores.stop.data()[j];
        if s > best {
            best = s;
            last = j;
        }
    }
    let mut path = vec![last; n];
    for t in (1..n).rev() {
        path[t - 1] = back[t][path[t]];
    }
    debug_assert_eq!(scores.num_labels(), k);
    Ok((path, best))
}

/// Exhaustive enumeration of all `K^N` paths, for verification.
pub mod oracle {
    use super::*;

    pub const MAX_PATHS: usize = 100_000;

    fn for_each_path<T: Scalar>(emissions: &Tensor<T>, scores: &CrfScores<T>, mut f: impl FnMut(&[usize], f64)) -> Result<()> {
        let (n, k) = scores.check(emissions)?;
        let total = (k as f64).powi(n as i32);
        if total > MAX_PATHS as f64 {
            return Err(Error::InvalidArgument(format!(
                "{k}^{n} paths exceed the enumeration limit of {MAX_PATHS}"
            )));
        }
        let mut path = vec![0usize; n];
        loop {
            let mut s = scores.start.data()[path[0]].as_f64() + emissions.get(0, path[0]).as_f64();
            for t in 1..n {
                s += scores.transitions.get(path[t - 1], path[t]).as_f64() + emissions.get(t, path[t]).as_f64();
            }
            s += scores.stop.data()[path[n - 1]].as_f64();
            f(&path, s);
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                path[pos] += 1;
                if path[pos] < k {
                    break;
                }
                path[pos] = 0;
            }
        }
    }

    /// `log Σ_y exp(score(y))` by direct enumeration, with the sum of
    /// shifted exponentials accumulated by Neumaier compensated summation.
    pub fn brute_force_log_z<T: Scalar>(emissions: &Tensor<T>, scores: &CrfScores<T>) -> Result<f64> {
        let mut all = Vec::new();
        for_each_path(emissions, scores, |_, s| all.push(s))?;
        let m = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for s in all {
            let x = (s - m).exp();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
        Ok(m + (sum + comp).ln())
    }

    /// Best path by enumeration; the flag reports whether the maximum is unique.
    pub fn brute_force_best<T: Scalar>(emissions: &Tensor<T>, scores: &CrfScores<T>) -> Result<(Vec<usize>, f64, bool)> {
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut unique = true;
        for_each_path(emissions, scores, |p, s| match &best {
            Some((_, b)) if s < *b => {}
            Some((_, b)) if s == *b => unique = false,
            _ => {
                best = Some((p.to_vec(), s));
                unique = true;
            }
        })?;
        let (p, s) = best.expect("at least one path");
        Ok((p, s, unique))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(e: &[&[f64]], k: usize) -> (Tensor<f64>, Tensor<f64>, Tensor<f64>, Tensor<f64>) {
        (
            Tensor::from_f64_rows(e).unwrap(),
            Tensor::zeros(&[k, k]),
            Tensor::zeros(&[1, k]),
            Tensor::zeros(&[1, k]),
        )
    }

    fn nll_value(e: &Tensor<f64>, tr: &Tensor<f64>, st: &Tensor<f64>, sp: &Tensor<f64>, gold: &[usize]) -> Result<f64> {
        let mut tape = Tape::new();
        let em = tape.constant(e.clone());
        let vars = CrfVars {
            transitions: tape.constant(tr.clone()),
            start: tape.constant(st.clone()),
            stop: tape.constant(sp.clone()),
        };
        let loss = nll(&mut tape, em, gold, &vars)?;
        Ok(tape.value(loss).data()[0])
    }

    #[test]
    fn single_label_alphabet_is_exactly_zero() {
        let (e, mut tr, mut st, sp) = setup(&[&[0.3], &[-1.7], &[2.25]], 1);
        tr.set(0, 0, 0.9);
        st.set(0, 0, -0.4);
        assert_eq!(nll_value(&e, &tr, &st, &sp, &[0, 0, 0]).unwrap(), 0.0);
        let scores = CrfScores { transitions: &tr, start: &st, stop: &sp };
        assert_eq!(viterbi(&e, &scores).unwrap().0, vec![0, 0, 0]);
    }

    #[test]
    fn uniform_three_labels_single_step() {
        let (e, tr, st, sp) = setup(&[&[0.0, 0.0, 0.0]], 3);
        let v = nll_value(&e, &tr, &st, &sp, &[1]).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_gold_rejected() {
        let (e, tr, st, sp) = setup(&[&[0.0, 0.0]], 2);
        assert!(matches!(nll_value(&e, &tr, &st, &sp, &[2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn emissions_shape_and_bias() {
        let mut tape = Tape::<f64>::new();
        let v = tape.constant(Tensor::ones(&[8, 5]));
        let w = tape.constant(Tensor::zeros(&[5, 24]));
        let b = tape.constant(Tensor::full(&[1, 24], 0.25));
        let out = emissions(&mut tape, v, w, b).unwrap();
        assert_eq!(tape.value(out).shape(), &[8, 24]);
        assert!(tape.value(out).data().iter().all(|&x| x == 0.25));
    }

    #[test]
    fn dominant_emissions_decode_directly() {
        let (e, tr, st, sp) = setup(&[&[9.0, 0.0, 0.0], &[0.0, 0.0, 9.0], &[0.0, 9.0, 0.0]], 3);
        let scores = CrfScores { transitions: &tr, start: &st, stop: &sp };
        let (path, score) = viterbi(&e, &scores).unwrap();
        assert_eq!(path, vec![0, 2, 1]);
        assert_eq!(score, 27.0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let (e, tr, st, sp) = setup(&[&[1.0, 1.0], &[2.0, 2.0]], 2);
        let scores = CrfScores { transitions: &tr, start: &st, stop: &sp };
        assert_eq!(viterbi(&e, &scores).unwrap().0, vec![0, 0]);
    }

    #[test]
    fn oracle_two_by_two_zeros() {
        let (e, tr, st, sp) = setup(&[&[0.0, 0.0], &[0.0, 0.0]], 2);
        let scores = CrfScores { transitions: &tr, start: &st, stop: &sp };
        let z = oracle::brute_force_log_z(&e, &scores).unwrap();
        assert!((z - 4f64.ln()).abs() < 1e-15);
        let big = Tensor::<f64>::zeros(&[9, 4]);
        let (tr, st, sp) = (Tensor::zeros(&[4, 4]), Tensor::zeros(&[1, 4]), Tensor::zeros(&[1, 4]));
        let scores = CrfScores { transitions: &tr, start: &st, stop: &sp };
        assert!(oracle::brute_force_log_z(&big, &scores).is_err());
    }
}
