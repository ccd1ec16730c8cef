mod common;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;
use synsem_core::crf::{self, oracle, CrfScores, CrfVars};
use synsem_core::numcore::{grad_check, ParamStore};
use synsem_core::{Tape, Tensor};

struct Instance {
    emissions: Tensor,
    transitions: Tensor,
    start: Tensor,
    stop: Tensor,
}

impl Instance {
    fn random(seed: u64, max_n: usize, max_k: usize) -> Self {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=max_n);
        let k = rng.gen_range(1..=max_k);
        let mut t = |r: usize, c: usize| {
            Tensor::new(vec![r, c], (0..r * c).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap()
        };
        Instance {
            emissions: t(n, k),
            transitions: t(k, k),
            start: t(1, k),
            stop: t(1, k),
        }
    }

    fn scores(&self) -> CrfScores<'_, f64> {
        CrfScores {
            transitions: &self.transitions,
            start: &self.start,
            stop: &self.stop,
        }
    }

    fn log_z(&self) -> f64 {
        let mut tape = Tape::new();
        let em = tape.constant(self.emissions.clone());
        let vars = self.vars(&mut tape);
        let z = crf::log_partition(&mut tape, em, &vars).unwrap();
        tape.value(z).data()[0]
    }

    fn vars(&self, tape: &mut Tape) -> CrfVars {
        CrfVars {
            transitions: tape.constant(self.transitions.clone()),
            start: tape.constant(self.start.clone()),
            stop: tape.constant(self.stop.clone()),
        }
    }

    fn nll(&self, gold: &[usize]) -> f64 {
        let mut tape = Tape::new();
        let em = tape.constant(self.emissions.clone());
        let vars = self.vars(&mut tape);
        let l = crf::nll(&mut tape, em, gold, &vars).unwrap();
        tape.value(l).data()[0]
    }
}

/// Every label sequence of length `n` over `k` labels.
fn all_paths(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..k.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let d = code % k;
                    code /= k;
                    d
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn forward_agrees_with_enumeration(seed in any::<u64>()) {
        let inst = Instance::random(seed, 5, 4);
        let ours = inst.log_z();
        let reference = oracle::brute_force_log_z(&inst.emissions, &inst.scores()).unwrap();
        prop_assert!((ours - reference).abs() <= 1e-8 * reference.abs().max(1.0));

        let (path, score) = crf::viterbi(&inst.emissions, &inst.scores()).unwrap();
        let (best, best_score, unique) = oracle::brute_force_best(&inst.emissions, &inst.scores()).unwrap();
        prop_assert!((score - best_score).abs() < 1e-9);
        if unique {
            prop_assert_eq!(path, best);
        }
    }

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>()) {
        let inst = Instance::random(seed, 4, 3);
        let (n, k) = (inst.emissions.rows(), inst.emissions.cols());
        let mut total = 0.0;
        for path in all_paths(n, k) {
            let nll = inst.nll(&path);
            prop_assert!(nll >= -1e-9);
            total += (-nll).exp();
        }
        prop_assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn constant_shift_at_one_step(seed in any::<u64>(), c in -5.0f64..5.0) {
        let mut inst = Instance::random(seed, 5, 4);
        let before = inst.log_z();
        let (path, _) = crf::viterbi(&inst.emissions, &inst.scores()).unwrap();
        let t = seed as usize % inst.emissions.rows();
        for j in 0..inst.emissions.cols() {
            let v = inst.emissions.get(t, j);
            inst.emissions.set(t, j, v + c);
        }
        prop_assert!((inst.log_z() - before - c).abs() < 1e-9);
        prop_assert_eq!(crf::viterbi(&inst.emissions, &inst.scores()).unwrap().0, path);
    }

}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        rng_seed: RngSeed::Fixed(0xc7f),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn nll_gradient_matches_finite_differences(seed in any::<u64>()) {
        let inst = Instance::random(seed, 5, 4);
        let mut rng = common::rng(seed ^ 1);
        let gold: Vec<usize> = (0..inst.emissions.rows()).map(|_| rng.gen_range(0..inst.emissions.cols())).collect();
        let mut store = ParamStore::new();
        let e = store.add("emissions", inst.emissions.clone());
        let tr = store.add("transitions", inst.transitions.clone());
        let st = store.add("start", inst.start.clone());
        let sp = store.add("stop", inst.stop.clone());
        let report = grad_check(&mut store, 1e-4, |tape, store| {
            let em = tape.param(store, e);
            let vars = CrfVars {
                transitions: tape.param(store, tr),
                start: tape.param(store, st),
                stop: tape.param(store, sp),
            };
            crf::nll(tape, em, &gold, &vars)
        })
        .unwrap();
        prop_assert!(report.max_relative_error < 1e-4, "{report:?}");
    }
}

#[test]
fn spec_examples() {
    let inst = Instance {
        emissions: Tensor::zeros(&[2, 2]),
        transitions: Tensor::zeros(&[2, 2]),
        start: Tensor::zeros(&[1, 2]),
        stop: Tensor::zeros(&[1, 2]),
    };
    assert!((oracle::brute_force_log_z(&inst.emissions, &inst.scores()).unwrap() - 4f64.ln()).abs() < 1e-15);
    assert!((inst.log_z() - 4f64.ln()).abs() < 1e-15);

    let mut single = Instance::random(9, 5, 1);
    single.emissions = Tensor::from_f64_rows(&[[1.5], [-2.0], [0.25]]).unwrap();
    assert_eq!(single.nll(&[0, 0, 0]), 0.0);
    assert_eq!(crf::viterbi(&single.emissions, &single.scores()).unwrap().0, [0, 0, 0]);

    let mut dominant = Instance::random(3, 1, 3);
    dominant.transitions = Tensor::zeros(&[3, 3]);
    dominant.start = Tensor::zeros(&[1, 3]);
    dominant.stop = Tensor::zeros(&[1, 3]);
    dominant.emissions = Tensor::from_f64_rows(&[[9.0, 0.0, 0.0], [0.0, 0.0, 9.0], [0.0, 9.0, 0.0]]).unwrap();
    assert_eq!(crf::viterbi(&dominant.emissions, &dominant.scores()).unwrap().0, [0, 2, 1]);

    let wide = Instance {
        emissions: Tensor::zeros(&[9, 4]),
        transitions: Tensor::zeros(&[4, 4]),
        start: Tensor::zeros(&[1, 4]),
        stop: Tensor::zeros(&[1, 4]),
    };
    assert!(oracle::brute_force_log_z(&wide.emissions, &wide.scores()).is_err());

    let mut tape = Tape::new();
    let em = tape.constant(Tensor::zeros(&[2, 4]));
    let vars = wide.vars(&mut tape);
    assert!(crf::nll(&mut tape, em, &[0, 4], &vars).is_err());
}
