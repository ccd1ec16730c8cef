use super::{ParamStore, Scalar, Tensor};

pub trait Optimizer<T: Scalar> {
    /// Applies one update from the gradients currently held in `store`.
    fn step(&mut self, store: &mut ParamStore<T>);
}

#[derive(Clone, Debug)]
pub struct Sgd {
    pub lr: f64,
}

impl<T: Scalar> Optimizer<T> for Sgd {
    fn step(&mut self, store: &mut ParamStore<T>) {
        let lr = T::of(self.lr);
        for id in store.ids().collect::<Vec<_>>() {
            let p = store.get_mut(id);
            for (v, &g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
                *v = *v - lr * g;
            }
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    moments: Vec<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            moments: Vec::new(),
        }
    }

    pub fn with_lr(lr: f64) -> Self {
        Self::new(lr, 0.9, 0.999, 1e-8)
    }
}

impl<T: Scalar> Optimizer<T> for Adam<T> {
    fn step(&mut self, store: &mut ParamStore<T>) {
        if self.moments.len() != store.len() {
            self.moments = store
                .iter()
                .map(|p| (Tensor::zeros(p.value.shape()), Tensor::zeros(p.value.shape())))
                .collect();
        }
        self.step += 1;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let c1 = T::one() - b1.powi(self.step);
        let c2 = T::one() - b2.powi(self.step);
        let (lr, eps) = (T::of(self.lr), T::of(self.eps));
        for (id, (m, v)) in store.ids().collect::<Vec<_>>().into_iter().zip(&mut self.moments) {
            let p = store.get_mut(id);
            let grads = p.grad.data();
            for (i, w) in p.value.data_mut().iter_mut().enumerate() {
                let g = grads[i];
                let mi = b1 * m.data()[i] + (T::one() - b1) * g;
                let vi = b2 * v.data()[i] + (T::one() - b2) * g * g;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                *w = *w - lr * (mi / c1) / ((vi / c2).sqrt() + eps);
            }
        }
    }
}
