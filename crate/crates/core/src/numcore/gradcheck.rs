use crate::error::{Error, Result};

use super::{ParamStore, Scalar, Tape, Var};

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Parameter name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
    pub entries_checked: usize,
}

/// Compares tape gradients with central differences for every parameter
/// entry in `store`.
///
/// `loss_fn` records a forward pass on the given tape and returns the scalar
/// loss. The relative error of an entry is `|a − n| / max(|a|, |n|, 1e-8)`.
/// Parameter values and accumulated gradients are restored afterwards.
pub fn grad_check<T, F>(store: &mut ParamStore<T>, eps: f64, mut loss_fn: F) -> Result<GradCheckReport>
where
    T: Scalar,
    F: FnMut(&mut Tape<T>, &ParamStore<T>) -> Result<Var>,
{
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::InvalidArgument(format!(
            "grad_check eps must lie in [1e-7, 1e-3], got {eps}"
        )));
    }
    let eval = |loss_fn: &mut F, store: &ParamStore<T>| -> Result<f64> {
        let mut tape = Tape::new();
        let loss = loss_fn(&mut tape, store)?;
        tape.value(loss)
            .item()
            .map(Scalar::as_f64)
            .ok_or_else(|| Error::NonScalarLoss {
                shape: tape.value(loss).shape().to_vec(),
            })
    };

    let first = eval(&mut loss_fn, store)?;
    let second = eval(&mut loss_fn, store)?;
    if first.to_bits() != second.to_bits() {
        return Err(Error::NonDeterministic { first, second });
    }

    let saved_grads: Vec<_> = store.iter().map(|p| p.grad.clone()).collect();
    store.zero_grad();
    {
        let mut tape = Tape::new();
        let loss = loss_fn(&mut tape, store)?;
        tape.backward(loss, store)?;
    }
    let analytic: Vec<_> = store.iter().map(|p| p.grad.clone()).collect();

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        entries_checked: 0,
    };
    let ids: Vec<_> = store.ids().collect();
    for (id, grad) in ids.into_iter().zip(&analytic) {
        for i in 0..grad.numel() {
            let orig = store.value(id).data()[i];
            store.get_mut(id).value.data_mut()[i] = T::of(orig.as_f64() + eps);
            let plus = eval(&mut loss_fn, store);
            store.get_mut(id).value.data_mut()[i] = T::of(orig.as_f64() - eps);
            let minus = eval(&mut loss_fn, store);
            store.get_mut(id).value.data_mut()[i] = orig;
            let numeric = (plus? - minus?) / (2.0 * eps);
            let a = grad.data()[i].as_f64();
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            report.entries_checked += 1;
            if report.worst.is_none() || err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst = Some((store.get(id).name.clone(), i));
            }
        }
    }

    for (id, g) in store.ids().collect::<Vec<_>>().into_iter().zip(saved_grads) {
        store.get_mut(id).grad = g;
    }
    Ok(report)
}
