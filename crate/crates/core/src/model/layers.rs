//! Building blocks of the forward pass, usable on their own.

use crate::error::{Error, Result};
use crate::graphs::NUM_LABEL_NODES;
use crate::numcore::{Scalar, Tape, Tensor, Var};

use super::Fusion;

/// `sigmoid(H·w + b)`: one gate value per node, shape `|V|×1`.
pub fn gate<T: Scalar>(tape: &mut Tape<T>, h: Var, weight: Var, bias: Var) -> Result<Var> {
    if !tape.value(bias).is_scalar() {
        return Err(Error::shape("gate bias", tape.value(bias).shape(), &[1, 1]));
    }
    let (_, c) = tape.value(weight).dims2("gate")?;
    if c != 1 {
        return Err(Error::shape("gate weight", tape.value(weight).shape(), &[tape.value(h).cols(), 1]));
    }
    let z = tape.matmul(h, weight)?;
    let z = tape.add(z, bias)?;
    tape.sigmoid(z)
}

/// One relation's inputs to a GCN layer.
#[derive(Clone, Copy, Debug)]
pub struct RelationTerm {
    /// Normalized adjacency `Ã_τ`.
    pub adjacency: Var,
    pub weight: Var,
    /// Gate weight (`d×1`) and bias (`1×1`); `None` for the ungated layer.
    pub gate: Option<(Var, Var)>,
}

/// `ReLU(Σ_τ g_τ ⊙ (Ã_τ H W_τ))`, with `g_τ ≡ 1` for ungated terms.
///
/// Every relation reads the same input states `H`; the gate is computed from
/// `H` and scales the propagated term row by row.
pub fn gcn_layer<T: Scalar>(tape: &mut Tape<T>, h: Var, terms: &[RelationTerm]) -> Result<Var> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("gcn_layer needs at least one relation".into()));
    }
    let mut acc = None;
    for term in terms {
        let hw = tape.matmul(h, term.weight)?;
        let mut prop = tape.matmul(term.adjacency, hw)?;
        if let Some((gw, gb)) = term.gate {
            let g = gate(tape, h, gw, gb)?;
            let width = tape.value(prop).cols();
            let ones = tape.constant(Tensor::ones(&[1, width]));
            let spread = tape.matmul(g, ones)?;
            prop = tape.mul(spread, prop)?;
        }
        acc = Some(match acc {
            None => prop,
            Some(a) => tape.add(a, prop)?,
        });
    }
    tape.relu(acc.expect("non-empty terms"))
}

/// `H⁽⁰⁾ = [E; label rows]`: characters first, then the 12 constituent and
/// 24 role label embeddings.
pub fn init_node_states<T: Scalar>(tape: &mut Tape<T>, encoded: Var, label_table: Var) -> Result<Var> {
    let (rows, d) = tape.value(label_table).dims2("init_node_states")?;
    let (_, ed) = tape.value(encoded).dims2("init_node_states")?;
    if rows != NUM_LABEL_NODES || d != ed {
        return Err(Error::shape("init_node_states", tape.value(label_table).shape(), &[NUM_LABEL_NODES, ed]));
    }
    tape.stack_rows(&[encoded, label_table])
}

/// Combines encoder rows with the character rows of the final node states.
pub fn fuse<T: Scalar>(tape: &mut Tape<T>, encoded: Var, node_states: Var, mode: Fusion) -> Result<Var> {
    let n = tape.value(encoded).rows();
    let chars = tape.slice_rows(node_states, 0, n)?;
    match mode {
        Fusion::Concat => tape.concat_cols(&[encoded, chars]),
        Fusion::Sum => {
            if tape.value(encoded).shape() != tape.value(chars).shape() {
                return Err(Error::shape("sum fusion", tape.value(encoded).shape(), tape.value(chars).shape()));
            }
            tape.add(encoded, chars)
        }
    }
}

/// `(S·X)_i = X_{i+offset}`, zero outside the sentence.
pub(crate) fn shift_matrix<T: Scalar>(n: usize, offset: isize) -> Tensor<T> {
    let mut s = Tensor::zeros(&[n, n]);
    for i in 0..n {
        let j = i as isize + offset;
        if (0..n as isize).contains(&j) {
            s.set(i, j as usize, T::one());
        }
    }
    s
}
