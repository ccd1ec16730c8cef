use crate::error::{Error, Result};

use super::{ParamId, ParamStore, Scalar, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unary {
    Relu,
    Sigmoid,
    Log,
    Exp,
}

/// Pointwise binary operations. Operands must have equal shapes, or one of
/// them must hold a single value, which is broadcast.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binary {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
enum Op<T> {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Binary(Binary, Var, Var),
    Unary(Unary, Var),
    Scale(Var, T),
    Sum(Var),
    Transpose(Var),
    Element(Var, usize),
    GatherRows(Var, Vec<usize>),
    SliceRows(Var, usize),
    StackRows(Vec<Var>),
    ConcatCols(Vec<Var>),
}

#[derive(Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Define-by-run record of one forward pass.
#[derive(Debug)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// A value that never receives a gradient.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A differentiable leaf; its gradient is available from [`Tape::gradients`].
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Records the current value of a trainable parameter.
    pub fn param(&mut self, store: &ParamStore<T>, id: ParamId) -> Var {
        self.push(store.value(id).clone(), Op::Param(id), true)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::MatMul(a, b), ng))
    }

    pub fn binary(&mut self, op: Binary, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        let shape = broadcast_shape(va, vb)
            .ok_or_else(|| Error::shape(binary_name(op), va.shape(), vb.shape()))?;
        let n: usize = shape.iter().product();
        let f = match op {
            Binary::Add => |x: T, y: T| x + y,
            Binary::Sub => |x: T, y: T| x - y,
            Binary::Mul => |x: T, y: T| x * y,
        };
        let data = (0..n)
            .map(|i| f(broadcast_at(va, i), broadcast_at(vb, i)))
            .collect();
        let out = Tensor::new(shape, data)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Binary(op, a, b), ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Mul, a, b)
    }

    pub fn unary(&mut self, op: Unary, x: Var) -> Result<Var> {
        let v = self.value(x);
        let out = match op {
            Unary::Relu => v.map(|x| if x > T::zero() { x } else { T::zero() }),
            Unary::Sigmoid => v.map(sigmoid),
            Unary::Log => {
                if let Some((i, &bad)) = v
                    .data()
                    .iter()
                    .enumerate()
                    .find(|(_, &x)| !(x > T::zero()) || !x.is_finite())
                {
                    return Err(Error::Domain {
                        op: "log",
                        index: i,
                        value: bad.as_f64(),
                    });
                }
                v.map(T::ln)
            }
            Unary::Exp => {
                let out = v.map(T::exp);
                if let Some(i) = out.data().iter().position(|y| !y.is_finite()) {
                    return Err(Error::Domain {
                        op: "exp",
                        index: i,
                        value: v.data()[i].as_f64(),
                    });
                }
                out
            }
        };
        let ng = self.needs(x);
        Ok(self.push(out, Op::Unary(op, x), ng))
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Relu, x)
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Sigmoid, x)
    }

    pub fn log(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Log, x)
    }

    pub fn exp(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Exp, x)
    }

    pub fn scale(&mut self, x: Var, factor: T) -> Var {
        let out = self.value(x).map(|v| v * factor);
        let ng = self.needs(x);
        self.push(out, Op::Scale(x, factor), ng)
    }

    /// Sum of all entries, as a `1×1` tensor.
    pub fn sum(&mut self, x: Var) -> Var {
        let out = Tensor::scalar(self.value(x).sum());
        let ng = self.needs(x);
        self.push(out, Op::Sum(x), ng)
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let out = self.value(x).transpose()?;
        let ng = self.needs(x);
        Ok(self.push(out, Op::Transpose(x), ng))
    }

    /// Entry `(row, col)` of a matrix as a `1×1` tensor.
    pub fn element(&mut self, x: Var, row: usize, col: usize) -> Result<Var> {
        let v = self.value(x);
        let (r, c) = v.dims2("element")?;
        if row >= r || col >= c {
            return Err(Error::InvalidArgument(format!(
                "element ({row}, {col}) outside {r}×{c}"
            )));
        }
        let flat = row * c + col;
        let out = Tensor::scalar(v.data()[flat]);
        let ng = self.needs(x);
        Ok(self.push(out, Op::Element(x, flat), ng))
    }

    /// Rows of `table` selected by `indices` (repeats allowed).
    pub fn gather_rows(&mut self, table: Var, indices: &[usize]) -> Result<Var> {
        let v = self.value(table);
        let (r, c) = v.dims2("gather_rows")?;
        if indices.is_empty() {
            return Err(Error::InvalidArgument("gather_rows needs indices".into()));
        }
        let mut data = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            if i >= r {
                return Err(Error::InvalidArgument(format!(
                    "row {i} outside table of {r} rows"
                )));
            }
            data.extend_from_slice(v.row(i));
        }
        let out = Tensor::new(vec![indices.len(), c], data)?;
        let ng = self.needs(table);
        Ok(self.push(out, Op::GatherRows(table, indices.to_vec()), ng))
    }

    pub fn slice_rows(&mut self, x: Var, start: usize, end: usize) -> Result<Var> {
        let out = self.value(x).slice_rows(start, end)?;
        let ng = self.needs(x);
        Ok(self.push(out, Op::SliceRows(x, start), ng))
    }

    /// Vertical concatenation; all parts need the same column count.
    pub fn stack_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("stack_rows needs inputs".into()))?;
        let (_, c) = self.value(first).dims2("stack_rows")?;
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let v = self.value(p);
            let (r, pc) = v.dims2("stack_rows")?;
            if pc != c {
                return Err(Error::shape("stack_rows", self.value(first).shape(), v.shape()));
            }
            rows += r;
            data.extend_from_slice(v.data());
        }
        let out = Tensor::new(vec![rows, c], data)?;
        let ng = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(out, Op::StackRows(parts.to_vec()), ng))
    }

    /// Horizontal concatenation; all parts need the same row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("concat_cols needs inputs".into()))?;
        let (r, _) = self.value(first).dims2("concat_cols")?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let v = self.value(p);
            let (pr, pc) = v.dims2("concat_cols")?;
            if pr != r {
                return Err(Error::shape("concat_cols", self.value(first).shape(), v.shape()));
            }
            widths.push(pc);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(r * total);
        for i in 0..r {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(i));
            }
        }
        let out = Tensor::new(vec![r, total], data)?;
        let ng = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), ng))
    }

    /// Reverse sweep from a scalar `loss`, returning the gradient of every
    /// value that depends on a differentiable leaf.
    pub fn gradients(&self, loss: Var) -> Result<Gradients<T>> {
        let lv = self.value(loss);
        if !lv.is_scalar() {
            return Err(Error::NonScalarLoss {
                shape: lv.shape().to_vec(),
            });
        }
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::ones(lv.shape()));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            self.propagate(node, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    /// Accumulates `∂loss/∂p` into the store for every parameter on the tape.
    /// Gradients add to whatever the store already holds.
    pub fn backward(&self, loss: Var, store: &mut ParamStore<T>) -> Result<()> {
        let grads = self.gradients(loss)?;
        for (node, g) in self.nodes.iter().zip(&grads.grads) {
            if let (Op::Param(id), Some(g)) = (&node.op, g) {
                store.accumulate(*id, g)?;
            }
        }
        Ok(())
    }

    fn propagate(&self, node: &Node<T>, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) -> Result<()> {
        let mut send = |v: Var, t: Tensor<T>| -> Result<()> {
            if !self.needs(v) {
                return Ok(());
            }
            match &mut grads[v.0] {
                Some(acc) => acc.add_assign(&t),
                slot => {
                    *slot = Some(t);
                    Ok(())
                }
            }
        };
        match &node.op {
            Op::Leaf | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                if self.needs(*a) {
                    send(*a, g.matmul(&self.value(*b).transpose()?)?)?;
                }
                if self.needs(*b) {
                    send(*b, self.value(*a).transpose()?.matmul(g)?)?;
                }
            }
            Op::Binary(op, a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let (da, db): (Vec<T>, Vec<T>) = match op {
                    Binary::Add => (g.data().to_vec(), g.data().to_vec()),
                    Binary::Sub => (g.data().to_vec(), g.data().iter().map(|&x| -x).collect()),
                    Binary::Mul => (
                        (0..g.numel()).map(|i| g.data()[i] * broadcast_at(vb, i)).collect(),
                        (0..g.numel()).map(|i| g.data()[i] * broadcast_at(va, i)).collect(),
                    ),
                };
                send(*a, reduce_to(va, da)?)?;
                send(*b, reduce_to(vb, db)?)?;
            }
            Op::Unary(op, x) => {
                let xv = self.value(*x);
                let out = &node.value;
                let data = (0..g.numel())
                    .map(|i| {
                        let gi = g.data()[i];
                        let xi = xv.data()[i];
                        let yi = out.data()[i];
                        match op {
                            Unary::Relu => {
                                if xi > T::zero() {
                                    gi
                                } else {
                                    T::zero()
                                }
                            }
                            Unary::Sigmoid => gi * yi * (T::one() - yi),
                            Unary::Log => gi / xi,
                            Unary::Exp => gi * yi,
                        }
                    })
                    .collect();
                send(*x, Tensor::new(xv.shape().to_vec(), data)?)?;
            }
            Op::Scale(x, c) => send(*x, g.map(|v| v * *c))?,
            Op::Sum(x) => {
                let gv = g.data()[0];
                send(*x, Tensor::full(self.value(*x).shape(), gv))?;
            }
            Op::Transpose(x) => send(*x, g.transpose()?)?,
            Op::Element(x, flat) => {
                let mut t = Tensor::zeros(self.value(*x).shape());
                t.data_mut()[*flat] = g.data()[0];
                send(*x, t)?;
            }
            Op::GatherRows(x, idx) => {
                let mut t = Tensor::zeros(self.value(*x).shape());
                let c = t.cols();
                for (k, &i) in idx.iter().enumerate() {
                    for j in 0..c {
                        t.data_mut()[i * c + j] = t.data()[i * c + j] + g.get(k, j);
                    }
                }
                send(*x, t)?;
            }
            Op::SliceRows(x, start) => {
                let mut t = Tensor::zeros(self.value(*x).shape());
                let c = t.cols();
                let off = start * c;
                t.data_mut()[off..off + g.numel()].copy_from_slice(g.data());
                send(*x, t)?;
            }
            Op::StackRows(parts) => {
                let mut off = 0;
                for &p in parts {
                    let n = self.value(p).numel();
                    let t = Tensor::new(self.value(p).shape().to_vec(), g.data()[off..off + n].to_vec())?;
                    off += n;
                    send(p, t)?;
                }
            }
            Op::ConcatCols(parts) => {
                let total = g.cols();
                let mut col = 0;
                for &p in parts {
                    let (r, c) = self.value(p).dims2("concat_cols")?;
                    let mut data = Vec::with_capacity(r * c);
                    for i in 0..r {
                        data.extend_from_slice(&g.data()[i * total + col..i * total + col + c]);
                    }
                    col += c;
                    send(p, Tensor::new(vec![r, c], data)?)?;
                }
            }
        }
        Ok(())
    }
}

/// Result of [`Tape::gradients`].
#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn binary_name(op: Binary) -> &'static str {
    match op {
        Binary::Add => "add",
        Binary::Sub => "sub",
        Binary::Mul => "mul",
    }
}

fn broadcast_shape<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Option<Vec<usize>> {
    if a.shape() == b.shape() || b.is_scalar() {
        Some(a.shape().to_vec())
    } else if a.is_scalar() {
        Some(b.shape().to_vec())
    } else {
        None
    }
}

fn broadcast_at<T: Scalar>(t: &Tensor<T>, i: usize) -> T {
    if t.is_scalar() {
        t.data()[0]
    } else {
        t.data()[i]
    }
}

/// Sums an output-shaped gradient back down to a broadcast operand.
fn reduce_to<T: Scalar>(operand: &Tensor<T>, grad: Vec<T>) -> Result<Tensor<T>> {
    if operand.numel() == grad.len() {
        Tensor::new(operand.shape().to_vec(), grad)
    } else {
        Ok(Tensor::full(operand.shape(), grad.into_iter().sum()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: &[&[f64]]) -> Tensor<f64> {
        Tensor::from_f64_rows(rows).unwrap()
    }

    #[test]
    fn relu_and_sigmoid_values() {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(t(&[&[-2.0, 3.0, 0.0]]));
        let r = tape.relu(x).unwrap();
        assert_eq!(tape.value(r).data(), &[0.0, 3.0, 0.0]);
        let s = tape.sigmoid(x).unwrap();
        assert_eq!(tape.value(s).data()[2], 0.5);
    }

    #[test]
    fn log_domain_error_names_index() {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(t(&[&[1.0, 2.0, -1.0]]));
        match tape.log(x) {
            Err(Error::Domain { op: "log", index: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let big = tape.constant(t(&[&[0.0, 1e4]]));
        assert!(matches!(tape.exp(big), Err(Error::Domain { op: "exp", index: 1, .. })));
    }

    #[test]
    fn broadcasting_is_scalar_or_equal_only() {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(t(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let b = tape.constant(t(&[&[1.0, 2.0]]));
        assert!(matches!(tape.add(a, b), Err(Error::ShapeMismatch { .. })));
        let s = tape.constant(Tensor::scalar(10.0));
        let out = tape.add(a, s).unwrap();
        assert_eq!(tape.value(out).data(), &[11.0, 12.0, 13.0, 14.0]);
    }

    #[test]
    fn square_gradient() {
        let mut tape = Tape::<f64>::new();
        let x = tape.input(Tensor::scalar(3.0));
        let y = tape.mul(x, x).unwrap();
        let g = tape.gradients(y).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[6.0]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut tape = Tape::<f64>::new();
        let x = tape.input(t(&[&[1.0, 2.0]]));
        assert!(matches!(tape.gradients(x), Err(Error::NonScalarLoss { .. })));
    }

    #[test]
    fn broadcast_operand_gradient_is_summed() {
        let mut tape = Tape::<f64>::new();
        let a = tape.input(t(&[&[1.0, 2.0, 3.0]]));
        let s = tape.input(Tensor::scalar(2.0));
        let p = tape.mul(a, s).unwrap();
        let loss = tape.sum(p);
        let g = tape.gradients(loss).unwrap();
        assert_eq!(g.get(s).unwrap().data(), &[6.0]);
        assert_eq!(g.get(a).unwrap().data(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn structural_ops_route_gradients() {
        let mut tape = Tape::<f64>::new();
        let a = tape.input(t(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let b = tape.input(t(&[&[5.0], &[6.0]]));
        let cat = tape.concat_cols(&[a, b]).unwrap();
        assert_eq!(tape.value(cat).shape(), &[2, 3]);
        let st = tape.stack_rows(&[cat, cat]).unwrap();
        let sl = tape.slice_rows(st, 1, 3).unwrap();
        let gr = tape.gather_rows(sl, &[0, 0, 1]).unwrap();
        let e = tape.element(gr, 2, 2).unwrap();
        let tot = tape.sum(gr);
        let loss = tape.add(tot, e).unwrap();
        let g = tape.gradients(loss).unwrap();
        // slice picks row 1 of the first copy and row 0 of the second.
        assert_eq!(g.get(a).unwrap().data(), &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(g.get(b).unwrap().data(), &[2.0, 2.0]);
    }
}
