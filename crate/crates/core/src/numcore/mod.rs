//! Dense tensors with define-by-run reverse-mode differentiation.
//!
//! A [`Tape`] is rebuilt for every forward pass. Values live on the tape;
//! trainable state lives in a [`ParamStore`] and is copied onto the tape with
//! [`Tape::param`]. [`Tape::backward`] accumulates `∂loss/∂p` into the store.

mod gradcheck;
mod optim;
mod param;
mod scalar;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, GradCheckReport};
pub use optim::{Adam, Optimizer, Sgd};
pub use param::{ParamId, ParamStore, Parameter};
pub use scalar::Scalar;
pub use tape::{Binary, Gradients, Tape, Unary, Var};
pub use tensor::Tensor;
