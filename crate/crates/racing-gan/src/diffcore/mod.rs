//! Minimal reverse-mode automatic differentiation over dense real matrices.
//!
//! Just enough machinery for the adversarial objectives in this crate: a
//! Wengert tape with matrix multiply, (broadcast) add, subtract, tanh,
//! sigmoid, relu, safe-log, mean and scalar multiply, plus SGD/Adam updates
//! over named parameter sets. Everything is `f64`, single-threaded per tape,
//! and freely movable across threads so independent runs can parallelize.

pub mod gradcheck;
mod optim;
mod tape;
mod tensor;

pub use optim::{OptimMethod, ParameterSet, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use tape::{Tape, Var, SAFE_LOG_EPS, SIGMOID_FLOOR};
pub use tensor::Tensor;
