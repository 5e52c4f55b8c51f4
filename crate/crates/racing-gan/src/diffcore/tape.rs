//! Reverse-mode autodiff tape over dense matrices.
//!
//! Operations are recorded in topological order during the forward pass and
//! replayed once in reverse by [`Tape::backward`]. A tape is built fresh for
//! every training step; parameters live outside the tape (see
//! [`super::optim::ParameterSet`]) and are attached as leaves per step.

use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Clamp floor for safe-log arguments. The adversarial objectives take logs of
/// sigmoid outputs, which can underflow to zero.
pub const SAFE_LOG_EPS: f64 = 1e-7;

/// Sigmoid outputs are clamped into `[SIGMOID_FLOOR, 1 - SIGMOID_FLOOR]` so a
/// saturated discriminator never reports a score of exactly 0 or 1.
pub const SIGMOID_FLOOR: f64 = 1e-12;

/// Handle to a node on a [`Tape`]. Only meaningful on the tape that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul { a: usize, b: usize },
    Add { a: usize, b: usize },
    /// `a + row` where `row` is a 1 x cols vector broadcast over the rows of `a`.
    AddRow { a: usize, row: usize },
    Sub { a: usize, b: usize },
    Tanh { a: usize },
    Sigmoid { a: usize },
    Relu { a: usize },
    SafeLog { a: usize },
    Mean { a: usize },
    Scale { a: usize, c: f64 },
}

struct Node {
    value: Tensor,
    grad: Option<Tensor>,
    op: Op,
    requires_grad: bool,
}

/// Wengert list: values plus the recipe that produced them.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Record an input tensor. Gradients are tracked through it only when
    /// `requires_grad` is set.
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Result<Var> {
        value.validate_finite("leaf")?;
        Ok(self.push(value, Op::Leaf, requires_grad))
    }

    /// Record a constant input; gradients never flow into it.
    pub fn constant(&mut self, value: Tensor) -> Result<Var> {
        self.leaf(value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of the last backward pass. `None` until backward has run, and
    /// always `None` for nodes that do not require gradients.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn record(&mut self, value: Tensor, op: Op, inputs: &[usize]) -> Result<Var> {
        value.validate_finite(op_name(&op))?;
        let requires_grad = inputs.iter().any(|&i| self.nodes[i].requires_grad);
        Ok(self.push(value, op, requires_grad))
    }

    fn shape_err(op: &'static str, expected: String, got: String) -> Error {
        Error::ShapeMismatch { op, expected, got }
    }

    /// `a (m,k) @ b (k,n)`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.cols() != bv.rows() {
            return Err(Self::shape_err(
                "matmul",
                format!("inner dims to agree ({}x{} @ ?)", av.rows(), av.cols()),
                format!("{}x{}", bv.rows(), bv.cols()),
            ));
        }
        let value = av.matmul(bv);
        self.record(value, Op::MatMul { a: a.0, b: b.0 }, &[a.0, b.0])
    }

    /// Elementwise sum. Either both operands share a shape, or `b` is a
    /// 1 x cols row vector broadcast over the rows of `a`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.shape() == bv.shape() {
            let value = av.zip_map(bv, |x, y| x + y);
            self.record(value, Op::Add { a: a.0, b: b.0 }, &[a.0, b.0])
        } else if bv.rows() == 1 && bv.cols() == av.cols() {
            let row = bv.data().to_vec();
            let value = Tensor::from_fn(av.rows(), av.cols(), |i, j| av.get(i, j) + row[j]);
            self.record(value, Op::AddRow { a: a.0, row: b.0 }, &[a.0, b.0])
        } else {
            Err(Self::shape_err(
                "add",
                format!("{}x{} or 1x{}", av.rows(), av.cols(), av.cols()),
                format!("{}x{}", bv.rows(), bv.cols()),
            ))
        }
    }

    /// Elementwise difference, same shapes only.
    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.shape() != bv.shape() {
            return Err(Self::shape_err(
                "sub",
                format!("{}x{}", av.rows(), av.cols()),
                format!("{}x{}", bv.rows(), bv.cols()),
            ));
        }
        let value = av.zip_map(bv, |x, y| x - y);
        self.record(value, Op::Sub { a: a.0, b: b.0 }, &[a.0, b.0])
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let value = self.nodes[a.0].value.map(f64::tanh);
        self.record(value, Op::Tanh { a: a.0 }, &[a.0])
    }

    /// Logistic function with outputs clamped to the open interval
    /// `(SIGMOID_FLOOR, 1 - SIGMOID_FLOOR)`.
    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let value = self.nodes[a.0].value.map(sigmoid_clamped);
        self.record(value, Op::Sigmoid { a: a.0 }, &[a.0])
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let value = self.nodes[a.0].value.map(|x| if x > 0.0 { x } else { 0.0 });
        self.record(value, Op::Relu { a: a.0 }, &[a.0])
    }

    /// `ln(max(x, SAFE_LOG_EPS))`.
    pub fn safe_log(&mut self, a: Var) -> Result<Var> {
        let value = self.nodes[a.0].value.map(|x| x.max(SAFE_LOG_EPS).ln());
        self.record(value, Op::SafeLog { a: a.0 }, &[a.0])
    }

    /// Mean over all entries, producing a 1x1 tensor.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let av = &self.nodes[a.0].value;
        if av.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let value = Tensor::scalar(av.data().iter().sum::<f64>() / av.len() as f64);
        self.record(value, Op::Mean { a: a.0 }, &[a.0])
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let value = self.nodes[a.0].value.map(|x| c * x);
        self.record(value, Op::Scale { a: a.0, c }, &[a.0])
    }

    pub fn neg(&mut self, a: Var) -> Result<Var> {
        self.scale(a, -1.0)
    }

    /// Single reverse sweep from a scalar loss. Populates the gradient of every
    /// grad-requiring node recorded no later than `loss`; nodes off the path
    /// keep a zero gradient. A tape can be swept once.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        let (r, c) = self.nodes[loss.0].value.shape();
        if (r, c) != (1, 1) {
            return Err(Error::NotScalar { rows: r, cols: c });
        }
        self.consumed = true;

        for node in self.nodes.iter_mut().take(loss.0 + 1) {
            if node.requires_grad {
                let (r, c) = node.value.shape();
                node.grad = Some(Tensor::zeros(r, c));
            }
        }
        if !self.nodes[loss.0].requires_grad {
            // Loss does not depend on any tracked input; all grads stay zero.
            return Ok(());
        }
        self.nodes[loss.0].grad = Some(Tensor::scalar(1.0));

        for id in (0..=loss.0).rev() {
            if !self.nodes[id].requires_grad {
                continue;
            }
            let out_grad = self.nodes[id].grad.take().expect("grad allocated above");
            self.propagate(id, &out_grad);
            self.nodes[id].grad = Some(out_grad);
        }
        Ok(())
    }

    fn propagate(&mut self, id: usize, out_grad: &Tensor) {
        let op = self.nodes[id].op.clone();
        match op {
            Op::Leaf => {}
            Op::MatMul { a, b } => {
                if self.nodes[a].requires_grad {
                    let contrib = out_grad.matmul_nt(&self.nodes[b].value);
                    self.accumulate(a, &contrib);
                }
                if self.nodes[b].requires_grad {
                    let contrib = self.nodes[a].value.matmul_tn(out_grad);
                    self.accumulate(b, &contrib);
                }
            }
            Op::Add { a, b } => {
                self.accumulate(a, out_grad);
                self.accumulate(b, out_grad);
            }
            Op::AddRow { a, row } => {
                self.accumulate(a, out_grad);
                if self.nodes[row].requires_grad {
                    let contrib = out_grad.col_sum();
                    self.accumulate(row, &contrib);
                }
            }
            Op::Sub { a, b } => {
                self.accumulate(a, out_grad);
                if self.nodes[b].requires_grad {
                    if let Some(g) = self.nodes[b].grad.as_mut() {
                        g.add_scaled(out_grad, -1.0);
                    }
                }
            }
            Op::Tanh { a } => {
                let contrib = self.nodes[id]
                    .value
                    .zip_map(out_grad, |y, g| (1.0 - y * y) * g);
                self.accumulate(a, &contrib);
            }
            Op::Sigmoid { a } => {
                let contrib = self.nodes[id]
                    .value
                    .zip_map(out_grad, |y, g| y * (1.0 - y) * g);
                self.accumulate(a, &contrib);
            }
            Op::Relu { a } => {
                // Subgradient 0 at exactly 0.
                let contrib = self.nodes[a]
                    .value
                    .zip_map(out_grad, |x, g| if x > 0.0 { g } else { 0.0 });
                self.accumulate(a, &contrib);
            }
            Op::SafeLog { a } => {
                // Zero slope inside the clamped region.
                let contrib = self.nodes[a].value.zip_map(out_grad, |x, g| {
                    if x >= SAFE_LOG_EPS {
                        g / x
                    } else {
                        0.0
                    }
                });
                self.accumulate(a, &contrib);
            }
            Op::Mean { a } => {
                let n = self.nodes[a].value.len() as f64;
                let g = out_grad.item() / n;
                let (r, c) = self.nodes[a].value.shape();
                let contrib = Tensor::filled(r, c, g);
                self.accumulate(a, &contrib);
            }
            Op::Scale { a, c } => {
                if self.nodes[a].requires_grad {
                    if let Some(g) = self.nodes[a].grad.as_mut() {
                        g.add_scaled(out_grad, c);
                    }
                }
            }
        }
    }

    fn accumulate(&mut self, id: usize, contrib: &Tensor) {
        if !self.nodes[id].requires_grad {
            return;
        }
        if let Some(g) = self.nodes[id].grad.as_mut() {
            g.add_assign(contrib);
        }
    }
}

fn sigmoid_clamped(x: f64) -> f64 {
    let y = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    y.clamp(SIGMOID_FLOOR, 1.0 - SIGMOID_FLOOR)
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::MatMul { .. } => "matmul",
        Op::Add { .. } => "add",
        Op::AddRow { .. } => "add",
        Op::Sub { .. } => "sub",
        Op::Tanh { .. } => "tanh",
        Op::Sigmoid { .. } => "sigmoid",
        Op::Relu { .. } => "relu",
        Op::SafeLog { .. } => "safe_log",
        Op::Mean { .. } => "mean",
        Op::Scale { .. } => "scale",
    }
}
