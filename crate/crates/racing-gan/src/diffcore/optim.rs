//! Named parameter storage and the SGD/Adam update rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tape::{Tape, Var};
use super::tensor::Tensor;

/// Adam defaults; standard choices.
pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimMethod {
    Sgd,
    Adam,
}

impl std::fmt::Display for OptimMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptimMethod::Sgd => write!(f, "sgd"),
            OptimMethod::Adam => write!(f, "adam"),
        }
    }
}

#[derive(Debug, Clone)]
struct Parameter {
    name: String,
    value: Tensor,
    grad: Option<Tensor>,
    // Adam moment estimates, kept zeroed until used.
    m: Tensor,
    v: Tensor,
}

/// Trainable tensors with per-parameter optimizer state. Parameters live here
/// across steps; each step attaches them to a fresh tape as grad-requiring
/// leaves and loads the resulting gradients back before updating.
#[derive(Debug, Clone, Default)]
pub struct ParameterSet {
    params: Vec<Parameter>,
    step: u64,
}

impl ParameterSet {
    pub fn new() -> Self {
        ParameterSet::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<()> {
        let name = name.into();
        if self.params.iter().any(|p| p.name == name) {
            return Err(Error::DuplicateParam(name));
        }
        let (r, c) = value.shape();
        self.params.push(Parameter {
            name,
            value,
            grad: None,
            m: Tensor::zeros(r, c),
            v: Tensor::zeros(r, c),
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| p.name.as_str())
    }

    pub fn value(&self, name: &str) -> Option<&Tensor> {
        self.params.iter().find(|p| p.name == name).map(|p| &p.value)
    }

    pub fn value_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.params
            .iter_mut()
            .find(|p| p.name == name)
            .map(|p| &mut p.value)
    }

    pub fn grad(&self, name: &str) -> Option<&Tensor> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .and_then(|p| p.grad.as_ref())
    }

    /// Total number of scalar entries across all parameters.
    pub fn scalar_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Iterate `(name, value)` in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|p| (p.name.as_str(), &p.value))
    }

    /// Record every parameter on `tape` as a leaf, in insertion order.
    /// Trainable attachment tracks gradients; frozen attachment lets values
    /// flow forward while stopping gradients at the leaf.
    pub fn attach(&self, tape: &mut Tape, trainable: bool) -> Result<Vec<Var>> {
        self.params
            .iter()
            .map(|p| tape.leaf(p.value.clone(), trainable))
            .collect()
    }

    /// Copy gradients for leaves produced by [`ParameterSet::attach`] back into
    /// the set. Must run after `tape.backward`.
    pub fn load_grads(&mut self, tape: &Tape, vars: &[Var]) -> Result<()> {
        assert_eq!(vars.len(), self.params.len(), "attach/load var count mismatch");
        for (param, &var) in self.params.iter_mut().zip(vars) {
            let grad = tape
                .grad(var)
                .ok_or_else(|| Error::MissingGrad(param.name.clone()))?;
            grad.validate_finite("load_grads")?;
            param.grad = Some(grad.clone());
        }
        Ok(())
    }

    /// Apply one optimizer update from the loaded gradients, then clear them.
    pub fn optimizer_step(&mut self, method: OptimMethod, lr: f64) -> Result<()> {
        for p in &self.params {
            if p.grad.is_none() {
                return Err(Error::MissingGrad(p.name.clone()));
            }
        }
        self.step += 1;
        match method {
            OptimMethod::Sgd => {
                for p in self.params.iter_mut() {
                    let g = p.grad.take().expect("checked above");
                    p.value.add_scaled(&g, -lr);
                }
            }
            OptimMethod::Adam => {
                let t = self.step as i32;
                let bc1 = 1.0 - ADAM_BETA1.powi(t);
                let bc2 = 1.0 - ADAM_BETA2.powi(t);
                for p in self.params.iter_mut() {
                    let g = p.grad.take().expect("checked above");
                    for ((m, v), (w, &gi)) in p
                        .m
                        .data_mut()
                        .iter_mut()
                        .zip(p.v.data_mut().iter_mut())
                        .zip(p.value.data_mut().iter_mut().zip(g.data()))
                    {
                        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * gi;
                        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * gi * gi;
                        let m_hat = *m / bc1;
                        let v_hat = *v / bc2;
                        *w -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        Ok(())
    }
}
