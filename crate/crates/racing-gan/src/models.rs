//! Generator and discriminator MLPs on top of the autodiff core.
//!
//! A net owns its [`ParameterSet`]; every training step attaches the
//! parameters to that step's tape (trainable or frozen) and runs the forward
//! pass through the returned handles. Attaching once and reusing the handles
//! keeps gradient accumulation correct when a net is applied to several
//! batches on one tape.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diffcore::{ParameterSet, Tape, Tensor, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

/// Architecture of a dense feed-forward network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

impl MlpSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidSpec(
                "an MLP needs at least input and output sizes".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidSpec("layer sizes must be positive".into()));
        }
        Ok(MlpSpec {
            layer_sizes,
            hidden_activation,
            output_activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Weights plus biases across all layers.
    pub fn parameter_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

/// Glorot-uniform weights, zero biases. Parameter names are `w{l}` / `b{l}`.
pub fn init_params(spec: &MlpSpec, rng: &mut impl Rng) -> ParameterSet {
    let mut params = ParameterSet::new();
    for (l, w) in spec.layer_sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (w[0], w[1]);
        let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weight = Tensor::from_fn(fan_in, fan_out, |_, _| (2.0 * rng.gen::<f64>() - 1.0) * s);
        params
            .insert(format!("w{l}"), weight)
            .expect("generated names are unique");
        params
            .insert(format!("b{l}"), Tensor::zeros(1, fan_out))
            .expect("generated names are unique");
    }
    params
}

/// Tape handles for an attached net, one weight/bias pair per layer.
pub struct NetHandles {
    vars: Vec<Var>,
}

impl NetHandles {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    fn weight(&self, layer: usize) -> Var {
        self.vars[2 * layer]
    }

    fn bias(&self, layer: usize) -> Var {
        self.vars[2 * layer + 1]
    }
}

fn forward_mlp(spec: &MlpSpec, tape: &mut Tape, handles: &NetHandles, input: Var) -> Result<Var> {
    let got = tape.value(input).cols();
    if got != spec.input_dim() {
        return Err(Error::ShapeMismatch {
            op: "forward",
            expected: format!("input width {}", spec.input_dim()),
            got: format!("{got}"),
        });
    }
    let mut h = input;
    for layer in 0..spec.layer_count() {
        let z = tape.matmul(h, handles.weight(layer))?;
        let z = tape.add(z, handles.bias(layer))?;
        let last = layer + 1 == spec.layer_count();
        h = if last {
            match spec.output_activation {
                OutputActivation::Identity => z,
                OutputActivation::Sigmoid => tape.sigmoid(z)?,
            }
        } else {
            match spec.hidden_activation {
                HiddenActivation::Tanh => tape.tanh(z)?,
                HiddenActivation::Relu => tape.relu(z)?,
            }
        };
    }
    Ok(h)
}

/// Maps latent rows (batch x L) to curve rows (batch x N), identity output.
#[derive(Debug, Clone)]
pub struct GeneratorNet {
    spec: MlpSpec,
    pub params: ParameterSet,
}

impl GeneratorNet {
    /// `hidden` lists the hidden layer widths between latent dim `L` and the
    /// curve dimension `n`.
    pub fn new(latent_dim: usize, hidden: &[usize], n: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(latent_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(n);
        let spec = MlpSpec::new(sizes, HiddenActivation::Tanh, OutputActivation::Identity)?;
        let params = init_params(&spec, rng);
        Ok(GeneratorNet { spec, params })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn latent_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    pub fn attach(&self, tape: &mut Tape, trainable: bool) -> Result<NetHandles> {
        Ok(NetHandles {
            vars: self.params.attach(tape, trainable)?,
        })
    }

    /// Forward pass `z (batch x L) -> curves (batch x N)` through previously
    /// attached handles.
    pub fn generate(&self, tape: &mut Tape, handles: &NetHandles, z: Var) -> Result<Var> {
        forward_mlp(&self.spec, tape, handles, z)
    }
}

/// Maps curve rows (batch x N) to scores (batch x 1) strictly inside (0, 1).
#[derive(Debug, Clone)]
pub struct DiscriminatorNet {
    spec: MlpSpec,
    pub params: ParameterSet,
}

impl DiscriminatorNet {
    pub fn new(n: usize, hidden: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(n);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let spec = MlpSpec::new(sizes, HiddenActivation::Relu, OutputActivation::Sigmoid)?;
        let params = init_params(&spec, rng);
        Ok(DiscriminatorNet { spec, params })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn attach(&self, tape: &mut Tape, trainable: bool) -> Result<NetHandles> {
        Ok(NetHandles {
            vars: self.params.attach(tape, trainable)?,
        })
    }

    /// Forward pass `x (batch x N) -> scores (batch x 1)`.
    pub fn discriminate(&self, tape: &mut Tape, handles: &NetHandles, x: Var) -> Result<Var> {
        forward_mlp(&self.spec, tape, handles, x)
    }
}

/// i.i.d. standard-normal latent batch, row-major fill order.
pub fn sample_latent(latent_dim: usize, batch: usize, rng: &mut impl Rng) -> Result<Tensor> {
    if batch == 0 || latent_dim == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok(Tensor::from_fn(batch, latent_dim, |_, _| {
        rng.sample(StandardNormal)
    }))
}

/// Flat parameter snapshot: `name,row,col,value`, one line per entry.
pub fn write_parameter_snapshot(path: &Path, params: &ParameterSet) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "name,row,col,value")?;
    for (name, tensor) in params.iter() {
        for i in 0..tensor.rows() {
            for j in 0..tensor.cols() {
                writeln!(out, "{name},{i},{j},{}", tensor.get(i, j))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
