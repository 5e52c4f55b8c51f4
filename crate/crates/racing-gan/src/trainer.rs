//! Alternating adversarial training over one discriminator and k coupled
//! generators, including the four named experiment variants.
//!
//! Each iteration runs one discriminator update (real batch plus one fresh
//! fake batch per generator, generator outputs frozen), then one update per
//! generator in index order against the current discriminator. All generators
//! share a single fresh latent batch within an iteration so the hinge compares
//! scores under the same z.
//!
//! Randomness is split into per-purpose streams derived from the run seed:
//! data draws, per-network init, per-generator discriminator-step latents, a
//! shared generator-step latent stream, and per-generator evaluation streams.
//! A generator's streams depend only on its index, so its inputs are
//! reproducible across variants with different k.

use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::{OptimMethod, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::models::{sample_latent, DiscriminatorNet, GeneratorNet};
use crate::racing_losses::{
    discriminator_loss, generator_loss, CouplingGraph, LossConfig,
};
use crate::synthdata::{sample_real, CurveBand, CurveSample};

/// The four benchmark configurations, plus free-form coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One generator, no competition.
    Gan1,
    /// Two generators, uncoupled.
    Gan2,
    /// Two generators; generator 1 races generator 0, generator 0 runs free.
    Gan3,
    /// Two generators racing each other.
    Gan4,
    /// Caller supplies the coupling graph.
    Custom,
}

impl Variant {
    pub const NAMED: [Variant; 4] = [Variant::Gan1, Variant::Gan2, Variant::Gan3, Variant::Gan4];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Gan1 => "gan1",
            Variant::Gan2 => "gan2",
            Variant::Gan3 => "gan3",
            Variant::Gan4 => "gan4",
            Variant::Custom => "custom",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Generator count and coupling graph for a named variant.
pub fn build_variant(variant: Variant) -> Result<(usize, CouplingGraph)> {
    match variant {
        Variant::Gan1 => Ok((1, CouplingGraph::uncoupled(1))),
        Variant::Gan2 => Ok((2, CouplingGraph::uncoupled(2))),
        Variant::Gan3 => Ok((2, CouplingGraph::new(2, [(1, 0)])?)),
        Variant::Gan4 => Ok((2, CouplingGraph::new(2, [(0, 1), (1, 0)])?)),
        Variant::Custom => Err(Error::InvalidSpec(
            "custom variant requires an explicit coupling graph".into(),
        )),
    }
}

/// Full configuration of one training run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub variant: Variant,
    /// Required iff `variant` is [`Variant::Custom`].
    pub graph: Option<CouplingGraph>,
    pub loss_config: LossConfig,
    pub iterations: usize,
    pub batch_size: usize,
    pub optimizer: OptimMethod,
    pub lr_d: f64,
    pub lr_g: f64,
    pub latent_dim: usize,
    pub band: CurveBand,
    pub seed: u64,
    /// Iterations at which generated-curve batches are dumped.
    pub checkpoint_iters: Vec<usize>,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
}

impl ExperimentSpec {
    /// Defaults sized so the within-1% convergence criterion reliably fires
    /// inside the 10k-iteration budget: the discriminator learns a shade
    /// slower than the generators, keeping late-phase oscillations small
    /// enough to settle into the band.
    pub fn new(variant: Variant, seed: u64) -> Self {
        ExperimentSpec {
            variant,
            graph: None,
            loss_config: LossConfig::default(),
            iterations: 10_000,
            batch_size: 64,
            optimizer: OptimMethod::Adam,
            lr_d: 7e-5,
            lr_g: 2e-4,
            latent_dim: 8,
            band: CurveBand::default_band(),
            seed,
            checkpoint_iters: vec![1, 2500, 8000],
            gen_hidden: vec![32, 32],
            disc_hidden: vec![32, 32],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidSpec("iterations must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidSpec("batch_size must be >= 1".into()));
        }
        if self.latent_dim == 0 {
            return Err(Error::InvalidSpec("latent_dim must be >= 1".into()));
        }
        for (name, lr) in [("lr_d", self.lr_d), ("lr_g", self.lr_g)] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be a positive real")));
            }
        }
        match (self.variant, &self.graph) {
            (Variant::Custom, None) => Err(Error::InvalidSpec(
                "custom variant requires an explicit coupling graph".into(),
            )),
            (Variant::Custom, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::InvalidSpec(
                "named variants fix their coupling graph; leave it unset".into(),
            )),
            (_, None) => Ok(()),
        }
    }

    pub fn resolved_graph(&self) -> Result<CouplingGraph> {
        match self.variant {
            Variant::Custom => self
                .graph
                .clone()
                .ok_or_else(|| Error::InvalidSpec("custom variant requires a graph".into())),
            named => Ok(build_variant(named)?.1),
        }
    }
}

// Stream ids for the hierarchical seed split.
const STREAM_DATA: u64 = 0;
const STREAM_DISC_INIT: u64 = 1;
const STREAM_SHARED_LATENT: u64 = 2;

fn gen_init_stream(i: usize) -> u64 {
    3 + 3 * i as u64
}
fn gen_dstep_stream(i: usize) -> u64 {
    4 + 3 * i as u64
}
fn gen_eval_stream(i: usize) -> u64 {
    5 + 3 * i as u64
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Evolving run state: the networks, the iteration counter and the RNG
/// streams feeding them.
pub struct TrainState {
    pub discriminator: DiscriminatorNet,
    pub generators: Vec<GeneratorNet>,
    pub iteration: usize,
    data_rng: ChaCha8Rng,
    shared_latent_rng: ChaCha8Rng,
    dstep_latent_rngs: Vec<ChaCha8Rng>,
    eval_rngs: Vec<ChaCha8Rng>,
}

impl TrainState {
    fn init(spec: &ExperimentSpec, k: usize) -> Result<Self> {
        let n = spec.band.grid_len();
        let discriminator = DiscriminatorNet::new(
            n,
            &spec.disc_hidden,
            &mut stream_rng(spec.seed, STREAM_DISC_INIT),
        )?;
        let generators = (0..k)
            .map(|i| {
                GeneratorNet::new(
                    spec.latent_dim,
                    &spec.gen_hidden,
                    n,
                    &mut stream_rng(spec.seed, gen_init_stream(i)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainState {
            discriminator,
            generators,
            iteration: 0,
            data_rng: stream_rng(spec.seed, STREAM_DATA),
            shared_latent_rng: stream_rng(spec.seed, STREAM_SHARED_LATENT),
            dstep_latent_rngs: (0..k)
                .map(|i| stream_rng(spec.seed, gen_dstep_stream(i)))
                .collect(),
            eval_rngs: (0..k)
                .map(|i| stream_rng(spec.seed, gen_eval_stream(i)))
                .collect(),
        })
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Generate `count` curves from generator `i` on its evaluation stream.
    pub fn sample_curves(&mut self, i: usize, count: usize) -> Result<Vec<CurveSample>> {
        let g = &self.generators[i];
        let z = sample_latent(g.latent_dim(), count, &mut self.eval_rngs[i])?;
        let mut tape = Tape::new();
        let handles = g.attach(&mut tape, false)?;
        let zv = tape.constant(z)?;
        let out = g.generate(&mut tape, &handles, zv)?;
        let values = tape.value(out);
        Ok((0..values.rows())
            .map(|r| CurveSample::new(values.row(r).to_vec()))
            .collect())
    }
}

/// One row of the loss trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub loss_d: f64,
    pub loss_g: Vec<f64>,
}

/// Per-iteration losses for a whole run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossTrace {
    records: Vec<TraceRecord>,
}

impl LossTrace {
    pub fn push(&mut self, record: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.iteration > last.iteration,
                "trace iterations must strictly increase"
            );
        }
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn generator_count(&self) -> usize {
        self.records.first().map_or(0, |r| r.loss_g.len())
    }

    pub fn discriminator_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss_d).collect()
    }

    pub fn generator_losses(&self, i: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.loss_g[i]).collect()
    }

    /// `iteration,loss_d,loss_g0[,loss_g1,...]`, one row per iteration.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let k = self.generator_count();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "iteration,loss_d")?;
        for i in 0..k {
            write!(out, ",loss_g{i}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{},{}", r.iteration, r.loss_d)?;
            for g in &r.loss_g {
                write!(out, ",{g}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Parse a trace written by [`LossTrace::write_csv`].
pub fn read_trace_csv(path: &Path) -> Result<LossTrace> {
    let text = std::fs::read_to_string(path)?;
    let bad = |reason: &str| Error::MalformedCsv {
        path: path.display().to_string(),
        reason: reason.into(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "iteration" || cols[1] != "loss_d" {
        return Err(bad("expected header iteration,loss_d,loss_g0,..."));
    }
    for (i, c) in cols[2..].iter().enumerate() {
        if *c != format!("loss_g{i}") {
            return Err(bad(&format!("unexpected column {c:?}")));
        }
    }
    let mut trace = LossTrace::default();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(&format!("row has {} fields, expected {}", fields.len(), cols.len())));
        }
        let iteration = fields[0].parse().map_err(|_| bad("bad iteration"))?;
        let loss_d = fields[1].parse().map_err(|_| bad("bad loss value"))?;
        let loss_g = fields[2..]
            .iter()
            .map(|f| f.parse().map_err(|_| bad("bad loss value")))
            .collect::<Result<Vec<f64>>>()?;
        trace.push(TraceRecord { iteration, loss_d, loss_g });
    }
    if trace.is_empty() {
        return Err(bad("no data rows"));
    }
    Ok(trace)
}

/// Curves dumped by one generator at one checkpoint iteration.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub iteration: usize,
    pub generator: usize,
    pub samples: Vec<CurveSample>,
}

/// Everything a finished run produces.
pub struct TrainOutput {
    pub state: TrainState,
    pub trace: LossTrace,
    pub checkpoints: Vec<Checkpoint>,
}

/// Stepping driver for one run. [`train`] wraps it; tests and tools that need
/// per-iteration access drive it directly.
pub struct Trainer {
    spec: ExperimentSpec,
    graph: CouplingGraph,
    state: TrainState,
    trace: LossTrace,
    checkpoints: Vec<Checkpoint>,
}

impl Trainer {
    pub fn new(spec: ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let graph = spec.resolved_graph()?;
        let state = TrainState::init(&spec, graph.k())?;
        Ok(Trainer {
            spec,
            graph,
            state,
            trace: LossTrace::default(),
            checkpoints: Vec::new(),
        })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut TrainState {
        &mut self.state
    }

    pub fn trace(&self) -> &LossTrace {
        &self.trace
    }

    fn step_discriminator(&mut self) -> Result<f64> {
        let batch = self.spec.batch_size;
        let real = sample_real(&self.spec.band, batch, &mut self.state.data_rng)?;
        let real = samples_to_tensor(&real);
        let latents: Vec<Tensor> = (0..self.graph.k())
            .map(|i| {
                sample_latent(
                    self.spec.latent_dim,
                    batch,
                    &mut self.state.dstep_latent_rngs[i],
                )
            })
            .collect::<Result<_>>()?;

        let wrap = wrap_numeric(self.state.iteration + 1, "d");

        let mut tape = Tape::new();
        let d = &self.state.discriminator;
        let d_handles = d.attach(&mut tape, true)?;
        let real_var = tape.constant(real)?;
        let d_real = d.discriminate(&mut tape, &d_handles, real_var).map_err(&wrap)?;
        let mut d_fakes = Vec::with_capacity(self.graph.k());
        for (g, z) in self.state.generators.iter().zip(latents) {
            let g_handles = g.attach(&mut tape, false)?;
            let zv = tape.constant(z)?;
            let fake = g.generate(&mut tape, &g_handles, zv).map_err(&wrap)?;
            d_fakes.push(d.discriminate(&mut tape, &d_handles, fake).map_err(&wrap)?);
        }
        let loss = discriminator_loss(&mut tape, d_real, &d_fakes, self.spec.loss_config.formulation)
            .map_err(&wrap)?;
        let loss_value = tape.value(loss).item();
        tape.backward(loss)?;
        self.state
            .discriminator
            .params
            .load_grads(&tape, d_handles.vars())
            .map_err(&wrap)?;
        self.state
            .discriminator
            .params
            .optimizer_step(self.spec.optimizer, self.spec.lr_d)?;
        Ok(loss_value)
    }

    fn step_generator(&mut self, i: usize, z_shared: &Tensor) -> Result<f64> {
        let wrap = wrap_numeric(self.state.iteration + 1, &format!("g{i}"));
        let mut tape = Tape::new();
        let d_handles = self.state.discriminator.attach(&mut tape, false)?;
        let zv = tape.constant(z_shared.clone())?;

        // Score every generator on the shared batch; only generator i's pass
        // carries gradients.
        let mut d_fakes: Vec<Var> = Vec::with_capacity(self.graph.k());
        let mut own_handles = None;
        for (j, g) in self.state.generators.iter().enumerate() {
            let trainable = j == i;
            let g_handles = g.attach(&mut tape, trainable)?;
            let fake = g.generate(&mut tape, &g_handles, zv).map_err(&wrap)?;
            let score = self
                .state
                .discriminator
                .discriminate(&mut tape, &d_handles, fake)
                .map_err(&wrap)?;
            d_fakes.push(score);
            if trainable {
                own_handles = Some(g_handles);
            }
        }
        let own_handles = own_handles.expect("generator index validated by graph");

        let loss = generator_loss(&mut tape, i, &d_fakes, &self.graph, self.spec.loss_config)
            .map_err(&wrap)?;
        let loss_value = tape.value(loss).item();
        tape.backward(loss)?;
        let g = &mut self.state.generators[i];
        g.params.load_grads(&tape, own_handles.vars()).map_err(&wrap)?;
        g.params.optimizer_step(self.spec.optimizer, self.spec.lr_g)?;
        Ok(loss_value)
    }

    /// Run one full iteration: discriminator update, then every generator in
    /// index order, then trace/checkpoint bookkeeping.
    pub fn step(&mut self) -> Result<()> {
        let loss_d = self.step_discriminator()?;
        let z_shared = sample_latent(
            self.spec.latent_dim,
            self.spec.batch_size,
            &mut self.state.shared_latent_rng,
        )?;
        let mut loss_g = Vec::with_capacity(self.graph.k());
        for i in 0..self.graph.k() {
            loss_g.push(self.step_generator(i, &z_shared)?);
        }
        self.state.iteration += 1;
        self.trace.push(TraceRecord {
            iteration: self.state.iteration,
            loss_d,
            loss_g,
        });

        if self.spec.checkpoint_iters.contains(&self.state.iteration) {
            let iteration = self.state.iteration;
            let batch = self.spec.batch_size;
            for i in 0..self.graph.k() {
                let samples = self.state.sample_curves(i, batch)?;
                self.checkpoints.push(Checkpoint {
                    iteration,
                    generator: i,
                    samples,
                });
            }
        }
        Ok(())
    }

    pub fn run(mut self) -> Result<TrainOutput> {
        for _ in 0..self.spec.iterations {
            self.step()?;
        }
        Ok(TrainOutput {
            state: self.state,
            trace: self.trace,
            checkpoints: self.checkpoints,
        })
    }
}

/// Train a full run from a spec.
pub fn train(spec: ExperimentSpec) -> Result<TrainOutput> {
    Trainer::new(spec)?.run()
}

fn wrap_numeric(iteration: usize, network: &str) -> impl Fn(Error) -> Error {
    let network = network.to_string();
    move |err| match err {
        Error::NonFinite { .. } => Error::NonFiniteLoss {
            iteration,
            network: network.clone(),
        },
        other => other,
    }
}

/// Stack aligned curve samples into a batch x N tensor.
pub fn samples_to_tensor(samples: &[CurveSample]) -> Tensor {
    let n = samples.first().map_or(0, CurveSample::len);
    Tensor::from_fn(samples.len(), n, |i, j| samples[i].y[j])
}
