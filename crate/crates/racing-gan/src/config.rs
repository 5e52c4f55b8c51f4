//! Run configuration: a TOML file of nested key/value tables, schema-checked
//! with unknown keys rejected, plus the conversion into experiment specs.
//!
//! ```toml
//! out_dir = "out"
//! plots = true
//! seeds = [0, 1, 2]
//!
//! [experiment]
//! variant = "gan4"            # gan1 | gan2 | gan3 | gan4 | custom
//! formulation = "standard_bce"    # or "paper_literal"
//! hinge_convention = "lead_penalty" # or "lag_penalty"
//! iterations = 10000
//! batch_size = 64
//! optimizer = "adam"          # or "sgd"
//! lr_d = 0.00007
//! lr_g = 0.0002
//! latent_dim = 8
//! checkpoint_iters = [1, 2500, 8000]
//! gen_hidden = [32, 32]
//! disc_hidden = [32, 32]
//!
//! [experiment.band]
//! lower = [1.0, 0.0, 0.0]     # y = a x^2 + b x + c
//! upper = [1.0, 0.0, 1.0]
//! grid_points = 16
//! x_min = -1.0
//! x_max = 1.0
//!
//! [experiment.coupling]       # required iff variant = "custom"
//! k = 2
//! edges = [[0, 1], [1, 0]]
//! ```
//!
//! Every field is optional and falls back to the defaults above.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bench::BenchConfig;
use crate::diffcore::OptimMethod;
use crate::error::{Error, Result};
use crate::racing_losses::{CouplingGraph, Formulation, HingeConvention, LossConfig};
use crate::synthdata::{linspace, CurveBand, Quadratic};
use crate::trainer::{ExperimentSpec, Variant};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub plots: bool,
    pub seeds: Vec<u64>,
    pub experiment: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            out_dir: PathBuf::from("out"),
            plots: true,
            seeds: vec![0],
            experiment: ExperimentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub formulation: Formulation,
    pub hinge_convention: HingeConvention,
    pub iterations: usize,
    pub batch_size: usize,
    pub optimizer: OptimMethod,
    pub lr_d: f64,
    pub lr_g: f64,
    pub latent_dim: usize,
    pub checkpoint_iters: Vec<usize>,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub band: BandConfig,
    pub coupling: Option<CouplingConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let d = ExperimentSpec::new(Variant::Gan1, 0);
        ExperimentConfig {
            variant: Variant::Gan1,
            formulation: Formulation::StandardBce,
            hinge_convention: HingeConvention::LeadPenalty,
            iterations: d.iterations,
            batch_size: d.batch_size,
            optimizer: d.optimizer,
            lr_d: d.lr_d,
            lr_g: d.lr_g,
            latent_dim: d.latent_dim,
            checkpoint_iters: d.checkpoint_iters,
            gen_hidden: d.gen_hidden,
            disc_hidden: d.disc_hidden,
            band: BandConfig::default(),
            coupling: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandConfig {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub grid_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            lower: [1.0, 0.0, 0.0],
            upper: [1.0, 0.0, 1.0],
            grid_points: 16,
            x_min: -1.0,
            x_max: 1.0,
        }
    }
}

impl BandConfig {
    pub fn build(&self) -> Result<CurveBand> {
        if self.grid_points < 3 {
            return Err(Error::Config("band.grid_points must be >= 3".into()));
        }
        if self.x_min >= self.x_max {
            return Err(Error::Config("band.x_min must be below band.x_max".into()));
        }
        let lower = Quadratic::new(self.lower[0], self.lower[1], self.lower[2])?;
        let upper = Quadratic::new(self.upper[0], self.upper[1], self.upper[2])?;
        CurveBand::new(lower, upper, linspace(self.x_min, self.x_max, self.grid_points))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub k: usize,
    pub edges: Vec<[usize; 2]>,
}

impl CouplingConfig {
    pub fn build(&self) -> Result<CouplingGraph> {
        CouplingGraph::new(self.k, self.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl RunConfig {
    /// Parse and schema-check a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.experiment.variant == Variant::Custom && self.experiment.coupling.is_none() {
            return Err(Error::Config(
                "variant = \"custom\" requires an [experiment.coupling] table".into(),
            ));
        }
        if self.experiment.variant != Variant::Custom && self.experiment.coupling.is_some() {
            return Err(Error::Config(
                "named variants fix their coupling; drop [experiment.coupling]".into(),
            ));
        }
        self.experiment.band.build()?;
        self.experiment_spec(self.seeds[0])?.validate()
    }

    /// The experiment spec for one seed.
    pub fn experiment_spec(&self, seed: u64) -> Result<ExperimentSpec> {
        let e = &self.experiment;
        Ok(ExperimentSpec {
            variant: e.variant,
            graph: e.coupling.as_ref().map(CouplingConfig::build).transpose()?,
            loss_config: LossConfig {
                formulation: e.formulation,
                hinge_convention: e.hinge_convention,
            },
            iterations: e.iterations,
            batch_size: e.batch_size,
            optimizer: e.optimizer,
            lr_d: e.lr_d,
            lr_g: e.lr_g,
            latent_dim: e.latent_dim,
            band: e.band.build()?,
            seed,
            checkpoint_iters: e.checkpoint_iters.clone(),
            gen_hidden: e.gen_hidden.clone(),
            disc_hidden: e.disc_hidden.clone(),
        })
    }

    /// The four-variant benchmark over this config's seed list. A custom
    /// variant benchmarks `custom` alongside the named four.
    pub fn bench_config(&self) -> Result<BenchConfig> {
        let base = self.experiment_spec(self.seeds[0])?;
        let mut bench = BenchConfig::new(base, self.seeds.clone());
        if self.experiment.variant == Variant::Custom {
            bench.variants.push(Variant::Custom);
        }
        Ok(bench)
    }
}
