//! Multi-seed, multi-variant benchmark harness.
//!
//! Runs every (variant, seed) pair as an independent training run, one run per
//! worker, then aggregates convergence, tracking and containment into a
//! [`BenchmarkSummary`]. Runs are fully self-contained, so the worker count
//! never changes the numbers, only the wall time.

use rayon::prelude::*;

use crate::analysis::{BenchmarkSummary, ConvergenceParams, ConvergenceReport, RunAnalysis};
use crate::error::{Error, Result};
use crate::synthdata::containment_rate;
use crate::trainer::{
    train, Checkpoint, ExperimentSpec, LossTrace, TrainOutput, TrainState, Variant,
};

/// Environment variable limiting the benchmark worker pool.
pub const WORKERS_ENV: &str = "RACING_GAN_WORKERS";

/// What to run and how to judge it.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Template for every run; variant and seed are overridden per run.
    pub base: ExperimentSpec,
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    pub convergence: ConvergenceParams,
    /// Curves drawn per generator for the final quality check.
    pub eval_samples: usize,
    /// Iterations ignored before measuring generator tracking.
    pub tracking_burn_in: usize,
}

impl BenchConfig {
    pub fn new(base: ExperimentSpec, seeds: Vec<u64>) -> Self {
        BenchConfig {
            base,
            variants: Variant::NAMED.to_vec(),
            seeds,
            convergence: ConvergenceParams::default(),
            eval_samples: 256,
            tracking_burn_in: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidSpec("benchmark needs at least one seed".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidSpec("benchmark needs at least one variant".into()));
        }
        Ok(())
    }

    fn spec_for(&self, variant: Variant, seed: u64) -> ExperimentSpec {
        let mut spec = self.base.clone();
        spec.variant = variant;
        spec.seed = seed;
        if variant != Variant::Custom {
            spec.graph = None;
        }
        spec
    }
}

/// One finished benchmark run with everything worth writing to disk.
pub struct BenchRun {
    pub analysis: RunAnalysis,
    pub trace: LossTrace,
    pub checkpoints: Vec<Checkpoint>,
    pub state: TrainState,
}

/// Score a finished run: convergence per network, generator tracking (k = 2),
/// and final-sample containment/diversity for the best generator.
pub fn analyze_run(
    mut output: TrainOutput,
    spec: &ExperimentSpec,
    convergence: &ConvergenceParams,
    eval_samples: usize,
    tracking_burn_in: usize,
) -> Result<BenchRun> {
    let report =
        ConvergenceReport::from_trace(&output.trace, spec.loss_config.formulation, convergence)?;
    let k = output.state.generator_count();

    let tracking = if k == 2 {
        let g0 = output.trace.generator_losses(0);
        let g1 = output.trace.generator_losses(1);
        let burn_in = tracking_burn_in.min(g0.len().saturating_sub(1));
        Some(crate::analysis::tracking_distance(&g0, &g1, burn_in)?)
    } else {
        None
    };

    let tol = spec.band.eval_tolerance();
    let mut best_generator = 0;
    let mut best_containment = f64::NEG_INFINITY;
    let mut best_samples = Vec::new();
    for i in 0..k {
        let samples = output.state.sample_curves(i, eval_samples)?;
        let rate = containment_rate(&samples, &spec.band, tol)?;
        if rate > best_containment {
            best_containment = rate;
            best_generator = i;
            best_samples = samples;
        }
    }
    let diversity = crate::analysis::diversity_metric(&best_samples, &spec.band).ok();

    Ok(BenchRun {
        analysis: RunAnalysis {
            variant: spec.variant,
            seed: spec.seed,
            report,
            tracking,
            best_containment,
            best_generator,
            diversity,
        },
        trace: output.trace,
        checkpoints: output.checkpoints,
        state: output.state,
    })
}

fn worker_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
            if n == 0 {
                return Err(Error::Config(format!("{WORKERS_ENV} must be >= 1")));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            Ok(Some(pool))
        }
    }
}

/// Run every (variant, seed) pair. Results come back in a fixed
/// (variant-order, seed-order) sequence regardless of scheduling; per-run
/// failures are reported in place rather than aborting the others.
pub fn run_all(config: &BenchConfig) -> Result<Vec<(Variant, u64, Result<BenchRun>)>> {
    config.validate()?;
    let jobs: Vec<(Variant, u64)> = config
        .variants
        .iter()
        .flat_map(|&v| config.seeds.iter().map(move |&s| (v, s)))
        .collect();

    let execute = |(variant, seed): &(Variant, u64)| -> (Variant, u64, Result<BenchRun>) {
        let spec = config.spec_for(*variant, *seed);
        let run = train(spec.clone()).and_then(|out| {
            analyze_run(
                out,
                &spec,
                &config.convergence,
                config.eval_samples,
                config.tracking_burn_in,
            )
        });
        (*variant, *seed, run)
    };

    let results = match worker_pool()? {
        Some(pool) => pool.install(|| jobs.par_iter().map(execute).collect::<Vec<_>>()),
        None => jobs.par_iter().map(execute).collect(),
    };
    Ok(results)
}

/// Run the whole benchmark, failing on the first failed run.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchmarkSummary> {
    let mut analyses = Vec::new();
    for (_, _, run) in run_all(config)? {
        analyses.push(run?.analysis);
    }
    Ok(BenchmarkSummary::from_runs(analyses))
}
