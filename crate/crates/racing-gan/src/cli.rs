//! Command implementations behind the `racing-gan` binary: single runs, the
//! multi-seed benchmark, and trace plotting. Everything lands under the
//! configured output directory.

use std::path::{Path, PathBuf};

use crate::bench::{analyze_run, run_all, BenchRun};
use crate::config::RunConfig;
use crate::diffcore::OptimMethod;
use crate::error::{Error, Result};
use crate::models::write_parameter_snapshot;
use crate::plot::write_loss_svg;
use crate::racing_losses::{Formulation, HingeConvention};
use crate::synthdata::write_curve_csv;
use crate::trainer::{read_trace_csv, train, ExperimentSpec, Variant};

/// CLI-flag overrides; every scalar config field can be forced from the
/// command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub iterations: Option<usize>,
    pub batch_size: Option<usize>,
    pub optimizer: Option<OptimMethod>,
    pub lr_d: Option<f64>,
    pub lr_g: Option<f64>,
    pub latent_dim: Option<usize>,
    pub formulation: Option<Formulation>,
    pub hinge_convention: Option<HingeConvention>,
    pub out_dir: Option<PathBuf>,
    pub no_plots: bool,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        let e = &mut config.experiment;
        if let Some(v) = self.variant {
            e.variant = v;
            if v != Variant::Custom {
                e.coupling = None;
            }
        }
        if let Some(s) = self.seed {
            config.seeds = vec![s];
        }
        if let Some(seeds) = &self.seeds {
            config.seeds = seeds.clone();
        }
        if let Some(n) = self.iterations {
            e.iterations = n;
        }
        if let Some(b) = self.batch_size {
            e.batch_size = b;
        }
        if let Some(o) = self.optimizer {
            e.optimizer = o;
        }
        if let Some(lr) = self.lr_d {
            e.lr_d = lr;
        }
        if let Some(lr) = self.lr_g {
            e.lr_g = lr;
        }
        if let Some(l) = self.latent_dim {
            e.latent_dim = l;
        }
        if let Some(f) = self.formulation {
            e.formulation = f;
        }
        if let Some(h) = self.hinge_convention {
            e.hinge_convention = h;
        }
        if let Some(dir) = &self.out_dir {
            config.out_dir = dir.clone();
        }
        if self.no_plots {
            config.plots = false;
        }
    }
}

/// Map an error to the process exit code: 2 for configuration problems, 3 for
/// numerical failures, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Io(_)
        | Error::InvalidSpec(_)
        | Error::InvalidBand(_)
        | Error::MalformedCsv { .. } => 2,
        Error::NonFinite { .. } | Error::NonFiniteLoss { .. } => 3,
        _ => 1,
    }
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}

fn run_stem(spec: &ExperimentSpec) -> String {
    format!("{}_seed{}", spec.variant, spec.seed)
}

fn write_run_artifacts(
    out_dir: &Path,
    spec: &ExperimentSpec,
    run: &BenchRun,
    plots: bool,
) -> Result<()> {
    let stem = run_stem(spec);
    run.trace.write_csv(&out_dir.join(format!("{stem}_trace.csv")))?;
    for cp in &run.checkpoints {
        let name = format!("{stem}_iter{}_gen{}.csv", cp.iteration, cp.generator);
        write_curve_csv(&out_dir.join(name), &spec.band, &cp.samples)?;
    }
    if plots {
        write_loss_svg(&run.trace, &out_dir.join(format!("{stem}_loss.svg")))?;
    }
    Ok(())
}

fn print_run_report(run: &BenchRun) {
    let a = &run.analysis;
    let fmt = |v: Option<usize>| v.map_or("--".to_string(), |x| x.to_string());
    println!("run {} seed {}", a.variant, a.seed);
    println!(
        "  D  : target {:.4}, converged at {}",
        a.report.discriminator.target,
        fmt(a.report.discriminator.convergence_iter)
    );
    for (i, g) in a.report.generators.iter().enumerate() {
        println!(
            "  G{} : target {:.4}, converged at {}",
            i,
            g.target,
            fmt(g.convergence_iter)
        );
    }
    if let Some(t) = a.tracking {
        println!("  generator tracking distance: {t:.4}");
    }
    println!(
        "  best generator g{}: containment {:.3}{}",
        a.best_generator,
        a.best_containment,
        a.diversity
            .map_or(String::new(), |d| format!(", diversity {d:.4}"))
    );
}

/// Train and analyze one (variant, seed); write trace, checkpoint dumps,
/// parameter snapshots, a per-run report CSV and optionally the loss plot.
pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let config = load_config(config_path, overrides)?;
    let seed = config.seeds[0];
    let spec = config.experiment_spec(seed)?;
    std::fs::create_dir_all(&config.out_dir)?;

    let output = train(spec.clone())?;
    let bench_config = config.bench_config()?;
    let run = analyze_run(
        output,
        &spec,
        &bench_config.convergence,
        bench_config.eval_samples,
        bench_config.tracking_burn_in,
    )?;

    write_run_artifacts(&config.out_dir, &spec, &run, config.plots)?;
    let stem = run_stem(&spec);
    write_parameter_snapshot(
        &config.out_dir.join(format!("{stem}_params_d.csv")),
        &run.state.discriminator.params,
    )?;
    for (i, g) in run.state.generators.iter().enumerate() {
        write_parameter_snapshot(
            &config.out_dir.join(format!("{stem}_params_g{i}.csv")),
            &g.params,
        )?;
    }
    let summary = crate::analysis::BenchmarkSummary::from_runs(vec![run.analysis.clone()]);
    summary.write_csv(&config.out_dir.join(format!("{stem}_report.csv")))?;

    print_run_report(&run);
    println!("outputs in {}", config.out_dir.display());
    Ok(())
}

/// Run all four variants over every seed, write per-run artifacts plus the
/// aggregated summary. Fails (after writing what it can) if any run failed.
pub fn cmd_bench(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let config = load_config(config_path, overrides)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let bench_config = config.bench_config()?;

    let results = run_all(&bench_config)?;
    let mut analyses = Vec::new();
    let mut failures = Vec::new();
    for (variant, seed, result) in results {
        match result {
            Ok(run) => {
                let mut spec = bench_config.base.clone();
                spec.variant = variant;
                spec.seed = seed;
                if variant != Variant::Custom {
                    spec.graph = None;
                }
                write_run_artifacts(&config.out_dir, &spec, &run, config.plots)?;
                analyses.push(run.analysis);
            }
            Err(err) => {
                eprintln!("run {variant} seed {seed} failed: {err}");
                failures.push((variant, seed, err));
            }
        }
    }

    if !analyses.is_empty() {
        let summary = crate::analysis::BenchmarkSummary::from_runs(analyses);
        summary.write_csv(&config.out_dir.join("summary.csv"))?;
        print!("{}", summary.render_tables());
        println!("\nsummary written to {}", config.out_dir.join("summary.csv").display());
    }

    match failures.into_iter().next() {
        None => Ok(()),
        Some((_, _, err)) => Err(err),
    }
}

/// Render loss plots for existing trace CSVs. Output files take the trace's
/// name with an `.svg` extension, in `out_dir` when given, else next to the
/// trace.
pub fn cmd_plot(traces: &[PathBuf], out_dir: Option<&Path>) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::Config("plot needs at least one trace CSV".into()));
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    for trace_path in traces {
        let trace = read_trace_csv(trace_path)?;
        let mut out = match out_dir {
            Some(dir) => dir.join(trace_path.file_name().ok_or_else(|| {
                Error::Config(format!("not a file: {}", trace_path.display()))
            })?),
            None => trace_path.clone(),
        };
        out.set_extension("svg");
        write_loss_svg(&trace, &out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

/// String parsers for the flag values.
pub mod parse {
    use super::*;

    pub fn variant(s: &str) -> std::result::Result<Variant, String> {
        match s {
            "gan1" => Ok(Variant::Gan1),
            "gan2" => Ok(Variant::Gan2),
            "gan3" => Ok(Variant::Gan3),
            "gan4" => Ok(Variant::Gan4),
            "custom" => Ok(Variant::Custom),
            other => Err(format!("unknown variant {other:?} (gan1|gan2|gan3|gan4|custom)")),
        }
    }

    pub fn formulation(s: &str) -> std::result::Result<Formulation, String> {
        match s {
            "standard_bce" => Ok(Formulation::StandardBce),
            "paper_literal" => Ok(Formulation::PaperLiteral),
            other => Err(format!("unknown formulation {other:?} (standard_bce|paper_literal)")),
        }
    }

    pub fn hinge_convention(s: &str) -> std::result::Result<HingeConvention, String> {
        match s {
            "lag_penalty" => Ok(HingeConvention::LagPenalty),
            "lead_penalty" => Ok(HingeConvention::LeadPenalty),
            other => Err(format!("unknown convention {other:?} (lag_penalty|lead_penalty)")),
        }
    }

    pub fn optimizer(s: &str) -> std::result::Result<OptimMethod, String> {
        match s {
            "sgd" => Ok(OptimMethod::Sgd),
            "adam" => Ok(OptimMethod::Adam),
            other => Err(format!("unknown optimizer {other:?} (sgd|adam)")),
        }
    }
}
