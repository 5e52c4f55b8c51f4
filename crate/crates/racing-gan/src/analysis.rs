//! Post-hoc analysis: equilibrium targets, the who-converged-when criterion,
//! efficiency improvements against the single-generator baseline, loss
//! tracking between competing generators, and a mode-coverage diagnostic.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::racing_losses::Formulation;
use crate::synthdata::{fit_quadratic, CurveBand, CurveSample};
use crate::trainer::{LossTrace, Variant};

/// Which network a trace column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetRole {
    Discriminator,
    Generator,
}

/// The analytic loss value at the symmetric equilibrium.
///
/// When all k generator distributions match the data, the discriminator's
/// best response against the k-fold fake mixture is `1/(k+1)` everywhere (the
/// fake side carries k units of mass against one of real), so
///
/// * discriminator: `ln(k+1) + k ln((k+1)/k)`
/// * generator: `ln(k+1)`, with every hinge vanishing at symmetry.
///
/// For k = 1 these reduce to the classic two-sided values `2 ln 2` and
/// `ln 2`. Only the standard formulation has a finite equilibrium.
pub fn equilibrium_target(role: NetRole, k: usize, formulation: Formulation) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidSpec("equilibrium target needs k >= 1".into()));
    }
    match formulation {
        Formulation::PaperLiteral => Err(Error::NoAnalyticTarget),
        Formulation::StandardBce => {
            let kf = k as f64;
            Ok(match role {
                NetRole::Discriminator => (kf + 1.0).ln() + kf * ((kf + 1.0) / kf).ln(),
                NetRole::Generator => (kf + 1.0).ln(),
            })
        }
    }
}

/// Tuning of the convergence criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceParams {
    /// Half-width of the acceptance band as a fraction of |target|.
    pub band_frac: f64,
    /// How many consecutive smoothed values must stay inside the band.
    pub window: usize,
    /// Trailing moving-average length (partial windows at the start).
    pub smooth: usize,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        // A persistence horizon makes the +/-1% criterion decidable; the
        // smoothing keeps single-iteration spikes from resetting it.
        ConvergenceParams {
            band_frac: 0.01,
            window: 500,
            smooth: 50,
        }
    }
}

/// Trailing moving average with partial windows at the head.
fn smooth_series(series: &[f64], smooth: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    for &v in series {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..series.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(smooth);
            (prefix[t + 1] - prefix[lo]) / (t + 1 - lo) as f64
        })
        .collect()
}

/// First index `t` such that the smoothed series stays within
/// `band_frac * |target|` of `target` for all of `[t, t + window)`; `None` if
/// that never happens.
pub fn convergence_iteration(
    series: &[f64],
    target: f64,
    band_frac: f64,
    window: usize,
    smooth: usize,
) -> Result<Option<usize>> {
    if target == 0.0 {
        return Err(Error::DegenerateConvergenceBand);
    }
    if window == 0 || smooth == 0 {
        return Err(Error::InvalidSpec("window and smooth must be >= 1".into()));
    }
    if window + smooth > series.len() {
        return Err(Error::InvalidSpec(format!(
            "window {window} + smooth {smooth} exceeds series length {}",
            series.len()
        )));
    }
    let half_width = band_frac * target.abs();
    let smoothed = smooth_series(series, smooth);
    let in_band: Vec<bool> = smoothed.iter().map(|s| (s - target).abs() <= half_width).collect();

    let mut run = 0usize;
    for (t, &ok) in in_band.iter().enumerate() {
        run = if ok { run + 1 } else { 0 };
        if run >= window {
            return Ok(Some(t + 1 - window));
        }
    }
    Ok(None)
}

/// Convergence verdict for one network's loss column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetConvergence {
    pub convergence_iter: Option<usize>,
    pub target: f64,
    pub band_half_width: f64,
    pub window: usize,
}

/// Per-network convergence for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub discriminator: NetConvergence,
    pub generators: Vec<NetConvergence>,
}

impl ConvergenceReport {
    /// Apply the criterion to every column of a trace. A trace shorter than
    /// the persistence horizon (window + smoothing) cannot certify
    /// convergence, so every network reports absent.
    pub fn from_trace(
        trace: &LossTrace,
        formulation: Formulation,
        params: &ConvergenceParams,
    ) -> Result<Self> {
        let k = trace.generator_count();
        let check = |series: Vec<f64>, target: f64| -> Result<NetConvergence> {
            let convergence_iter = if params.window + params.smooth > series.len() {
                None
            } else {
                convergence_iteration(&series, target, params.band_frac, params.window, params.smooth)?
            };
            Ok(NetConvergence {
                convergence_iter,
                target,
                band_half_width: params.band_frac * target.abs(),
                window: params.window,
            })
        };
        let d_target = equilibrium_target(NetRole::Discriminator, k, formulation)?;
        let g_target = equilibrium_target(NetRole::Generator, k, formulation)?;
        Ok(ConvergenceReport {
            discriminator: check(trace.discriminator_losses(), d_target)?,
            generators: (0..k)
                .map(|i| check(trace.generator_losses(i), g_target))
                .collect::<Result<_>>()?,
        })
    }

    /// Earliest generator convergence; the best-performer convention for
    /// efficiency comparisons.
    pub fn best_generator_iter(&self) -> Option<usize> {
        self.generators
            .iter()
            .filter_map(|g| g.convergence_iter)
            .min()
    }
}

/// `(baseline - variant) / baseline * 100`.
pub fn improvement_pct(baseline: f64, variant: f64) -> f64 {
    (baseline - variant) / baseline * 100.0
}

/// Mean absolute gap between two generators' loss curves after a burn-in.
pub fn tracking_distance(trace_g0: &[f64], trace_g1: &[f64], burn_in: usize) -> Result<f64> {
    if trace_g0.len() != trace_g1.len() {
        return Err(Error::InvalidSpec(format!(
            "traces must align: {} vs {}",
            trace_g0.len(),
            trace_g1.len()
        )));
    }
    if burn_in >= trace_g0.len() {
        return Err(Error::InvalidSpec(format!(
            "burn-in {burn_in} exceeds trace length {}",
            trace_g0.len()
        )));
    }
    let tail = trace_g0.len() - burn_in;
    let sum: f64 = trace_g0[burn_in..]
        .iter()
        .zip(&trace_g1[burn_in..])
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / tail as f64)
}

/// Spread of generated curves across the band: fit each sample, recover its
/// position on the lower-to-upper coefficient segment, and return the
/// population standard deviation of those positions. Real data drawn
/// uniformly scores 1/sqrt(12); a collapsed generator scores near 0.
pub fn diversity_metric(samples: &[CurveSample], band: &CurveBand) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidSpec("diversity needs at least 2 samples".into()));
    }
    let lo = band.lower().coeffs();
    let hi = band.upper().coeffs();
    let diff: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
    let den: f64 = diff.iter().map(|d| d * d).sum();
    if den == 0.0 {
        return Err(Error::DegenerateFit("band boundaries coincide".into()));
    }
    let lambdas: Vec<f64> = samples
        .iter()
        .map(|s| {
            let q = fit_quadratic(s, band.grid())?;
            let num: f64 = q
                .coeffs()
                .iter()
                .zip(&lo)
                .zip(&diff)
                .map(|((f, l), d)| (f - l) * d)
                .sum();
            Ok(num / den)
        })
        .collect::<Result<_>>()?;
    let n = lambdas.len() as f64;
    let mean = lambdas.iter().sum::<f64>() / n;
    let var = lambdas.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
    Ok(var.sqrt())
}

/// Analysis attached to one finished run.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub variant: Variant,
    pub seed: u64,
    pub report: ConvergenceReport,
    /// Mean loss gap between the two generators; only for k = 2 runs.
    pub tracking: Option<f64>,
    /// Containment of the best generator's final samples, with the index of
    /// that generator.
    pub best_containment: f64,
    pub best_generator: usize,
    /// Diversity of the best generator's final samples, when the fits succeed.
    pub diversity: Option<f64>,
}

/// All runs of a benchmark plus per-variant aggregates.
#[derive(Debug, Clone)]
pub struct BenchmarkSummary {
    pub runs: Vec<RunAnalysis>,
    pub aggregates: Vec<VariantAggregate>,
}

/// Medians over seeds for one variant, with improvements over the gan1
/// baseline medians.
#[derive(Debug, Clone)]
pub struct VariantAggregate {
    pub variant: Variant,
    pub seeds: usize,
    pub median_d: Option<f64>,
    pub median_best_g: Option<f64>,
    pub improvement_d: Option<f64>,
    pub improvement_g: Option<f64>,
    pub median_tracking: Option<f64>,
    pub median_containment: f64,
}

fn variant_order(v: Variant) -> u8 {
    match v {
        Variant::Gan1 => 0,
        Variant::Gan2 => 1,
        Variant::Gan3 => 2,
        Variant::Gan4 => 3,
        Variant::Custom => 4,
    }
}

/// Median that treats absent values as worse than any number: if the middle
/// of the sorted list lands on an absent entry, the median is absent.
pub fn median_opt(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<Option<f64>> = values.to_vec();
    sorted.sort_by(|a, b| match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(y).expect("finite"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        match (sorted[n / 2 - 1], sorted[n / 2]) {
            (Some(a), Some(b)) => Some((a + b) / 2.0),
            _ => None,
        }
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    median_opt(&values.iter().map(|&v| Some(v)).collect::<Vec<_>>())
}

impl BenchmarkSummary {
    /// Sort runs deterministically and derive the per-variant aggregates,
    /// comparing every variant against the gan1 baseline medians.
    pub fn from_runs(mut runs: Vec<RunAnalysis>) -> Self {
        runs.sort_by_key(|r| (variant_order(r.variant), r.seed));
        let mut variants: Vec<Variant> = Vec::new();
        for r in &runs {
            if !variants.contains(&r.variant) {
                variants.push(r.variant);
            }
        }

        let collect = |variant: Variant| -> Vec<&RunAnalysis> {
            runs.iter().filter(|r| r.variant == variant).collect()
        };
        let medians = |variant: Variant| -> (Option<f64>, Option<f64>) {
            let rs = collect(variant);
            let d: Vec<Option<f64>> = rs
                .iter()
                .map(|r| r.report.discriminator.convergence_iter.map(|v| v as f64))
                .collect();
            let g: Vec<Option<f64>> = rs
                .iter()
                .map(|r| r.report.best_generator_iter().map(|v| v as f64))
                .collect();
            (median_opt(&d), median_opt(&g))
        };

        let (base_d, base_g) = medians(Variant::Gan1);
        let aggregates = variants
            .iter()
            .map(|&variant| {
                let rs = collect(variant);
                let (median_d, median_best_g) = medians(variant);
                let improvement = |base: Option<f64>, var: Option<f64>| match (base, var) {
                    (Some(b), Some(v)) if b != 0.0 => Some(improvement_pct(b, v)),
                    _ => None,
                };
                let tracking: Vec<Option<f64>> = rs.iter().map(|r| r.tracking).collect();
                let median_tracking = if tracking.iter().all(Option::is_none) {
                    None
                } else {
                    median_opt(&tracking)
                };
                let containment =
                    median(&rs.iter().map(|r| r.best_containment).collect::<Vec<_>>())
                        .unwrap_or(0.0);
                VariantAggregate {
                    variant,
                    seeds: rs.len(),
                    median_d,
                    median_best_g,
                    improvement_d: improvement(base_d, median_d),
                    improvement_g: improvement(base_g, median_best_g),
                    median_tracking,
                    median_containment: containment,
                }
            })
            .collect();
        BenchmarkSummary { runs, aggregates }
    }

    pub fn aggregate(&self, variant: Variant) -> Option<&VariantAggregate> {
        self.aggregates.iter().find(|a| a.variant == variant)
    }

    /// Machine rows: `variant,seed,net,convergence_iter,target,improvement_pct`.
    ///
    /// The improvement column compares against the same-seed gan1 run: the
    /// discriminator row against gan1's discriminator, the best generator row
    /// against gan1's generator. Absent values stay empty rather than 0.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "variant,seed,net,convergence_iter,target,improvement_pct")?;
        for run in &self.runs {
            let baseline = self
                .runs
                .iter()
                .find(|r| r.variant == Variant::Gan1 && r.seed == run.seed);
            let base_d = baseline.and_then(|b| b.report.discriminator.convergence_iter);
            let base_g = baseline.and_then(|b| b.report.best_generator_iter());
            let best_g = self.best_generator_index(run);

            let mut rows: Vec<(String, Option<usize>, f64, Option<f64>)> = Vec::new();
            let d = &run.report.discriminator;
            let d_improvement = match (base_d, d.convergence_iter) {
                (Some(b), Some(v)) => Some(improvement_pct(b as f64, v as f64)),
                _ => None,
            };
            rows.push(("d".into(), d.convergence_iter, d.target, d_improvement));
            for (i, g) in run.report.generators.iter().enumerate() {
                let imp = if Some(i) == best_g {
                    match (base_g, g.convergence_iter) {
                        (Some(b), Some(v)) => Some(improvement_pct(b as f64, v as f64)),
                        _ => None,
                    }
                } else {
                    None
                };
                rows.push((format!("g{i}"), g.convergence_iter, g.target, imp));
            }
            for (net, iter, target, imp) in rows {
                let iter = iter.map_or(String::new(), |v| v.to_string());
                let imp = imp.map_or(String::new(), |v| format!("{v:.2}"));
                writeln!(out, "{},{},{net},{iter},{target},{imp}", run.variant, run.seed)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    fn best_generator_index(&self, run: &RunAnalysis) -> Option<usize> {
        let best = run.report.best_generator_iter()?;
        run.report
            .generators
            .iter()
            .position(|g| g.convergence_iter == Some(best))
    }

    /// Human-readable medians table plus the improvement table.
    pub fn render_tables(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or("--".to_string(), |x| format!("{x:.0}"));
        let fmt_pct = |v: Option<f64>| v.map_or("--".to_string(), |x| format!("{x:.2}%"));
        let mut s = String::new();
        s.push_str(&format!(
            "Median convergence iteration over seeds\n{:<10}{:>10}{:>12}{:>14}{:>14}\n",
            "variant", "D", "G(best)", "tracking", "containment"
        ));
        for a in &self.aggregates {
            let tracking = a
                .median_tracking
                .map_or("--".to_string(), |t| format!("{t:.4}"));
            s.push_str(&format!(
                "{:<10}{:>10}{:>12}{:>14}{:>14.3}\n",
                a.variant.name(),
                fmt_opt(a.median_d),
                fmt_opt(a.median_best_g),
                tracking,
                a.median_containment
            ));
        }
        s.push_str(&format!(
            "\nImprovement over gan1\n{:<10}{:>10}{:>12}\n",
            "variant", "D", "G(best)"
        ));
        for a in self.aggregates.iter().filter(|a| a.variant != Variant::Gan1) {
            s.push_str(&format!(
                "{:<10}{:>10}{:>12}\n",
                a.variant.name(),
                fmt_pct(a.improvement_d),
                fmt_pct(a.improvement_g)
            ));
        }
        s
    }
}
