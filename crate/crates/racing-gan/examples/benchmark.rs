//! Mini benchmark: all four variants over a few seeds, with the medians and
//! improvement tables printed at the end.
//!
//!     cargo run --release --example benchmark [seeds] [iterations]
//!
//! The full-size benchmark (10+ seeds at 10k iterations) is what the
//! `racing-gan bench` command runs; this example defaults to a smaller cut so
//! it finishes in a couple of minutes on one core.

use racing_gan::analysis::BenchmarkSummary;
use racing_gan::bench::{run_all, BenchConfig};
use racing_gan::trainer::{ExperimentSpec, Variant};

fn main() -> racing_gan::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(3, |a| a.parse().expect("seed count"));
    let iterations: usize = args.next().map_or(4000, |a| a.parse().expect("iterations"));

    let mut base = ExperimentSpec::new(Variant::Gan1, 0);
    base.iterations = iterations;
    base.checkpoint_iters = vec![];
    let config = BenchConfig::new(base, (0..seeds).collect());

    println!(
        "benchmarking {} variants x {seeds} seeds at {iterations} iterations",
        config.variants.len()
    );
    let started = std::time::Instant::now();
    let results = run_all(&config)?;
    println!("finished {} runs in {:.1?}\n", results.len(), started.elapsed());

    let mut analyses = Vec::new();
    for (variant, seed, result) in results {
        match result {
            Ok(run) => {
                let d = run.analysis.report.discriminator.convergence_iter;
                let g = run.analysis.report.best_generator_iter();
                println!(
                    "  {variant} seed {seed}: D {} G(best) {} containment {:.3}",
                    d.map_or("--".into(), |v| v.to_string()),
                    g.map_or("--".into(), |v| v.to_string()),
                    run.analysis.best_containment
                );
                analyses.push(run.analysis);
            }
            Err(err) => println!("  {variant} seed {seed}: FAILED ({err})"),
        }
    }

    let summary = BenchmarkSummary::from_runs(analyses);
    println!("\n{}", summary.render_tables());
    Ok(())
}
