//! Train one racing pair (gan4) end to end and report what it learned.
//!
//!     cargo run --release --example train_single [iterations] [seed]
//!
//! Prints loss milestones during training, the convergence verdict for every
//! network, generator tracking, and final sample quality; writes the trace
//! CSV, checkpoint curve dumps and a loss plot into `out/train_single/`.

use racing_gan::analysis::{ConvergenceParams, ConvergenceReport};
use racing_gan::bench::analyze_run;
use racing_gan::plot::write_loss_svg;
use racing_gan::synthdata::write_curve_csv;
use racing_gan::trainer::{train, ExperimentSpec, Variant};

fn main() -> racing_gan::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations: usize = args.next().map_or(10_000, |a| a.parse().expect("iterations"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));

    let mut spec = ExperimentSpec::new(Variant::Gan4, seed);
    spec.iterations = iterations;

    println!(
        "training {} for {} iterations (seed {seed}, batch {}, {} optimizer)",
        spec.variant, spec.iterations, spec.batch_size, spec.optimizer
    );
    let started = std::time::Instant::now();
    let output = train(spec.clone())?;
    let elapsed = started.elapsed();

    for record in output
        .trace
        .records()
        .iter()
        .filter(|r| r.iteration % (iterations / 10).max(1) == 0 || r.iteration == 1)
    {
        println!(
            "  iter {:>6}  loss_d {:>8.4}  loss_g0 {:>8.4}  loss_g1 {:>8.4}",
            record.iteration, record.loss_d, record.loss_g[0], record.loss_g[1]
        );
    }
    println!("trained in {:.1?} ({:.2} ms/iter)", elapsed, elapsed.as_secs_f64() * 1e3 / iterations as f64);

    let report = ConvergenceReport::from_trace(
        &output.trace,
        spec.loss_config.formulation,
        &ConvergenceParams::default(),
    )?;
    let show = |name: &str, c: &racing_gan::analysis::NetConvergence| {
        println!(
            "  {name}: target {:.4}, band +/-{:.4}, converged at {}",
            c.target,
            c.band_half_width,
            c.convergence_iter.map_or("--".into(), |v| v.to_string())
        );
    };
    println!("convergence (within 1% of target for {} iterations):", report.discriminator.window);
    show("D ", &report.discriminator);
    for (i, g) in report.generators.iter().enumerate() {
        show(&format!("G{i}"), g);
    }

    let run = analyze_run(output, &spec, &ConvergenceParams::default(), 256, 1000)?;
    println!(
        "tracking distance between generators: {:.4}",
        run.analysis.tracking.expect("two generators")
    );
    println!(
        "best generator g{}: containment {:.3} (tol {:.3}), diversity {}",
        run.analysis.best_generator,
        run.analysis.best_containment,
        spec.band.eval_tolerance(),
        run.analysis
            .diversity
            .map_or("--".into(), |d| format!("{d:.4}"))
    );

    let out_dir = std::path::Path::new("out/train_single");
    std::fs::create_dir_all(out_dir)?;
    let stem = format!("{}_seed{seed}", spec.variant);
    run.trace.write_csv(&out_dir.join(format!("{stem}_trace.csv")))?;
    for cp in &run.checkpoints {
        let name = format!("{stem}_iter{}_gen{}.csv", cp.iteration, cp.generator);
        write_curve_csv(&out_dir.join(name), &spec.band, &cp.samples)?;
    }
    write_loss_svg(&run.trace, &out_dir.join(format!("{stem}_loss.svg")))?;
    println!("artifacts in {}", out_dir.display());
    Ok(())
}
