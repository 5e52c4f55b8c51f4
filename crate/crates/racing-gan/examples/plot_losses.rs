//! Short training run, trace CSV round trip, SVG loss plot.
//!
//!     cargo run --release --example plot_losses

use racing_gan::plot::write_loss_svg;
use racing_gan::trainer::{read_trace_csv, train, ExperimentSpec, Variant};

fn main() -> racing_gan::Result<()> {
    let mut spec = ExperimentSpec::new(Variant::Gan4, 1);
    spec.iterations = 1500;
    spec.checkpoint_iters = vec![];

    println!("training {} for {} iterations...", spec.variant, spec.iterations);
    let output = train(spec)?;

    let out = std::path::Path::new("out/plot_losses");
    std::fs::create_dir_all(out)?;
    let csv = out.join("gan4_seed1_trace.csv");
    output.trace.write_csv(&csv)?;

    // Same path the `plot` subcommand takes: parse the CSV, then render.
    let trace = read_trace_csv(&csv)?;
    let svg = out.join("gan4_seed1_loss.svg");
    write_loss_svg(&trace, &svg)?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
