//! The four benchmark variants as coupling graphs, plus a custom three-way
//! ring, with the coupled losses evaluated at hand-picked scores.
//!
//!     cargo run --example coupling_graphs

use racing_gan::diffcore::{Tape, Tensor};
use racing_gan::racing_losses::{
    discriminator_loss, generator_loss, CouplingGraph, Formulation, HingeConvention, LossConfig,
};
use racing_gan::trainer::{build_variant, Variant};

fn main() -> racing_gan::Result<()> {
    for variant in Variant::NAMED {
        let (k, graph) = build_variant(variant)?;
        let edges: Vec<_> = graph.edges().collect();
        println!("{variant}: k = {k}, edges = {edges:?}");
    }

    let ring = CouplingGraph::new(3, [(0, 1), (1, 2), (2, 0)])?;
    println!("custom ring: k = 3, edges = {:?}", ring.edges().collect::<Vec<_>>());
    let full = CouplingGraph::fully_connected(3)?;
    println!("fully connected k=3 has {} edges\n", full.edge_count());

    // Evaluate the coupled losses at fixed scores: generator 0 trails (0.4),
    // generator 1 leads (0.7), real scores 0.8.
    let mut tape = Tape::new();
    let real = tape.leaf(Tensor::filled(4, 1, 0.8), false)?;
    let trailing = tape.leaf(Tensor::filled(4, 1, 0.4), false)?;
    let leading = tape.leaf(Tensor::filled(4, 1, 0.7), false)?;

    let d_loss = discriminator_loss(&mut tape, real, &[trailing, leading], Formulation::StandardBce)?;
    println!("discriminator loss at (0.8 | 0.4, 0.7): {:.4}", tape.value(d_loss).item());

    let (_, gan4) = build_variant(Variant::Gan4)?;
    for convention in [HingeConvention::LagPenalty, HingeConvention::LeadPenalty] {
        let config = LossConfig {
            formulation: Formulation::StandardBce,
            hinge_convention: convention,
        };
        let l0 = generator_loss(&mut tape, 0, &[trailing, leading], &gan4, config)?;
        let l1 = generator_loss(&mut tape, 1, &[trailing, leading], &gan4, config)?;
        println!(
            "{convention}: trailing generator pays {:.4}, leading pays {:.4}",
            tape.value(l0).item(),
            tape.value(l1).item()
        );
    }
    println!("(base terms alone: trailing -ln 0.4 = {:.4}, leading -ln 0.7 = {:.4})",
        -(0.4f64.ln()),
        -(0.7f64.ln())
    );
    Ok(())
}
