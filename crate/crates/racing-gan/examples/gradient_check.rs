//! Verify tape gradients against central finite differences, through the full
//! loss stack: discriminator loss, and generator losses with the hinge
//! inactive and active under both conventions.
//!
//!     cargo run --release --example gradient_check

use racing_gan::diffcore::gradcheck::{check_grads, FD_STEP};
use racing_gan::diffcore::{ParameterSet, Tape, Tensor};
use racing_gan::models::{sample_latent, DiscriminatorNet, GeneratorNet};
use racing_gan::racing_losses::{
    discriminator_loss, generator_loss, CouplingGraph, Formulation, HingeConvention, LossConfig,
};
use racing_gan::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (latent, n, batch) = (3, 5, 4);
    let g = GeneratorNet::new(latent, &[6], n, &mut rng)?;
    let d = DiscriminatorNet::new(n, &[6], &mut rng)?;
    let z = sample_latent(latent, batch, &mut rng)?;
    let real = Tensor::from_fn(batch, n, |i, j| 0.2 * (i as f64) + 0.05 * (j as f64));

    // Discriminator loss w.r.t. discriminator parameters.
    {
        let build = |dp: &ParameterSet| -> Result<(Tape, Vec<_>, _)> {
            let mut d = d.clone();
            d.params = dp.clone();
            let mut tape = Tape::new();
            let dh = d.attach(&mut tape, true)?;
            let gh = g.attach(&mut tape, false)?;
            let real_v = tape.constant(real.clone())?;
            let zv = tape.constant(z.clone())?;
            let fake = g.generate(&mut tape, &gh, zv)?;
            let d_real = d.discriminate(&mut tape, &dh, real_v)?;
            let d_fake = d.discriminate(&mut tape, &dh, fake)?;
            let loss = discriminator_loss(&mut tape, d_real, &[d_fake], Formulation::StandardBce)?;
            Ok((tape, dh.vars().to_vec(), loss))
        };
        let (mut tape, vars, loss) = build(&d.params)?;
        tape.backward(loss)?;
        let analytic: Vec<Tensor> = vars.iter().map(|&v| tape.grad(v).unwrap().clone()).collect();
        let mut dp = d.params.clone();
        let report = check_grads(&mut dp, &analytic, FD_STEP, |dp| {
            let (tape, _, loss) = build(dp)?;
            Ok(tape.value(loss).item())
        })?;
        println!(
            "discriminator loss: {} entries, max rel err {:.3e}",
            report.entries, report.max_rel_err
        );
    }

    // Generator loss w.r.t. generator parameters, hinge active and inactive.
    for (label, opponent_score, convention) in [
        ("generator loss, no edge", None, HingeConvention::LagPenalty),
        ("generator loss, lag hinge active", Some(0.95), HingeConvention::LagPenalty),
        ("generator loss, lag hinge inactive", Some(0.05), HingeConvention::LagPenalty),
        ("generator loss, lead hinge active", Some(0.05), HingeConvention::LeadPenalty),
        ("generator loss, lead hinge inactive", Some(0.95), HingeConvention::LeadPenalty),
    ] {
        let graph = match opponent_score {
            None => CouplingGraph::uncoupled(2),
            Some(_) => CouplingGraph::new(2, [(0, 1)])?,
        };
        let config = LossConfig {
            formulation: Formulation::StandardBce,
            hinge_convention: convention,
        };
        let build = |gp: &ParameterSet| -> Result<(Tape, Vec<_>, _)> {
            let mut g = g.clone();
            g.params = gp.clone();
            let mut tape = Tape::new();
            let gh = g.attach(&mut tape, true)?;
            let dh = d.attach(&mut tape, false)?;
            let zv = tape.constant(z.clone())?;
            let fake = g.generate(&mut tape, &gh, zv)?;
            let own = d.discriminate(&mut tape, &dh, fake)?;
            let opp = tape.constant(Tensor::filled(batch, 1, opponent_score.unwrap_or(0.5)))?;
            let loss = generator_loss(&mut tape, 0, &[own, opp], &graph, config)?;
            Ok((tape, gh.vars().to_vec(), loss))
        };
        let (mut tape, vars, loss) = build(&g.params)?;
        tape.backward(loss)?;
        let analytic: Vec<Tensor> = vars.iter().map(|&v| tape.grad(v).unwrap().clone()).collect();
        let mut gp = g.params.clone();
        let report = check_grads(&mut gp, &analytic, FD_STEP, |gp| {
            let (tape, _, loss) = build(gp)?;
            Ok(tape.value(loss).item())
        })?;
        println!("{label}: {} entries, max rel err {:.3e}", report.entries, report.max_rel_err);
        assert!(report.max_rel_err < 1e-4);
    }

    println!("all gradients match finite differences");
    Ok(())
}
