//! Acceptance suite. Each test prints a `[PASS]`/`[FAIL]` line for its
//! criterion (visible with `--nocapture`) and asserts it.
//!
//! Criteria 4, 5 and 6 share one full-size benchmark (all four variants over
//! ten seeds at default settings), computed once and reused.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use racing_gan::analysis::{
    BenchmarkSummary, ConvergenceReport, NetConvergence, RunAnalysis,
};
use racing_gan::bench::{run_benchmark, BenchConfig};
use racing_gan::diffcore::gradcheck::{check_grads, FD_STEP};
use racing_gan::diffcore::{ParameterSet, Tape, Tensor, Var};
use racing_gan::models::{sample_latent, DiscriminatorNet, GeneratorNet};
use racing_gan::racing_losses::{
    discriminator_loss, generator_loss, hinge_penalty, CouplingGraph, Formulation,
    HingeConvention, LossConfig,
};
use racing_gan::trainer::{build_variant, train, ExperimentSpec, Trainer, Variant};
use racing_gan::Result;

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

// ---------------------------------------------------------------------------
// Criterion 1: autodiff gradients of every loss (hinges active and inactive)
// match central finite differences to rel. error < 1e-4 on >= 20 random MLPs.
// ---------------------------------------------------------------------------

enum LossCase {
    DiscStandard,
    DiscLiteral,
    GenUncoupled,
    GenHinge(HingeConvention, /*active:*/ bool),
}

fn loss_case(idx: usize) -> LossCase {
    match idx % 7 {
        0 => LossCase::DiscStandard,
        1 => LossCase::DiscLiteral,
        2 => LossCase::GenUncoupled,
        3 => LossCase::GenHinge(HingeConvention::LagPenalty, true),
        4 => LossCase::GenHinge(HingeConvention::LagPenalty, false),
        5 => LossCase::GenHinge(HingeConvention::LeadPenalty, true),
        _ => LossCase::GenHinge(HingeConvention::LeadPenalty, false),
    }
}

struct Instance {
    g: GeneratorNet,
    d: DiscriminatorNet,
    z: Tensor,
    real: Tensor,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let latent = rng.gen_range(2..=4);
    let n = rng.gen_range(3..=6);
    let batch = rng.gen_range(2..=5);
    let g_hidden = vec![rng.gen_range(3..=8)];
    let d_hidden = vec![rng.gen_range(3..=8), rng.gen_range(3..=6)];
    let g = GeneratorNet::new(latent, &g_hidden, n, rng).unwrap();
    let d = DiscriminatorNet::new(n, &d_hidden, rng).unwrap();
    let z = sample_latent(latent, batch, rng).unwrap();
    let real = Tensor::from_fn(batch, n, |_, _| rng.gen_range(-1.0..1.0));
    Instance { g, d, z, real }
}

/// Build the case's loss on a fresh tape over the given parameter values for
/// whichever net is being trained; returns the tape, the trainable leaves and
/// the loss node.
fn build_case(
    case: &LossCase,
    inst: &Instance,
    trained: &ParameterSet,
) -> Result<(Tape, Vec<Var>, Var)> {
    let mut tape = Tape::new();
    match case {
        LossCase::DiscStandard | LossCase::DiscLiteral => {
            let formulation = match case {
                LossCase::DiscStandard => Formulation::StandardBce,
                _ => Formulation::PaperLiteral,
            };
            let mut d = inst.d.clone();
            d.params = trained.clone();
            let dh = d.attach(&mut tape, true)?;
            let gh = inst.g.attach(&mut tape, false)?;
            let real = tape.constant(inst.real.clone())?;
            let zv = tape.constant(inst.z.clone())?;
            let fake = inst.g.generate(&mut tape, &gh, zv)?;
            let d_real = d.discriminate(&mut tape, &dh, real)?;
            let d_fake = d.discriminate(&mut tape, &dh, fake)?;
            let loss = discriminator_loss(&mut tape, d_real, &[d_fake], formulation)?;
            Ok((tape, dh.vars().to_vec(), loss))
        }
        LossCase::GenUncoupled | LossCase::GenHinge(..) => {
            let mut g = inst.g.clone();
            g.params = trained.clone();
            let gh = g.attach(&mut tape, true)?;
            let dh = inst.d.attach(&mut tape, false)?;
            let zv = tape.constant(inst.z.clone())?;
            let fake = g.generate(&mut tape, &gh, zv)?;
            let own = inst.d.discriminate(&mut tape, &dh, fake)?;
            let batch = inst.z.rows();
            // Opponent scores far from the own scores (which stay in roughly
            // (0.1, 0.9) for these small nets) pin the hinge uniformly active
            // or inactive, with margin >> the FD step.
            let (graph, config, opp_value) = match case {
                LossCase::GenUncoupled => {
                    (CouplingGraph::uncoupled(2), LossConfig::default(), 0.5)
                }
                LossCase::GenHinge(convention, active) => {
                    let opp_value = match (convention, active) {
                        (HingeConvention::LagPenalty, true) => 0.999,
                        (HingeConvention::LagPenalty, false) => 0.001,
                        (HingeConvention::LeadPenalty, true) => 0.001,
                        (HingeConvention::LeadPenalty, false) => 0.999,
                    };
                    let config = LossConfig {
                        formulation: Formulation::StandardBce,
                        hinge_convention: *convention,
                    };
                    (CouplingGraph::new(2, [(0, 1)])?, config, opp_value)
                }
                _ => unreachable!(),
            };
            let opp = tape.constant(Tensor::filled(batch, 1, opp_value))?;
            let loss = generator_loss(&mut tape, 0, &[own, opp], &graph, config)?;
            Ok((tape, gh.vars().to_vec(), loss))
        }
    }
}

#[test]
fn criterion_1_gradient_oracle() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut total_entries = 0;
    let instances = 21;
    for idx in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + idx as u64);
        let inst = random_instance(&mut rng);
        let case = loss_case(idx);
        let mut trained = match case {
            LossCase::DiscStandard | LossCase::DiscLiteral => inst.d.params.clone(),
            _ => inst.g.params.clone(),
        };

        let (mut tape, vars, loss) = build_case(&case, &inst, &trained).unwrap();
        tape.backward(loss).unwrap();
        let analytic: Vec<Tensor> = vars
            .iter()
            .map(|&v| tape.grad(v).unwrap().clone())
            .collect();

        let report = check_grads(&mut trained, &analytic, FD_STEP, |params| {
            let (tape, _, loss) = build_case(&case, &inst, params)?;
            Ok(tape.value(loss).item())
        })
        .unwrap();
        worst = worst.max(report.max_rel_err);
        total_entries += report.entries;
    }
    let elapsed = started.elapsed();
    let pass = worst < 1e-4 && elapsed.as_secs_f64() < 10.0;
    verdict(
        "1 (gradient oracle)",
        pass,
        &format!(
            "{instances} instances, {total_entries} gradient entries, max rel err {worst:.3e}, {elapsed:.2?}"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: discriminator_loss at all-0.5 scores equals (k+1) ln 2 to
// 1e-12 for k in {1, 2, 4}; generator_loss at symmetric scores equals ln 2
// with zero hinge contribution.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_analytic_equilibria() {
    let ln2 = std::f64::consts::LN_2;
    let mut detail = String::new();
    let mut pass = true;
    for k in [1usize, 2, 4] {
        let mut tape = Tape::new();
        let real = tape.leaf(Tensor::filled(6, 1, 0.5), false).unwrap();
        let fakes: Vec<Var> = (0..k)
            .map(|_| tape.leaf(Tensor::filled(6, 1, 0.5), false).unwrap())
            .collect();
        let loss = discriminator_loss(&mut tape, real, &fakes, Formulation::StandardBce).unwrap();
        let got = tape.value(loss).item();
        let want = (k + 1) as f64 * ln2;
        let err = (got - want).abs();
        pass &= err <= 1e-12;
        detail.push_str(&format!("k={k}: |D - {}ln2| = {err:.2e}; ", k + 1));
    }

    // Symmetric generator scores through a coupled graph: base term ln 2,
    // hinge exactly zero.
    let mut tape = Tape::new();
    let own = tape.leaf(Tensor::filled(6, 1, 0.5), false).unwrap();
    let opp = tape.leaf(Tensor::filled(6, 1, 0.5), false).unwrap();
    let graph = CouplingGraph::new(2, [(0, 1)]).unwrap();
    let coupled = generator_loss(&mut tape, 0, &[own, opp], &graph, LossConfig::default()).unwrap();
    let uncoupled = generator_loss(
        &mut tape,
        0,
        &[own, opp],
        &CouplingGraph::uncoupled(2),
        LossConfig::default(),
    )
    .unwrap();
    let g_err = (tape.value(coupled).item() - ln2).abs();
    let hinge_is_zero = tape.value(coupled).item() == tape.value(uncoupled).item();
    pass &= g_err <= 1e-12 && hinge_is_zero;
    detail.push_str(&format!("|G - ln2| = {g_err:.2e}, hinge contribution zero: {hinge_is_zero}"));
    verdict("2 (analytic equilibria)", pass, &detail);
}

// ---------------------------------------------------------------------------
// Criterion 3: the improvement table reproduces the reported efficiency
// percentages from the reported convergence iterations.
// ---------------------------------------------------------------------------

fn synthetic_run(variant: Variant, d_iter: usize, g_iters: &[usize]) -> RunAnalysis {
    let net = |iter: usize, target: f64| NetConvergence {
        convergence_iter: Some(iter),
        target,
        band_half_width: 0.01 * target,
        window: 500,
    };
    RunAnalysis {
        variant,
        seed: 0,
        report: ConvergenceReport {
            discriminator: net(d_iter, 2.0),
            generators: g_iters.iter().map(|&g| net(g, 0.7)).collect(),
        },
        tracking: None,
        best_containment: 1.0,
        best_generator: 0,
        diversity: None,
    }
}

#[test]
fn criterion_3_improvement_table_arithmetic() {
    let summary = BenchmarkSummary::from_runs(vec![
        synthetic_run(Variant::Gan1, 9348, &[8107]),
        synthetic_run(Variant::Gan4, 7728, &[6049, 4944]),
    ]);
    let gan1 = summary.aggregate(Variant::Gan1).unwrap();
    let gan4 = summary.aggregate(Variant::Gan4).unwrap();
    let d = gan4.improvement_d.unwrap();
    let g = gan4.improvement_g.unwrap();
    let self_d = gan1.improvement_d.unwrap();
    let pass = (d - 17.33).abs() <= 0.01 && (g - 39.02).abs() <= 0.01 && self_d == 0.0;
    verdict(
        "3 (improvement-table arithmetic)",
        pass,
        &format!("D {d:.4}% (want 17.33 +/- 0.01), G(best) {g:.4}% (want 39.02 +/- 0.01), baseline self-improvement {self_d}%"),
    );
}

// ---------------------------------------------------------------------------
// Criteria 4-6 share one benchmark: the four variants over ten seeds with
// default hyperparameters.
// ---------------------------------------------------------------------------

fn benchmark() -> &'static BenchmarkSummary {
    static BENCH: OnceLock<BenchmarkSummary> = OnceLock::new();
    BENCH.get_or_init(|| {
        let base = ExperimentSpec::new(Variant::Gan1, 0);
        let mut config = BenchConfig::new(base, (0..10).collect());
        config.base.checkpoint_iters = vec![];
        let started = Instant::now();
        let summary = run_benchmark(&config).expect("benchmark completes");
        println!(
            "(benchmark: {} runs in {:.1?})",
            summary.runs.len(),
            started.elapsed()
        );
        summary
    })
}

/// `a < b` with an absent value treated as "never converged" (worse than any
/// finite iteration).
fn median_lt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

fn fmt_med(v: Option<f64>) -> String {
    v.map_or("--".into(), |x| format!("{x:.0}"))
}

#[test]
fn criterion_4_trend_reproduction() {
    let summary = benchmark();
    let agg = |v: Variant| summary.aggregate(v).unwrap();
    let d_ok = median_lt(agg(Variant::Gan4).median_d, agg(Variant::Gan1).median_d);
    let base_g = agg(Variant::Gan1).median_best_g;
    let mut detail = format!(
        "median D: gan4 {} < gan1 {} -> {d_ok}; ",
        fmt_med(agg(Variant::Gan4).median_d),
        fmt_med(agg(Variant::Gan1).median_d)
    );
    let mut g_ok = true;
    for v in [Variant::Gan2, Variant::Gan3, Variant::Gan4] {
        let ok = median_lt(agg(v).median_best_g, base_g);
        detail.push_str(&format!(
            "median G {}: {} < {} -> {ok}; ",
            v,
            fmt_med(agg(v).median_best_g),
            fmt_med(base_g)
        ));
        g_ok &= ok;
    }
    verdict("4 (trend reproduction)", d_ok && g_ok, &detail);
}

#[test]
fn criterion_5_tracking_observation() {
    let summary = benchmark();
    let gan4 = summary.aggregate(Variant::Gan4).unwrap().median_tracking;
    let gan2 = summary.aggregate(Variant::Gan2).unwrap().median_tracking;
    let pass = matches!((gan4, gan2), (Some(a), Some(b)) if a < b);
    verdict(
        "5 (tracking observation)",
        pass,
        &format!("median tracking distance gan4 {gan4:?} < gan2 {gan2:?}"),
    );
}

#[test]
fn criterion_6_output_quality() {
    let summary = benchmark();
    let mut pass = true;
    let mut detail = String::new();
    for variant in Variant::NAMED {
        let runs: Vec<&RunAnalysis> = summary
            .runs
            .iter()
            .filter(|r| r.variant == variant)
            .collect();
        let good = runs.iter().filter(|r| r.best_containment >= 0.9).count();
        pass &= good >= 8;
        detail.push_str(&format!("{variant}: {good}/{} seeds >= 0.9; ", runs.len()));
    }
    verdict("6 (output quality)", pass, &detail);
}

// ---------------------------------------------------------------------------
// Criterion 7: stripping the edges from the coupled configuration reproduces
// the natively uncoupled run bit-exactly, and the stream split gives
// generator 0 identical inputs across gan1 and gan2.
// ---------------------------------------------------------------------------

fn short_spec(variant: Variant, seed: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(variant, seed);
    spec.iterations = 50;
    spec.checkpoint_iters = vec![];
    spec
}

fn params_bits(params: &ParameterSet) -> Vec<(String, Vec<u64>)> {
    params
        .iter()
        .map(|(name, t)| (name.to_string(), t.data().iter().map(|v| v.to_bits()).collect()))
        .collect()
}

#[test]
fn criterion_7_reduction_property() {
    let seed = 11;

    // gan4 with its edges removed, run through the generic custom-graph path.
    let (_, gan4_graph) = build_variant(Variant::Gan4).unwrap();
    let mut stripped = short_spec(Variant::Custom, seed);
    stripped.graph = Some(gan4_graph.without_edges());
    let stripped_out = train(stripped).unwrap();

    let gan2_out = train(short_spec(Variant::Gan2, seed)).unwrap();

    let traces_equal = stripped_out.trace == gan2_out.trace
        && stripped_out
            .trace
            .records()
            .iter()
            .zip(gan2_out.trace.records())
            .all(|(a, b)| {
                a.loss_d.to_bits() == b.loss_d.to_bits()
                    && a.loss_g
                        .iter()
                        .zip(&b.loss_g)
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            });
    let d_equal = params_bits(&stripped_out.state.discriminator.params)
        == params_bits(&gan2_out.state.discriminator.params);
    let g_equal = (0..2).all(|i| {
        params_bits(&stripped_out.state.generators[i].params)
            == params_bits(&gan2_out.state.generators[i].params)
    });

    // Stream split: generator 0 and the discriminator initialize identically
    // whether one or two generators exist.
    let gan1 = Trainer::new(short_spec(Variant::Gan1, seed)).unwrap();
    let gan2 = Trainer::new(short_spec(Variant::Gan2, seed)).unwrap();
    let init_equal = params_bits(&gan1.state().generators[0].params)
        == params_bits(&gan2.state().generators[0].params)
        && params_bits(&gan1.state().discriminator.params)
            == params_bits(&gan2.state().discriminator.params);

    verdict(
        "7 (reduction property)",
        traces_equal && d_equal && g_equal && init_equal,
        &format!(
            "edge-stripped gan4 == gan2 over 50 iterations: traces {traces_equal}, D params {d_equal}, G params {g_equal}; gan1/gan2 shared init {init_equal}"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: lag(i->j) equals lead(j->i) exactly for random score pairs;
// with an inactive hinge, generator gradients are identical to the uncoupled
// loss.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_convention_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut duality_ok = true;
    for _ in 0..200 {
        let batch = rng.gen_range(1..=6);
        let a: Vec<f64> = (0..batch).map(|_| rng.gen_range(0.01..0.99)).collect();
        let b: Vec<f64> = (0..batch).map(|_| rng.gen_range(0.01..0.99)).collect();
        let mut tape = Tape::new();
        let av = tape.leaf(Tensor::from_vec(batch, 1, a.clone()).unwrap(), false).unwrap();
        let bv = tape.leaf(Tensor::from_vec(batch, 1, b.clone()).unwrap(), false).unwrap();
        let lag = hinge_penalty(&mut tape, av, bv, HingeConvention::LagPenalty).unwrap();
        let lead = hinge_penalty(&mut tape, bv, av, HingeConvention::LeadPenalty).unwrap();
        duality_ok &= tape.value(lag).item().to_bits() == tape.value(lead).item().to_bits();
    }

    // Inactive hinge through real nets: gradients bitwise equal to uncoupled.
    let mut rng = ChaCha8Rng::seed_from_u64(89);
    let g = GeneratorNet::new(3, &[6], 5, &mut rng).unwrap();
    let d = DiscriminatorNet::new(5, &[6], &mut rng).unwrap();
    let z = sample_latent(3, 4, &mut rng).unwrap();
    let grads = |coupled: bool, convention: HingeConvention| -> Vec<Vec<u64>> {
        let mut tape = Tape::new();
        let gh = g.attach(&mut tape, true).unwrap();
        let dh = d.attach(&mut tape, false).unwrap();
        let zv = tape.constant(z.clone()).unwrap();
        let fake = g.generate(&mut tape, &gh, zv).unwrap();
        let own = d.discriminate(&mut tape, &dh, fake).unwrap();
        // Opponent far ahead (lead) / far behind (lag): hinge inactive.
        let opp_value = match convention {
            HingeConvention::LeadPenalty => 0.999,
            HingeConvention::LagPenalty => 0.001,
        };
        let opp = tape.constant(Tensor::filled(4, 1, opp_value)).unwrap();
        let graph = if coupled {
            CouplingGraph::new(2, [(0, 1)]).unwrap()
        } else {
            CouplingGraph::uncoupled(2)
        };
        let config = LossConfig {
            formulation: Formulation::StandardBce,
            hinge_convention: convention,
        };
        let loss = generator_loss(&mut tape, 0, &[own, opp], &graph, config).unwrap();
        tape.backward(loss).unwrap();
        gh.vars()
            .iter()
            .map(|&v| tape.grad(v).unwrap().data().iter().map(|x| x.to_bits()).collect())
            .collect()
    };
    let mut gating_ok = true;
    for convention in [HingeConvention::LagPenalty, HingeConvention::LeadPenalty] {
        gating_ok &= grads(true, convention) == grads(false, convention);
    }

    verdict(
        "8 (convention duality)",
        duality_ok && gating_ok,
        &format!("200 random pairs bitwise dual: {duality_ok}; inactive-hinge grads bitwise equal to uncoupled: {gating_ok}"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: a benchmark with a fixed config writes a byte-identical
// summary CSV on repeated invocations.
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_bench_determinism() {
    let mut base = ExperimentSpec::new(Variant::Gan1, 0);
    base.iterations = 40;
    base.batch_size = 8;
    base.gen_hidden = vec![8];
    base.disc_hidden = vec![8];
    base.checkpoint_iters = vec![];
    let mut config = BenchConfig::new(base, vec![0, 1]);
    config.convergence = racing_gan::analysis::ConvergenceParams {
        band_frac: 0.01,
        window: 10,
        smooth: 5,
    };
    config.eval_samples = 32;
    config.tracking_burn_in = 10;

    let dir = std::env::temp_dir().join(format!("racing_gan_acc9_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bytes = |tag: &str| -> Vec<u8> {
        let summary = run_benchmark(&config).unwrap();
        let path = dir.join(format!("summary_{tag}.csv"));
        summary.write_csv(&path).unwrap();
        std::fs::read(&path).unwrap()
    };
    let first = bytes("a");
    let second = bytes("b");
    let pass = first == second && !first.is_empty();
    std::fs::remove_dir_all(&dir).unwrap();
    verdict(
        "9 (bench determinism)",
        pass,
        &format!("summary CSV byte-identical across invocations ({} bytes)", first.len()),
    );
}
