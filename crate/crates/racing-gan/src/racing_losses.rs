//! Adversarial objectives for one discriminator and k competing generators.
//!
//! The discriminator minimizes a (k+1)-term classification loss. Each
//! generator minimizes its own score-based loss plus one hinge penalty per
//! outgoing edge in the coupling graph, comparing its discriminator scores
//! against an opponent's on the same latent batch. Which side of the
//! comparison pays the penalty is selectable:
//!
//! * `LeadPenalty` punishes the generator the discriminator currently likes
//!   more, reining the leader in toward its rival. It is the default: in the
//!   benchmark it is the convention that keeps paired loss curves tightly
//!   overlapped and speeds up settling.
//! * `LagPenalty` punishes the generator the discriminator currently likes
//!   less, pushing the laggard to catch up.
//!
//! Opponent scores enter as constants: a generator's loss moves only that
//! generator's parameters.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diffcore::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Directed competition structure over `k` generators. An edge `(i, j)` adds a
/// hinge term to generator i's loss comparing its scores against generator
/// j's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    k: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingGraph {
    pub fn new(k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSpec("coupling graph needs k >= 1".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidSpec(format!("self-edge ({i}, {j})")));
            }
            if i >= k || j >= k {
                return Err(Error::InvalidSpec(format!(
                    "edge ({i}, {j}) out of range for k = {k}"
                )));
            }
            set.insert((i, j));
        }
        Ok(CouplingGraph { k, edges: set })
    }

    /// No competition at all.
    pub fn uncoupled(k: usize) -> Self {
        CouplingGraph::new(k, []).expect("no edges to validate")
    }

    /// Every ordered pair competes.
    pub fn fully_connected(k: usize) -> Result<Self> {
        let edges = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)));
        CouplingGraph::new(k, edges)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Opponents generator `i` is penalized against, ascending.
    pub fn opponents_of(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(from, _)| from == i)
            .map(|&(_, to)| to)
            .collect()
    }

    /// Strip every edge, keeping k.
    pub fn without_edges(&self) -> Self {
        CouplingGraph::uncoupled(self.k)
    }
}

/// Which algebraic form of the classification terms to use.
///
/// `StandardBce` scores fakes through `log(1 - D(G(z)))`; `PaperLiteral`
/// scores them through `1 - log D(G(z))`, which has no finite equilibrium
/// and is kept only for fidelity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    StandardBce,
    PaperLiteral,
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formulation::StandardBce => write!(f, "standard_bce"),
            Formulation::PaperLiteral => write!(f, "paper_literal"),
        }
    }
}

/// Which generator an active hinge penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HingeConvention {
    /// Edge (i, j) adds `max(0, D(G_j(z)) - D(G_i(z)))` to generator i: the
    /// trailing generator pays and is pushed to learn faster.
    LagPenalty,
    /// Edge (i, j) adds `max(0, D(G_i(z)) - D(G_j(z)))` to generator i: the
    /// leading generator pays.
    LeadPenalty,
}

impl std::fmt::Display for HingeConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HingeConvention::LagPenalty => write!(f, "lag_penalty"),
            HingeConvention::LeadPenalty => write!(f, "lead_penalty"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossConfig {
    pub formulation: Formulation,
    pub hinge_convention: HingeConvention,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            formulation: Formulation::StandardBce,
            hinge_convention: HingeConvention::LeadPenalty,
        }
    }
}

/// Scalar hinge: `max(0, a - b)`, subgradient 0 at the tie.
pub fn hinge(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d > 0.0 {
        d
    } else {
        0.0
    }
}

fn validate_scores(tape: &Tape, scores: Var, what: &'static str) -> Result<()> {
    let t = tape.value(scores);
    if t.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if t.cols() != 1 {
        return Err(Error::ShapeMismatch {
            op: what,
            expected: "a batch x 1 score column".into(),
            got: format!("{}x{}", t.rows(), t.cols()),
        });
    }
    for &v in t.data() {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ScoreOutOfRange { value: v });
        }
    }
    Ok(())
}

/// Discriminator objective (minimization form) over one real score batch and
/// one fake score batch per generator:
///
/// * standard: `-mean[log d_real] - sum_n mean[log(1 - d_fake_n)]`
/// * literal:  `-mean[log d_real] - sum_n mean[1 - log d_fake_n]`
pub fn discriminator_loss(
    tape: &mut Tape,
    d_real: Var,
    d_fakes: &[Var],
    formulation: Formulation,
) -> Result<Var> {
    if d_fakes.is_empty() {
        return Err(Error::InvalidSpec("discriminator loss needs k >= 1".into()));
    }
    validate_scores(tape, d_real, "discriminator_loss")?;
    for &f in d_fakes {
        validate_scores(tape, f, "discriminator_loss")?;
    }

    let log_real = tape.safe_log(d_real)?;
    let mean_real = tape.mean(log_real)?;
    let mut total = tape.neg(mean_real)?;
    for &fake in d_fakes {
        let term = match formulation {
            Formulation::StandardBce => {
                let (r, c) = tape.value(fake).shape();
                let ones = tape.constant(Tensor::ones(r, c))?;
                let one_minus = tape.sub(ones, fake)?;
                let log = tape.safe_log(one_minus)?;
                tape.mean(log)?
            }
            Formulation::PaperLiteral => {
                let log = tape.safe_log(fake)?;
                let (r, c) = tape.value(fake).shape();
                let ones = tape.constant(Tensor::ones(r, c))?;
                let one_minus_log = tape.sub(ones, log)?;
                tape.mean(one_minus_log)?
            }
        };
        total = tape.sub(total, term)?;
    }
    Ok(total)
}

/// Mean per-sample hinge between two aligned score batches under a
/// convention, from the perspective of the generator that owns `own`.
pub fn hinge_penalty(
    tape: &mut Tape,
    own: Var,
    opponent: Var,
    convention: HingeConvention,
) -> Result<Var> {
    let diff = match convention {
        HingeConvention::LagPenalty => tape.sub(opponent, own)?,
        HingeConvention::LeadPenalty => tape.sub(own, opponent)?,
    };
    let clipped = tape.relu(diff)?;
    tape.mean(clipped)
}

/// Generator i's objective: `-mean[log d_fake_i]` plus one hinge penalty per
/// outgoing edge. Callers must supply opponent scores that carry no gradient
/// (the trainer computes them through frozen nets); generator i's own scores
/// flow gradients through both the base term and the hinges.
pub fn generator_loss(
    tape: &mut Tape,
    i: usize,
    d_fakes: &[Var],
    graph: &CouplingGraph,
    config: LossConfig,
) -> Result<Var> {
    if d_fakes.len() != graph.k() {
        return Err(Error::InvalidSpec(format!(
            "expected {} score batches, got {}",
            graph.k(),
            d_fakes.len()
        )));
    }
    if i >= graph.k() {
        return Err(Error::InvalidSpec(format!(
            "generator index {i} out of range for k = {}",
            graph.k()
        )));
    }
    validate_scores(tape, d_fakes[i], "generator_loss")?;

    // The literal objective's leading constant 1 has zero gradient, so both
    // formulations share the non-saturating base term.
    let log = tape.safe_log(d_fakes[i])?;
    let mean_log = tape.mean(log)?;
    let mut total = tape.neg(mean_log)?;

    for j in graph.opponents_of(i) {
        validate_scores(tape, d_fakes[j], "generator_loss")?;
        let own_rows = tape.value(d_fakes[i]).rows();
        let opp_rows = tape.value(d_fakes[j]).rows();
        if own_rows != opp_rows {
            return Err(Error::ShapeMismatch {
                op: "generator_loss",
                expected: format!("opponent batch of {own_rows}"),
                got: format!("{opp_rows}"),
            });
        }
        let penalty = hinge_penalty(tape, d_fakes[i], d_fakes[j], config.hinge_convention)?;
        total = tape.add(total, penalty)?;
    }
    Ok(total)
}
