//! Adversarial training where several generators race each other.
//!
//! One discriminator faces k generators. On top of the usual adversarial
//! feedback, a directed coupling graph adds hinge penalties that compare two
//! generators' discriminator scores on the same latent batch, so generators
//! compete directly and the trailing one is pushed to catch up. The crate
//! bundles:
//!
//! * [`diffcore`] — a small reverse-mode autodiff tape over dense `f64`
//!   matrices with SGD/Adam, plus a finite-difference gradient checker;
//! * [`synthdata`] — the synthetic task: quadratic curves drawn between two
//!   boundary parabolas, with containment and least-squares fit utilities;
//! * [`models`] — generator/discriminator MLPs;
//! * [`racing_losses`] — the coupled objectives and the [`racing_losses::CouplingGraph`];
//! * [`trainer`] — the alternating update loop and the four benchmark
//!   variants (single generator, uncoupled pair, one-way race, mutual race);
//! * [`analysis`] — equilibrium targets, the within-1%-for-a-window
//!   convergence criterion, efficiency/improvement tables, loss tracking and
//!   a diversity diagnostic;
//! * [`mod@bench`] — the multi-seed benchmark harness;
//! * [`config`] / [`cli`] / [`plot`] — the TOML run configuration, the
//!   `racing-gan` binary's commands, and SVG loss plots.
//!
//! Every run is deterministic given its seed: randomness is split into
//! per-purpose named streams, and independent runs parallelize freely.
//!
//! See the `examples/` directory for runnable tours of each capability.

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod config;
pub mod diffcore;
pub mod error;
pub mod models;
pub mod plot;
pub mod racing_losses;
pub mod synthdata;
pub mod trainer;

pub use error::{Error, Result};
