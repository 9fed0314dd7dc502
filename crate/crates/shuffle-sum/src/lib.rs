//! Private real summation in the multi-message shuffle model.
//!
//! In the shuffle model, `n` users each hold a value in `[0, 1]`, apply a
//! local randomizer, and submit the resulting messages through independent
//! shufflers. The data collector only observes the shuffled multisets and
//! runs an analyzer over them to estimate the sum. This crate implements
//! three protocol families, their parameter planners and closed-form error
//! bounds, together with the machinery used to validate them empirically:
//!
//! * [`single`] — the one-level randomized-response subprotocol on a
//!   discretized domain, the building block for everything else;
//! * [`recursive`] — the multi-message protocol that encodes the input at
//!   increasing fixed-point precisions and randomizes each digit
//!   independently, with basic- and advanced-composition planners and a
//!   coordinate-descent bound optimizer;
//! * [`ikos`] — the split-and-shuffle protocol: additive secret sharing
//!   over `Z_q` plus distributed discrete-Laplace noise assembled from
//!   Pólya increments, achieving constant error with a constant number of
//!   messages;
//! * [`security`] — validation of the secure-summation analysis behind the
//!   message-count planner: random permutation multigraphs, Monte Carlo
//!   estimates of `E[q^C(G)]` against the closed-form bound, and an exact
//!   total-variation oracle on exhaustively enumerable instances;
//! * [`baselines`] — central/local Laplace and local randomized response
//!   reference mechanisms;
//! * [`harness`] — datasets, the experiment runner, report serialization
//!   and the bounds-table emitter backing the CLI.
//!
//! # Randomness
//!
//! All sampling is **statistical simulation only**. [`sampling::RngStream`]
//! is a seeded, splittable ChaCha stream chosen for reproducibility and
//! independence of substreams, *not* for cryptographic security. Do not use
//! this crate to run a real privacy-critical deployment.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod ikos;
pub mod optim;
pub mod recursive;
pub mod sampling;
pub mod security;
pub mod shuffle;
pub mod single;
pub mod stats;

pub use error::{Error, Result};
pub use sampling::RngStream;
