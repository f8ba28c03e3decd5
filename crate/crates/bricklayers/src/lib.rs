//! Simulator and exact numerical verifier for the bricklayers' interacting
//! particle process.
//!
//! The bricklayers' process is a one-dimensional deposition model: at every
//! lattice bond a brick is laid with rate `r(ω_i) + r(-ω_{i+1})`, where the
//! slopes `ω_i` are the negative discrete gradients of the growing wall. When
//! the rate function satisfies `r(z) · r(-z+1) = 1`, the model has a
//! one-parameter family of product stationary measures; for exponential rates
//! `r(z) = e^{-β/2} e^{βz}` — and only then — product measures with a
//! site-dependent parameter evolve into mixtures of the same form, which
//! reduces shock dynamics to interacting random walks.
//!
//! The crate provides:
//!
//! - [`kernel`]: rate functions, one-site measures, parameter profiles, and
//!   the closed-form identities tying them together;
//! - [`exactgen`]: truncated-sum generator expectations verifying the
//!   evolution identities (and their failure for non-exponential rates),
//!   plus a matrix-exponential oracle for finite chains;
//! - [`mcsim`]: event-driven continuous-time Monte Carlo of the full
//!   dynamics with replica estimators;
//! - [`walkers`]: the interacting random-walk representation of shocks,
//!   with an exact master-equation solver;
//! - [`hydro`]: the macroscopic flux, Rankine-Hugoniot shock speeds, and
//!   event-driven front tracking;
//! - [`compare`]: mixture predictions and z-score comparisons joining the
//!   Monte Carlo and walker descriptions.

pub mod compare;
pub mod error;
pub mod exactgen;
pub mod hydro;
pub mod kernel;
pub mod mcsim;
pub mod util;
pub mod walkers;

pub use error::{Error, Result};
