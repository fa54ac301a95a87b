//! Sampling of discrete Bayesian networks, classically and through quantum
//! circuits.
//!
//! The crate has three layers:
//!
//! * [`cbnet`] — networks, conditional probability tables, Markov blankets,
//!   and exact inference by enumeration, which every sampler is tested
//!   against.
//! * [`classical`] — importance sampling (with rejection and likelihood
//!   weighting as special cases), Gibbs sampling with random or fixed
//!   sweeps, and Metropolis-Hastings, plus the per-node transition matrices
//!   used to check stationarity and detailed balance.
//! * [`muxor`], [`circuit`], [`qembed`], [`qsampling`] — compilation of
//!   probability tables and whole networks into circuits of y-rotation
//!   multiplexors whose squared amplitudes reproduce the classical
//!   distributions, a statevector simulator to run them, and quantum
//!   versions of the three samplers driving that simulator.
//!
//! Bit conventions are fixed crate-wide: qubit 0 is the least significant
//! bit of a basis index, and a CPT row is indexed with the first listed
//! parent as the most significant digit.

pub mod cbnet;
pub mod circuit;
pub mod classical;
pub mod error;
pub mod muxor;
pub mod posterior;
pub mod qembed;
pub mod qsampling;
pub mod rng;

pub use cbnet::{Assignment, BayesNet, Cpt, NetBuilder, Node, NodeId, Query};
pub use error::{Error, Result};
pub use posterior::PosteriorTable;
