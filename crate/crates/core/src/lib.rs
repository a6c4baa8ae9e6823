//! Continuous-time distributed dynamic programming for policy evaluation in
//! networked multi-agent MDPs.
//!
//! Every agent shares one environment model (transition matrix, linear
//! features, state weights, discount) but only sees its own reward vector.
//! Agents exchange parameters with graph neighbours. This crate builds the
//! centralized flow and the two distributed consensus flows as affine ODEs,
//! integrates them with fixed-step schemes, computes their closed-form
//! equilibria and evaluates the Lyapunov monitors that certify convergence.
//!
//! The crate is `no_std` (it needs `alloc`); IO and configuration live in the
//! `distdp` companion crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > tol)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod checks;
pub mod dpflow;
mod error;
pub mod graph;
pub mod linops;
pub mod mdp;
pub mod random;
pub mod tolerances;

pub use error::{Error, Result};
pub use graph::CommGraph;
pub use linops::{Mat, Vector};
pub use mdp::{MultiAgentProblem, PolicyEvalCore};
