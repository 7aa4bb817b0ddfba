//! Spectral and singular-value lifts of symmetric functions.
//!
//! A permutation-invariant `f` on `R^n` induces `F = f∘λ` on symmetric
//! matrices, and an absolutely symmetric `f` induces `F = f∘σ` on rectangular
//! ones. This crate evaluates such lifts (values, gradients, Hessian-vector
//! products, proximal maps, Moreau envelopes) from the vector-side data, and
//! ships the oracles used to check the lifting identities numerically.

// `!(x > 0.0)` is the NaN-rejecting form of every positivity check here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod sample;
pub mod singular;
pub mod solver;
pub mod spectral;
pub mod symmetric;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{EigDecomp, Matrix, SvdDecomp, SymMatrix};
pub use spectral::{ProxResultMat, SpectralFunction};
pub use symmetric::{Capabilities, Catalog, ProxResultVec, SymmetricFunction};
