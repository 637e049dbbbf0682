//! Computational Morse–Bott homology at desk scale.
//!
//! The crate computes the homology of small compact manifolds (circle, flat
//! 2-torus, round 2-sphere) from smooth functions on them, by three routes:
//! perturbing a Morse–Bott function to a Morse function and counting flow
//! lines, counting flow lines with cascades, and assembling a multicomplex
//! from cubical models of the critical submanifolds. Everything numerical
//! feeds into exact integer linear algebra.

pub mod cascades;
pub mod chains_cubical;
pub mod error;
pub mod exact_algebra;
pub mod flow_engine;
pub mod landscape;
pub mod msw_complex;
pub mod multicomplex;
pub mod perturbation;
pub mod poly_lab;

pub use error::{Error, Result};
