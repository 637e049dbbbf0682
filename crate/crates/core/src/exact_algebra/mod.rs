//! Exact integer linear algebra: dense big-integer matrices, Smith normal
//! form, and homology of finitely generated chain complexes over the integers
//! and over the two-element field.

mod complex;
mod matrix;
mod snf;

pub use complex::{
    betti_numbers, homology, kernel_ranks, verify_complex, verify_complex_mod2, Coefficients, GradedChainComplex,
    HomologyResult,
};
pub use matrix::{max_abs_entry, IntegerMatrix};
pub use snf::{smith_normal_form, SNFDecomposition};
