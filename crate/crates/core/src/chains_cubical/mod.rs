//! Formal chains: faces of the standard cube with the signed cube boundary,
//! fibered-product words over moduli spaces of flow lines with their signed
//! boundary rules, and finite cubical complexes with exact homology.

mod chain;
mod cube;
mod cubical;
mod fibered;

pub use chain::{AbstractChain, Generator};
pub use cube::{cube_boundary, cube_chain_boundary, CubeFace, FaceCoord};
pub use cubical::{cubical_homology, CubicalComplex, ElementaryCube, Interval};
pub use fibered::{
    boundary_squared, exhaustive_moduli_cases, fibered_boundary, fibered_chain_boundary, moduli_boundary,
    moduli_boundary_squared, random_word, Association, BaseDims, Factor, FiberedSign, FiberedSymbol, ModuliSign,
    SignConventions,
};
