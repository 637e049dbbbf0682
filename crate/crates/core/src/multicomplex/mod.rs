//! First-quadrant multicomplexes: the relations `Σ_{i+j=n} d_i d_j = 0`,
//! assembly along diagonals with its filtration, a random generator for
//! property tests, a JSON input format, and the numerical Morse–Bott builder.

mod algebra;
mod build;
mod random;
mod symbolic;

pub use algebra::{assemble, verify_multicomplex, AssembledComplex, Block, Layout, Multicomplex, RelationFailure};
pub use build::{
    build_morse_bott_multicomplex, interpolation_checks, manifold_model, BottModel, BuildMode, ComponentShape,
    ConstantCaseRow, EndpointTerm, InterpolationReport, ModelComponent, MorseBottBuild, MorseBottChainData,
    MorseCaseRow, WindingDegree, EDGE_STEPS, FAMILY_STEPS, SCAN_DENSITY,
};
pub use random::random_multicomplex;
pub use symbolic::{DifferentialDoc, MulticomplexDoc};
