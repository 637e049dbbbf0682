//! Flow lines with cascades: tuples of gradient flow lines of a Morse–Bott
//! function joined by finite-time flows of auxiliary Morse functions on the
//! critical submanifolds. Cascades are counted between generators of
//! adjacent total index, compared with the flow lines of the explicit
//! perturbation in the Hausdorff distance, and assembled into a chain
//! complex.

mod correspond;
mod search;

pub use crate::flow_engine::{hausdorff_distance, CompactSubsetImage};
pub use correspond::{
    correspondence_check, epsilon_sweep, CorrespondenceReport, EpsilonSweepReport, EpsilonSweepRow, GeneratorInfo,
    LineMatch, PairCorrespondence, DEFAULT_N_MAX, SWEEP_SLACK,
};
pub use search::{
    auxiliary_flow, family_growth, find_cascades, scan_cascades, total_index, Cascade, CascadeModuli, CascadePiece,
    CascadeSetup,
};
