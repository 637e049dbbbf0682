//! Critical-set detection, adaptive gradient-flow integration and counting
//! of flow lines between critical points of relative index one.

mod connect;
mod detect;
mod image;
mod integrate;
mod tolerances;

pub use connect::{
    all_connections, count_connections, dense_scan_connections, moduli_dimension, ConnectionCount, FlowLine,
};
pub use detect::{detect_critical_set, CriticalPoint, CriticalSet, CriticalSubmanifold, DetectOptions, ElementId};
pub use image::{hausdorff_distance, hausdorff_within, CompactSubsetImage};
pub use integrate::{integrate, Direction, Limit, Sample, Trajectory};
pub use tolerances::Tolerances;

pub(crate) use connect::{principal_direction, IMAGE_SPACING};
