use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by detection, integration and shooting.
///
/// The catalog's critical values are separated by quantities of order one,
/// so every scale here sits well below feature size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Gradient norm below which a point counts as critical.
    pub grad_tol: f64,
    /// Hessian eigenvalues with absolute value below this are null.
    pub eig_tol: f64,
    /// Refined critical points closer than this are merged.
    pub cluster_tol: f64,
    /// A trajectory is captured by a critical element within this distance.
    pub capture_radius: f64,
    /// Per-step local error bound of the adaptive integrator.
    pub ode_tol: f64,
    /// Flow time after which integration gives up.
    pub t_max: f64,
    /// Radius of the unstable (or stable) sphere used for shooting.
    pub shooting_radius: f64,
    /// Trajectory images closer than this in Hausdorff distance are the same
    /// flow line.
    pub line_sep_tol: f64,
    /// Hausdorff tolerance for matching perturbed flow lines to cascades.
    pub haus_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            eig_tol: 1e-6,
            cluster_tol: 1e-4,
            capture_radius: 1e-3,
            ode_tol: 1e-10,
            t_max: 1e4,
            shooting_radius: 1e-2,
            line_sep_tol: 1e-2,
            haus_tol: 0.05,
        }
    }
}

impl Tolerances {
    /// Rejects non-positive or non-finite values.
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("grad_tol", self.grad_tol),
            ("eig_tol", self.eig_tol),
            ("cluster_tol", self.cluster_tol),
            ("capture_radius", self.capture_radius),
            ("ode_tol", self.ode_tol),
            ("t_max", self.t_max),
            ("shooting_radius", self.shooting_radius),
            ("line_sep_tol", self.line_sep_tol),
            ("haus_tol", self.haus_tol),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::Config(format!(
                    "tolerance `{name}` must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}
