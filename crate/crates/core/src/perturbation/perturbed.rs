use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow_engine::{detect_critical_set, CriticalSet, DetectOptions, ElementId, Tolerances};
use crate::landscape::{wrap_angle, BumpProfile, CircleChart, Jet, Landscape, Manifold, Point, SmoothFunction};

/// Auxiliary Morse function `δ (1 + cos(u − phase))` on a critical circle;
/// positive, with its maximum at `u = phase` and minimum opposite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Auxiliary {
    pub scale: f64,
    pub phase: f64,
}

impl Default for Auxiliary {
    fn default() -> Self {
        Self { scale: 1.0, phase: 0.0 }
    }
}

impl Auxiliary {
    /// `(a, a', a'')` at `u`.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        let c = (u - self.phase).cos();
        let s = (u - self.phase).sin();
        (self.scale * (1.0 + c), -self.scale * s, -self.scale * c)
    }

    /// Critical points on the circle as `(u, index)`, minimum first.
    pub fn critical_points(&self) -> [(f64, usize); 2] {
        [(wrap_angle(self.phase + PI), 0), (wrap_angle(self.phase), 1)]
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0 && self.phase.is_finite()) {
            return Err(Error::Config("auxiliary functions need a positive finite scale".into()));
        }
        Ok(())
    }
}

/// The auxiliary function as a Morse function on the abstract circle, so
/// that its own flow-line complex can be computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxiliaryOnCircle(pub Auxiliary);

impl SmoothFunction for AuxiliaryOnCircle {
    fn manifold(&self) -> Manifold {
        Manifold::Circle
    }
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.0.eval(x.x).0
    }
    fn coord_grad(&self, x: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.0.eval(x.x).1, 0.0, 0.0)
    }
    fn jet(&self, x: &Vector3<f64>) -> Jet {
        let (a, da, dda) = self.0.eval(x.x);
        let mut j = Jet::constant(a);
        j.grad.x = da;
        j.hess[(0, 0)] = dda;
        j
    }
}

/// Tubes `T̃_j ⊂ T_j` around one critical circle, in normal arclength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TubularNeighborhood {
    pub submanifold: usize,
    pub chart: CircleChart,
    pub profile: BumpProfile,
}

/// One perturbation term `ρ_j f_j` with the data needed to predict critical
/// points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationTerm {
    pub tube: TubularNeighborhood,
    pub auxiliary: Auxiliary,
    pub bott_index: usize,
}

/// A critical point predicted for `h`: a critical point of some auxiliary
/// function (or a point submanifold of `f`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectedCritical {
    pub position: Point,
    /// The critical submanifold of `f` carrying the point.
    pub element: ElementId,
    pub bott_index: usize,
    pub auxiliary_index: usize,
}

impl ExpectedCritical {
    /// Circle id, or `None` for a point submanifold.
    pub fn circle(&self) -> Option<usize> {
        match self.element {
            ElementId::Circle(i) => Some(i),
            ElementId::Point(_) => None,
        }
    }

    /// `λ_j + λ^j`.
    pub fn total_index(&self) -> usize {
        self.bott_index + self.auxiliary_index
    }
}

/// `h = f + ε Σ ρ_j f_j` with closed-form derivatives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbedLandscape {
    pub base: Landscape,
    pub epsilon: f64,
    pub terms: Vec<PerturbationTerm>,
    pub expected: Vec<ExpectedCritical>,
}

impl PerturbedLandscape {
    /// `Σ ρ_j f_j` and its coordinate derivatives.
    fn correction(&self, x: &Vector3<f64>) -> Jet {
        let mut out = Jet::constant(0.0);
        for term in &self.terms {
            let chart = term.tube.chart;
            let r = chart.r(x);
            if r.abs() >= term.tube.profile.outer {
                continue;
            }
            let (rho, drho, ddrho) = term.tube.profile.eval(r);
            let rj = chart.r_jet(x);
            let uj = chart.u_jet(x);
            let (a, da, dda) = term.auxiliary.eval(uj.value);
            out.value += rho * a;
            out.grad += rj.grad * (drho * a) + uj.grad * (rho * da);
            out.hess += rj.grad * rj.grad.transpose() * (ddrho * a)
                + (rj.grad * uj.grad.transpose() + uj.grad * rj.grad.transpose()) * (drho * da)
                + rj.hess * (drho * a)
                + uj.grad * uj.grad.transpose() * (rho * dda)
                + uj.hess * (rho * da);
        }
        out
    }

    /// `h − f` at `x`.
    pub fn difference(&self, x: &Vector3<f64>) -> f64 {
        self.epsilon * self.correction(x).value
    }
}

impl SmoothFunction for PerturbedLandscape {
    fn manifold(&self) -> Manifold {
        self.base.manifold
    }
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.base.value(x) + self.difference(x)
    }
    fn coord_grad(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.base.coord_grad(x) + self.correction(x).grad * self.epsilon
    }
    fn jet(&self, x: &Vector3<f64>) -> Jet {
        let j = self.base.jet(x);
        let c = self.correction(x);
        Jet {
            value: j.value + self.epsilon * c.value,
            grad: j.grad + c.grad * self.epsilon,
            hess: j.hess + c.hess * self.epsilon,
        }
    }
}

/// Builds `h` from a landscape, its detected Morse–Bott critical set and
/// one auxiliary per critical circle (in circle order). For `ε > 0` the
/// critical set of `h` is detected and any critical point away from the
/// predicted ones is reported as [`Error::EpsilonTooLarge`].
pub fn build_h(
    landscape: &Landscape,
    set: &CriticalSet,
    auxiliaries: &[Auxiliary],
    epsilon: f64,
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<PerturbedLandscape> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Config("epsilon must be finite and nonnegative".into()));
    }
    let profile = BumpProfile::default();
    let mut terms = Vec::new();
    for (c, aux) in set.circles.iter().zip(auxiliaries) {
        terms.push(PerturbationTerm {
            tube: TubularNeighborhood {
                submanifold: c.id,
                chart: c.chart,
                profile,
            },
            auxiliary: *aux,
            bott_index: c.bott_index,
        });
    }
    let expected = predicted_critical_points(set, auxiliaries)?;
    check_tubes_disjoint(set, &terms)?;
    let h = PerturbedLandscape {
        base: landscape.clone(),
        epsilon,
        terms,
        expected,
    };
    if epsilon > 0.0 {
        let hset = detect_critical_set(&h, tol, opts).map_err(|e| match e {
            Error::DegenerateCritical { position, .. } => Error::EpsilonTooLarge { epsilon, position },
            other => other,
        })?;
        if let Some(c) = hset.circles.first() {
            return Err(Error::EpsilonTooLarge {
                epsilon,
                position: c.sample_points[0].coords().to_vec(),
            });
        }
        for p in &hset.points {
            if match_expected(&h, p.position.raw(), tol.capture_radius).is_none() {
                return Err(Error::EpsilonTooLarge {
                    epsilon,
                    position: p.position.coords().to_vec(),
                });
            }
        }
    }
    Ok(h)
}

/// Critical points of the auxiliary functions, with their Bott and
/// auxiliary indices: minimum then maximum on each circle in circle order,
/// then the point submanifolds.
pub fn predicted_critical_points(set: &CriticalSet, auxiliaries: &[Auxiliary]) -> Result<Vec<ExpectedCritical>> {
    if auxiliaries.len() != set.circles.len() {
        return Err(Error::Config(format!(
            "{} auxiliaries given for {} critical circles",
            auxiliaries.len(),
            set.circles.len()
        )));
    }
    let mut expected = Vec::new();
    for (c, aux) in set.circles.iter().zip(auxiliaries) {
        aux.validate()?;
        for (u, idx) in aux.critical_points() {
            expected.push(ExpectedCritical {
                position: Point::from_raw(set.manifold, c.chart.point(u)),
                element: ElementId::Circle(c.id),
                bott_index: c.bott_index,
                auxiliary_index: idx,
            });
        }
    }
    for p in &set.points {
        expected.push(ExpectedCritical {
            position: p.position,
            element: ElementId::Point(p.id),
            bott_index: p.index,
            auxiliary_index: 0,
        });
    }
    Ok(expected)
}

/// Outer tubes must not meet each other or any point submanifold.
fn check_tubes_disjoint(set: &CriticalSet, terms: &[PerturbationTerm]) -> Result<()> {
    let samples = 256;
    for (i, a) in terms.iter().enumerate() {
        for k in 0..samples {
            let x = a.tube.chart.point(TAU * k as f64 / samples as f64);
            for b in &terms[i + 1..] {
                if b.tube.chart.r(&x).abs() < a.tube.profile.outer + b.tube.profile.outer {
                    return Err(Error::Config("tubular neighborhoods overlap".into()));
                }
            }
        }
        for p in &set.points {
            if a.tube.chart.r(p.position.raw()).abs() < a.tube.profile.outer {
                return Err(Error::Config("tubular neighborhood contains a critical point".into()));
            }
        }
    }
    Ok(())
}

/// Index of the predicted critical point within `radius` of `x`.
pub fn match_expected(h: &PerturbedLandscape, x: &Vector3<f64>, radius: f64) -> Option<usize> {
    let m = h.base.manifold;
    h.expected
        .iter()
        .enumerate()
        .map(|(i, e)| (i, m.distance(e.position.raw(), x)))
        .filter(|(_, d)| *d < radius)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}
