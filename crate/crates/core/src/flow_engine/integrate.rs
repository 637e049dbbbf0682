use nalgebra::Vector3;
use serde::Serialize;

use super::detect::{CriticalSet, ElementId};
use super::image::CompactSubsetImage;
use super::tolerances::Tolerances;
use crate::error::{Error, Result};
use crate::landscape::{Point, SmoothFunction};

/// Time direction of the negative gradient flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Along `−∇f`, toward lower values.
    Forward,
    /// Along `+∇f`, toward higher values.
    Backward,
}

/// One accepted integration step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    /// Forward flow time, starting at zero.
    pub t: f64,
    pub x: Point,
    pub f: f64,
}

/// A classified end of a flow line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Limit {
    pub element: ElementId,
    /// Limiting position: the critical point, or the foot of the normal
    /// through the last sample on a critical circle.
    pub position: Point,
    pub value: f64,
}

impl Limit {
    pub fn of(set: &CriticalSet, element: ElementId, near: &Vector3<f64>) -> Self {
        let (position, value) = match element {
            ElementId::Point(i) => (set.points[i].position, set.points[i].value),
            ElementId::Circle(i) => {
                let c = &set.circles[i];
                (Point::from_raw(set.manifold, c.chart.point(c.chart.u(near))), c.value)
            }
        };
        Self {
            element,
            position,
            value,
        }
    }
}

/// A numerically integrated flow line, stored in forward time: `f` is
/// nonincreasing along `samples`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub direction: Direction,
    pub samples: Vec<Sample>,
    pub alpha_limit: Option<Limit>,
    pub omega_limit: Option<Limit>,
    /// Distance from the last integrated point to the capturing element.
    pub capture_distance: f64,
}

impl Trajectory {
    /// The limit that stopped the integration.
    pub fn captured(&self) -> &Limit {
        match self.direction {
            Direction::Forward => self.omega_limit.as_ref(),
            Direction::Backward => self.alpha_limit.as_ref(),
        }
        .expect("integration always records its capturing limit")
    }

    /// Adds the limiting positions as end samples so that the image
    /// includes its limit points. End samples repeat the neighboring time,
    /// since the true flow time to a limit is infinite.
    pub fn close_ends(&mut self) {
        let m = self.samples[0].x.manifold;
        if let Some(a) = self.alpha_limit {
            if m.distance(a.position.raw(), self.samples[0].x.raw()) > 0.0 {
                let t = self.samples[0].t;
                self.samples.insert(
                    0,
                    Sample {
                        t,
                        x: a.position,
                        f: a.value,
                    },
                );
            }
        }
        if let Some(o) = self.omega_limit {
            let last = self.last();
            if m.distance(o.position.raw(), last.x.raw()) > 0.0 {
                let t = last.t;
                self.samples.push(Sample {
                    t,
                    x: o.position,
                    f: o.value,
                });
            }
        }
    }

    /// `f` drop along the stored samples.
    pub fn total_drop(&self) -> f64 {
        self.first().f - self.last().f
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are nonempty")
    }

    /// Whether `f` decreases along the stored samples up to `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.samples.windows(2).all(|w| w[1].f <= w[0].f + slack)
    }

    pub fn image(&self, spacing: f64) -> CompactSubsetImage {
        let m = self.samples[0].x.manifold;
        let verts: Vec<_> = self.samples.iter().map(|s| *s.x.raw()).collect();
        CompactSubsetImage::from_polyline(m, &verts, spacing)
    }
}

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Integrates the gradient flow from `start` until it comes within
/// `capture_radius` of a critical element of `set`.
///
/// Fails with [`Error::NoConvergence`] past `t_max`, and with
/// [`Error::UnmatchedCritical`] if the flow stalls (gradient below
/// `grad_tol`) away from every known critical element.
pub fn integrate(
    f: &dyn SmoothFunction,
    start: &Vector3<f64>,
    direction: Direction,
    set: &CriticalSet,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let m = f.manifold();
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Backward => 1.0,
    };
    let field = |x: &Vector3<f64>| f.gradient(&m.normalize(*x)) * sign;
    let mut x = m.normalize(*start);
    let mut t = 0.0;
    let mut h = 1e-2;
    let mut path = vec![(0.0, x)];
    let no_convergence = || Error::NoConvergence {
        t_max: tol.t_max,
        start: start.as_slice()[..m.coord_dim()].to_vec(),
    };
    let mut k = [Vector3::zeros(); 7];
    k[0] = field(&x);
    for _ in 0..MAX_STEPS {
        if let Some((id, d)) = set.locate(&x, tol.capture_radius) {
            return Ok(finish(f, set, path, direction, id, d));
        }
        if k[0].norm() < tol.grad_tol {
            if let Some((id, d)) = set.locate(&x, 10.0 * tol.capture_radius) {
                return Ok(finish(f, set, path, direction, id, d));
            }
            return Err(Error::UnmatchedCritical {
                position: x.as_slice()[..m.coord_dim()].to_vec(),
            });
        }
        if t > tol.t_max {
            return Err(no_convergence());
        }
        for s in 1..7 {
            let mut y = x;
            for (j, kj) in k.iter().enumerate().take(s) {
                y += kj * (h * A[s][j]);
            }
            k[s] = field(&y);
        }
        let mut x5 = x;
        let mut err = Vector3::zeros();
        for s in 0..7 {
            x5 += k[s] * (h * B5[s]);
            err += k[s] * (h * (B5[s] - B4[s]));
        }
        let e = err.amax();
        if e <= tol.ode_tol || h < 1e-12 {
            t += h;
            x = m.normalize(x5);
            path.push((t, x));
            k[0] = field(&x);
        }
        let factor = if e == 0.0 {
            5.0
        } else {
            (0.9 * (tol.ode_tol / e).powf(0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(1.0);
    }
    Err(no_convergence())
}

fn finish(
    f: &dyn SmoothFunction,
    set: &CriticalSet,
    path: Vec<(f64, Vector3<f64>)>,
    direction: Direction,
    limit: ElementId,
    capture_distance: f64,
) -> Trajectory {
    let m = f.manifold();
    let total = path.last().map_or(0.0, |p| p.0);
    let end = path.last().map(|p| p.1).unwrap_or_default();
    let limit = Limit::of(set, limit, &end);
    let mut samples: Vec<Sample> = path
        .into_iter()
        .map(|(t, x)| Sample {
            t: match direction {
                Direction::Forward => t,
                Direction::Backward => total - t,
            },
            x: Point::from_raw(m, x),
            f: f.value(&x),
        })
        .collect();
    if direction == Direction::Backward {
        samples.reverse();
    }
    let (alpha_limit, omega_limit) = match direction {
        Direction::Forward => (None, Some(limit)),
        Direction::Backward => (Some(limit), None),
    };
    Trajectory {
        direction,
        samples,
        alpha_limit,
        omega_limit,
        capture_distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_engine::{detect_critical_set, DetectOptions};
    use crate::landscape::lookup;

    #[test]
    fn meridian_on_height_sphere() {
        let l = lookup("sphere_height").unwrap();
        let tol = Tolerances::default();
        let set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        let start = Vector3::new(0.6, 0.0, 0.8);
        let tr = integrate(&l, &start, Direction::Forward, &set, &tol).unwrap();
        assert_eq!(tr.captured().element, ElementId::Point(0));
        assert!(tr.is_monotone(1e-12));
        // The flow of the height function stays on its meridian.
        assert!(tr.samples.iter().all(|s| s.x.raw().y.abs() < 1e-9));
        let up = integrate(&l, &start, Direction::Backward, &set, &tol).unwrap();
        assert_eq!(up.captured().element, ElementId::Point(1));
        assert!(up.is_monotone(1e-12));
        assert!((up.first().t).abs() < 1e-12);
        assert!((up.last().x.raw() - start).norm() < 1e-12);
        let mut closed = tr.clone();
        closed.close_ends();
        assert!((closed.last().x.raw() + Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn critical_start_is_constant() {
        let l = lookup("sphere_height").unwrap();
        let tol = Tolerances::default();
        let set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        let tr = integrate(&l, &Vector3::z(), Direction::Forward, &set, &tol).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.captured().element, ElementId::Point(1));
    }

    /// `cos φ` on the torus: `φ' = sin φ`, `θ' = 0`.
    #[test]
    fn cosphi_flow_preserves_theta() {
        let l = lookup("torus_cosphi").unwrap();
        let tol = Tolerances::default();
        let set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        let tr = integrate(
            &l,
            &Vector3::new(1.3, std::f64::consts::FRAC_PI_2, 0.0),
            Direction::Forward,
            &set,
            &tol,
        )
        .unwrap();
        let lim = tr.captured();
        assert_eq!(lim.element, ElementId::Circle(0));
        assert!((lim.position.raw().x - 1.3).abs() < 1e-12);
        assert!((lim.position.raw().y - std::f64::consts::PI).abs() < 1e-12);
    }

    /// For `cos θ` the flow has the closed form `tan(θ(t)/2) = tan(θ0/2) e^t`.
    #[test]
    fn circle_flow_matches_closed_form() {
        let l = lookup("circle_cos").unwrap();
        let tol = Tolerances::default();
        let set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        let theta0: f64 = 0.5;
        let tr = integrate(&l, &Vector3::new(theta0, 0.0, 0.0), Direction::Forward, &set, &tol).unwrap();
        for s in &tr.samples {
            let exact = 2.0 * ((theta0 / 2.0).tan() * s.t.exp()).atan();
            assert!(
                (s.x.raw().x - exact).abs() < 1e-7,
                "t={} {} vs {exact}",
                s.t,
                s.x.raw().x
            );
        }
    }

    #[test]
    fn stalls_away_from_known_points_are_reported() {
        let l = lookup("sphere_height").unwrap();
        let tol = Tolerances::default();
        let mut set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        set.points.truncate(1);
        let r = integrate(&l, &Vector3::new(0.6, 0.0, 0.8), Direction::Backward, &set, &tol);
        assert!(matches!(r, Err(Error::UnmatchedCritical { .. })));
    }
}
