use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::manifold::{wrap_angle, wrap_signed, Jet, Manifold};

/// Tubular coordinates `(u, r)` around a critical circle: `u` runs along the
/// circle, `r` is the signed normal arclength. Every critical circle in the
/// catalog is a coordinate circle of the global chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleChart {
    /// The whole circle manifold, `u = θ`.
    WholeCircle,
    /// Torus circle `φ = phi0`, `u = θ`, `r = φ − phi0`.
    TorusPhi { phi0: f64 },
    /// Torus circle `θ = theta0`, `u = φ`, `r = θ − theta0`.
    TorusTheta { theta0: f64 },
    /// Sphere latitude circle `z = z0`, `u = atan2(y, x)`,
    /// `r = asin z − asin z0`.
    SphereLatitude { z0: f64 },
}

impl CircleChart {
    pub fn manifold(&self) -> Manifold {
        match self {
            CircleChart::WholeCircle => Manifold::Circle,
            CircleChart::TorusPhi { .. } | CircleChart::TorusTheta { .. } => Manifold::Torus,
            CircleChart::SphereLatitude { .. } => Manifold::Sphere,
        }
    }

    /// Along-circle coordinate in `[0, 2π)`.
    pub fn u(&self, x: &Vector3<f64>) -> f64 {
        match self {
            CircleChart::WholeCircle | CircleChart::TorusPhi { .. } => wrap_angle(x.x),
            CircleChart::TorusTheta { .. } => wrap_angle(x.y),
            CircleChart::SphereLatitude { .. } => wrap_angle(x.y.atan2(x.x)),
        }
    }

    /// Signed normal offset in arclength.
    pub fn r(&self, x: &Vector3<f64>) -> f64 {
        match self {
            CircleChart::WholeCircle => 0.0,
            CircleChart::TorusPhi { phi0 } => wrap_signed(x.y - phi0),
            CircleChart::TorusTheta { theta0 } => wrap_signed(x.x - theta0),
            CircleChart::SphereLatitude { z0 } => x.z.clamp(-1.0, 1.0).asin() - z0.asin(),
        }
    }

    /// The point of the circle with coordinate `u`.
    pub fn point(&self, u: f64) -> Vector3<f64> {
        match self {
            CircleChart::WholeCircle => Vector3::new(wrap_angle(u), 0.0, 0.0),
            CircleChart::TorusPhi { phi0 } => Vector3::new(wrap_angle(u), wrap_angle(*phi0), 0.0),
            CircleChart::TorusTheta { theta0 } => Vector3::new(wrap_angle(*theta0), wrap_angle(u), 0.0),
            CircleChart::SphereLatitude { z0 } => {
                let rho = (1.0 - z0 * z0).max(0.0).sqrt();
                Vector3::new(rho * u.cos(), rho * u.sin(), *z0)
            }
        }
    }

    /// Unit tangent along the circle (direction of increasing `u`).
    pub fn along(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            CircleChart::WholeCircle | CircleChart::TorusPhi { .. } => Vector3::x(),
            CircleChart::TorusTheta { .. } => Vector3::y(),
            CircleChart::SphereLatitude { .. } => Vector3::new(-x.y, x.x, 0.0).normalize(),
        }
    }

    /// Unit normal (direction of increasing `r`); zero on the circle manifold.
    pub fn normal(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            CircleChart::WholeCircle => Vector3::zeros(),
            CircleChart::TorusPhi { .. } => Vector3::y(),
            CircleChart::TorusTheta { .. } => Vector3::x(),
            CircleChart::SphereLatitude { .. } => {
                let t = Vector3::z() - x * x.z;
                t.normalize()
            }
        }
    }

    /// Arclength per unit of `u`.
    pub fn radius(&self) -> f64 {
        match self {
            CircleChart::SphereLatitude { z0 } => (1.0 - z0 * z0).max(0.0).sqrt(),
            _ => 1.0,
        }
    }

    /// Second-order data of `u` in stored coordinates.
    pub fn u_jet(&self, x: &Vector3<f64>) -> Jet {
        match self {
            CircleChart::WholeCircle | CircleChart::TorusPhi { .. } => Jet {
                value: x.x,
                grad: Vector3::x(),
                hess: Matrix3::zeros(),
            },
            CircleChart::TorusTheta { .. } => Jet {
                value: x.y,
                grad: Vector3::y(),
                hess: Matrix3::zeros(),
            },
            CircleChart::SphereLatitude { .. } => {
                let (px, py) = (x.x, x.y);
                let rr = px * px + py * py;
                let rr2 = rr * rr;
                let grad = Vector3::new(-py / rr, px / rr, 0.0);
                let a = 2.0 * px * py / rr2;
                let b = (py * py - px * px) / rr2;
                let hess = Matrix3::new(a, b, 0.0, b, -a, 0.0, 0.0, 0.0, 0.0);
                Jet {
                    value: py.atan2(px),
                    grad,
                    hess,
                }
            }
        }
    }

    /// Second-order data of `r` in stored coordinates.
    pub fn r_jet(&self, x: &Vector3<f64>) -> Jet {
        match self {
            CircleChart::WholeCircle => Jet::constant(0.0),
            CircleChart::TorusPhi { .. } => Jet {
                value: self.r(x),
                grad: Vector3::y(),
                hess: Matrix3::zeros(),
            },
            CircleChart::TorusTheta { .. } => Jet {
                value: self.r(x),
                grad: Vector3::x(),
                hess: Matrix3::zeros(),
            },
            CircleChart::SphereLatitude { .. } => {
                let z = x.z;
                let w = (1.0 - z * z).max(1e-300);
                let s = w.sqrt();
                let mut hess = Matrix3::zeros();
                hess[(2, 2)] = z / (w * s);
                Jet {
                    value: self.r(x),
                    grad: Vector3::new(0.0, 0.0, 1.0 / s),
                    hess,
                }
            }
        }
    }
}

/// Geodesic distance to a fixed point, with its derivatives away from the
/// center and the cut locus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointChart {
    pub manifold: Manifold,
    #[serde(skip)]
    pub center: Vector3<f64>,
}

impl PointChart {
    pub fn r(&self, x: &Vector3<f64>) -> f64 {
        self.manifold.distance(&self.center, x)
    }

    pub fn r_jet(&self, x: &Vector3<f64>) -> Jet {
        match self.manifold {
            Manifold::Sphere => {
                let s = self.center.dot(x).clamp(-1.0, 1.0);
                let w = (1.0 - s * s).max(1e-300);
                let root = w.sqrt();
                Jet {
                    value: s.acos(),
                    grad: -self.center / root,
                    hess: -(s / (w * root)) * self.center * self.center.transpose(),
                }
            }
            m => {
                let mut d = Vector3::zeros();
                for i in 0..m.coord_dim() {
                    d[i] = wrap_signed(x[i] - self.center[i]);
                }
                let r = d.norm().max(1e-300);
                let grad = d / r;
                let mut eye = Matrix3::zeros();
                for i in 0..m.coord_dim() {
                    eye[(i, i)] = 1.0;
                }
                Jet {
                    value: r,
                    grad,
                    hess: (eye - grad * grad.transpose()) / r,
                }
            }
        }
    }
}

/// Radial cutoff: 1 for `|r| ≤ inner`, 0 for `|r| ≥ outer`, quintic
/// smoothstep in between (C² at both junctions).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self { inner: 0.2, outer: 0.4 }
    }
}

impl BumpProfile {
    /// `(ρ, dρ/dr, d²ρ/dr²)` at signed radius `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let a = r.abs();
        if a <= self.inner {
            return (1.0, 0.0, 0.0);
        }
        if a >= self.outer {
            return (0.0, 0.0, 0.0);
        }
        let w = self.outer - self.inner;
        let s = (a - self.inner) / w;
        let smooth = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        let d1 = 30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
        let d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
        (1.0 - smooth, -d1 * r.signum(), -d2)
    }

    /// Whether `r` lies strictly inside the transition annulus.
    pub fn in_transition(&self, r: f64) -> bool {
        let a = r.abs();
        a > self.inner && a < self.outer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let b = BumpProfile::default();
        assert_eq!(b.eval(0.0).0, 1.0);
        assert_eq!(b.eval(0.2).0, 1.0);
        assert_eq!(b.eval(-0.4).0, 0.0);
        assert!((b.eval(0.3).0 - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = b.eval(0.2 + 0.2 * k as f64 / 100.0).0;
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
        // Derivatives against central differences.
        for &r in &[0.23, 0.3, -0.35, 0.39] {
            let h = 1e-6;
            let fd1 = (b.eval(r + h).0 - b.eval(r - h).0) / (2.0 * h);
            let fd2 = (b.eval(r + h).1 - b.eval(r - h).1) / (2.0 * h);
            let (_, d1, d2) = b.eval(r);
            assert!((fd1 - d1).abs() < 1e-6, "{r}: {fd1} vs {d1}");
            assert!((fd2 - d2).abs() < 1e-4, "{r}: {fd2} vs {d2}");
        }
    }

    #[test]
    fn latitude_round_trip() {
        let c = CircleChart::SphereLatitude { z0: 0.3 };
        let p = c.point(1.2);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!((c.u(&p) - 1.2).abs() < 1e-14);
        assert!(c.r(&p).abs() < 1e-15);
        assert!(c.normal(&p).dot(&p).abs() < 1e-15);
        assert!(c.along(&p).dot(&c.normal(&p)).abs() < 1e-15);
    }

    #[test]
    fn chart_jets_match_differences() {
        let x = Vector3::new(0.5, -0.4, 0.3);
        let charts = [CircleChart::SphereLatitude { z0: 0.1 }];
        for c in charts {
            for jet_fn in [CircleChart::u_jet, CircleChart::r_jet] {
                let j = jet_fn(&c, &x);
                for i in 0..3 {
                    let h = 1e-6;
                    let mut e = Vector3::zeros();
                    e[i] = h;
                    let gp = jet_fn(&c, &(x + e));
                    let gm = jet_fn(&c, &(x - e));
                    let fd = (gp.value - gm.value) / (2.0 * h);
                    assert!((fd - j.grad[i]).abs() < 1e-7);
                    let fdh = (gp.grad - gm.grad) / (2.0 * h);
                    for k in 0..3 {
                        assert!((fdh[k] - j.hess[(k, i)]).abs() < 1e-6);
                    }
                }
            }
        }
        let pc = PointChart {
            manifold: Manifold::Sphere,
            center: Vector3::z(),
        };
        let y = Vector3::new(0.2, 0.1, 0.9);
        let j = pc.r_jet(&y);
        for i in 0..3 {
            let h = 1e-6;
            let mut e = Vector3::zeros();
            e[i] = h;
            let fd = (pc.r_jet(&(y + e)).value - pc.r_jet(&(y - e)).value) / (2.0 * h);
            assert!((fd - j.grad[i]).abs() < 1e-6);
        }
    }
}
