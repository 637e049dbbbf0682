use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constraint violation beyond which a point is rejected.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// The catalog manifolds, each with one global structured chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    /// `S^1` with angle coordinate `θ`.
    Circle,
    /// Flat `T^2` with angle coordinates `(θ, φ)`.
    Torus,
    /// Unit `S^2 ⊂ R^3` with the induced round metric.
    Sphere,
}

impl Manifold {
    /// Intrinsic dimension.
    pub fn dim(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Torus | Manifold::Sphere => 2,
        }
    }

    /// Number of stored coordinates.
    pub fn coord_dim(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Torus => 2,
            Manifold::Sphere => 3,
        }
    }

    /// Euler characteristic.
    pub fn euler_characteristic(self) -> i64 {
        match self {
            Manifold::Circle | Manifold::Torus => 0,
            Manifold::Sphere => 2,
        }
    }

    /// Betti numbers of the manifold.
    pub fn reference_betti(self) -> Vec<usize> {
        match self {
            Manifold::Circle => vec![1, 1],
            Manifold::Torus => vec![1, 2, 1],
            Manifold::Sphere => vec![1, 0, 1],
        }
    }

    fn periodic(self) -> bool {
        matches!(self, Manifold::Circle | Manifold::Torus)
    }

    /// Brings raw coordinates into canonical form: angles into `[0, 2π)`,
    /// sphere points onto the unit sphere.
    pub fn normalize(self, c: Vector3<f64>) -> Vector3<f64> {
        if self.periodic() {
            let mut out = Vector3::zeros();
            for i in 0..self.coord_dim() {
                out[i] = wrap_angle(c[i]);
            }
            out
        } else {
            c / c.norm()
        }
    }

    /// Moves from `p` along the tangent vector `v` and lands back on the
    /// manifold (angle wrap on tori, normalization on the sphere).
    pub fn retract(self, p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        self.normalize(p + v)
    }

    /// Exponential map of the flat or round metric.
    pub fn exp(self, p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Manifold::Sphere => {
                let n = v.norm();
                if n < 1e-300 {
                    *p
                } else {
                    let q = p * n.cos() + v * (n.sin() / n);
                    q / q.norm()
                }
            }
            _ => self.normalize(p + v),
        }
    }

    /// Projection of an ambient vector onto the tangent space at `p`.
    pub fn project(self, p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Manifold::Sphere => v - p * p.dot(v),
            _ => *v,
        }
    }

    /// Riemannian distance: flat distance with wrap on tori, great-circle
    /// distance on the sphere.
    pub fn distance(self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        match self {
            Manifold::Sphere => {
                // atan2 form is accurate for nearby points too.
                let cross = a.cross(b).norm();
                cross.atan2(a.dot(b))
            }
            _ => {
                let mut s = 0.0;
                for i in 0..self.coord_dim() {
                    let d = wrap_signed(a[i] - b[i]);
                    s += d * d;
                }
                s.sqrt()
            }
        }
    }

    /// Orthonormal tangent basis at `p`. On the sphere the basis is
    /// positively oriented with respect to the outward normal.
    pub fn tangent_basis(self, p: &Vector3<f64>) -> Vec<Vector3<f64>> {
        match self {
            Manifold::Circle => vec![Vector3::x()],
            Manifold::Torus => vec![Vector3::x(), Vector3::y()],
            Manifold::Sphere => {
                let helper = if p.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
                let e1 = helper.cross(p).normalize();
                let e2 = p.cross(&e1);
                vec![e1, e2]
            }
        }
    }

    /// Orientation of an ordered pair of tangent vectors at `p`: the sign of
    /// the determinant of their coordinates in a positively oriented basis.
    pub fn orientation(self, p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        match self {
            Manifold::Sphere => p.dot(&a.cross(b)),
            _ => a.x * b.y - a.y * b.x,
        }
    }

    /// Checks the chart constraint and returns the normalized point.
    pub fn validate(self, coords: &[f64]) -> Result<Vector3<f64>> {
        if coords.len() != self.coord_dim() {
            return Err(Error::InvalidPoint {
                violation: f64::INFINITY,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint {
                violation: f64::INFINITY,
            });
        }
        let mut v = Vector3::zeros();
        v.as_mut_slice()[..coords.len()].copy_from_slice(coords);
        if self == Manifold::Sphere {
            let violation = (v.norm() - 1.0).abs();
            if violation > CONSTRAINT_TOL {
                return Err(Error::InvalidPoint { violation });
            }
        }
        Ok(self.normalize(v))
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Manifold::Circle => "S^1",
            Manifold::Torus => "T^2",
            Manifold::Sphere => "S^2",
        };
        write!(f, "{s}")
    }
}

/// Angle reduced into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Angle difference reduced into `(−π, π]`.
pub fn wrap_signed(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A point of a catalog manifold in its global chart.
#[derive(Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub manifold: Manifold,
    #[serde(serialize_with = "serialize_coords")]
    pub(crate) c: Vector3<f64>,
}

fn serialize_coords<S: serde::Serializer>(c: &Vector3<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(None)?;
    for x in c.iter() {
        seq.serialize_element(x)?;
    }
    seq.end()
}

impl Point {
    /// Validated point. Angles are reduced; sphere points must be within
    /// `1e−9` of unit norm.
    pub fn new(manifold: Manifold, coords: &[f64]) -> Result<Self> {
        Ok(Self {
            manifold,
            c: manifold.validate(coords)?,
        })
    }

    pub(crate) fn from_raw(manifold: Manifold, c: Vector3<f64>) -> Self {
        Self {
            manifold,
            c: manifold.normalize(c),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.c.as_slice()[..self.manifold.coord_dim()]
    }

    pub fn raw(&self) -> &Vector3<f64> {
        &self.c
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.manifold.distance(&self.c, &other.c)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

/// Second-order data of a function in stored coordinates: value, gradient
/// and Hessian with respect to the chart (tori) or ambient space (sphere).
/// Unused trailing components are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vector3<f64>,
    pub hess: Matrix3<f64>,
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: Vector3::zeros(),
            hess: Matrix3::zeros(),
        }
    }
}

/// A smooth function on a catalog manifold, given through an extension to
/// the stored coordinates.
pub trait SmoothFunction: Send + Sync {
    fn manifold(&self) -> Manifold;

    fn value(&self, x: &Vector3<f64>) -> f64;

    /// Coordinate gradient of the extension.
    fn coord_grad(&self, x: &Vector3<f64>) -> Vector3<f64>;

    /// Value, coordinate gradient and coordinate Hessian of the extension.
    fn jet(&self, x: &Vector3<f64>) -> Jet;

    /// Riemannian gradient: the coordinate gradient on tori, the projection
    /// onto the tangent plane on the sphere.
    fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let g = self.coord_grad(x);
        self.manifold().project(x, &g)
    }

    /// Riemannian Hessian in the orthonormal basis returned by
    /// [`Manifold::tangent_basis`]. On the sphere this is
    /// `P ∇²F P − (x·∇F) P` restricted to the tangent plane.
    fn tangent_hessian(&self, x: &Vector3<f64>) -> (Vec<Vector3<f64>>, DMatrix<f64>) {
        let m = self.manifold();
        let jet = self.jet(x);
        let basis = m.tangent_basis(x);
        let n = basis.len();
        let mut h = DMatrix::zeros(n, n);
        let shift = if m == Manifold::Sphere { x.dot(&jet.grad) } else { 0.0 };
        for i in 0..n {
            for j in 0..n {
                let mut v = basis[i].dot(&(jet.hess * basis[j]));
                if i == j {
                    v -= shift;
                }
                h[(i, j)] = v;
            }
        }
        (basis, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap() {
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!((wrap_signed(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(TAU), 0.0);
    }

    #[test]
    fn sphere_constraint() {
        assert!(Point::new(Manifold::Sphere, &[0.0, 0.0, 1.0]).is_ok());
        assert!(Point::new(Manifold::Sphere, &[0.0, 0.0, 1.0 + 5e-10]).is_ok());
        assert!(matches!(
            Point::new(Manifold::Sphere, &[0.0, 0.0, 1.1]),
            Err(Error::InvalidPoint { .. })
        ));
        assert!(Point::new(Manifold::Torus, &[1.0]).is_err());
    }

    #[test]
    fn torus_angles_reduced() {
        let p = Point::new(Manifold::Torus, &[-PI, 7.0]).unwrap();
        assert!((p.coords()[0] - PI).abs() < 1e-12);
        assert!((p.coords()[1] - (7.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let a = Vector3::new(0.1, 0.0, 0.0);
        let b = Vector3::new(TAU - 0.1, 0.0, 0.0);
        assert!((Manifold::Torus.distance(&a, &b) - 0.2).abs() < 1e-12);
        let n = Vector3::z();
        let s = -Vector3::z();
        assert!((Manifold::Sphere.distance(&n, &s) - PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_basis_is_oriented() {
        for p in [Vector3::z(), Vector3::x(), Vector3::new(0.6, 0.0, 0.8), -Vector3::z()] {
            let b = Manifold::Sphere.tangent_basis(&p);
            assert!((Manifold::Sphere.orientation(&p, &b[0], &b[1]) - 1.0).abs() < 1e-12);
            assert!(b[0].dot(&p).abs() < 1e-15 && b[1].dot(&p).abs() < 1e-15);
        }
    }
}
