use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::landscape::{wrap_signed, Manifold};

/// Finite sample of a compact subset of a manifold, typically the image of
/// a flow line or of a concatenated cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactSubsetImage {
    pub manifold: Manifold,
    pub points: Vec<Vector3<f64>>,
}

impl CompactSubsetImage {
    pub fn new(manifold: Manifold, points: Vec<Vector3<f64>>) -> Self {
        Self { manifold, points }
    }

    /// Samples a polyline so that consecutive points are at most `spacing`
    /// apart, interpolating through the chart (wrapped on tori, normalized
    /// on the sphere).
    pub fn from_polyline(manifold: Manifold, vertices: &[Vector3<f64>], spacing: f64) -> Self {
        let mut points = Vec::with_capacity(vertices.len());
        for w in vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let steps = (manifold.distance(&a, &b) / spacing).ceil().max(1.0) as usize;
            for k in 0..steps {
                points.push(interpolate(manifold, &a, &b, k as f64 / steps as f64));
            }
        }
        if let Some(last) = vertices.last() {
            points.push(*last);
        }
        Self { manifold, points }
    }

    /// Union of several images on the same manifold.
    pub fn union(manifold: Manifold, parts: impl IntoIterator<Item = CompactSubsetImage>) -> Self {
        let points = parts.into_iter().flat_map(|p| p.points).collect();
        Self { manifold, points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn directed(&self, other: &Self) -> f64 {
        self.points
            .iter()
            .map(|a| {
                other
                    .points
                    .iter()
                    .map(|b| self.manifold.distance(a, b))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Whether every point of `self` has a point of `other` within `tol`.
    /// Points are visited in a strided order so that distinct sets sharing
    /// an endpoint are told apart early.
    fn covered_by(&self, other: &Self, tol: f64) -> bool {
        let n = self.points.len();
        let stride = stride_for(n);
        (0..n).all(|k| {
            let a = &self.points[(k * stride) % n];
            other.points.iter().any(|b| self.manifold.distance(a, b) < tol)
        })
    }
}

/// A step coprime to `n`, close to `n / φ`.
fn stride_for(n: usize) -> usize {
    let mut s = ((n as f64) * 0.618).round().max(1.0) as usize;
    while gcd(s, n) != 1 {
        s += 1;
    }
    s
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn interpolate(m: Manifold, a: &Vector3<f64>, b: &Vector3<f64>, s: f64) -> Vector3<f64> {
    match m {
        Manifold::Sphere => m.normalize(a * (1.0 - s) + b * s),
        _ => {
            let mut d = Vector3::zeros();
            for i in 0..m.coord_dim() {
                d[i] = wrap_signed(b[i] - a[i]);
            }
            m.normalize(a + d * s)
        }
    }
}

/// Symmetric Hausdorff distance between two sampled subsets.
pub fn hausdorff_distance(a: &CompactSubsetImage, b: &CompactSubsetImage) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(a.directed(b).max(b.directed(a)))
}

/// Whether the Hausdorff distance is below `tol`, with early exits; agrees
/// with `hausdorff_distance(a, b)? < tol`.
pub fn hausdorff_within(a: &CompactSubsetImage, b: &CompactSubsetImage, tol: f64) -> Result<bool> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(a.covered_by(b, tol) && b.covered_by(a, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn parallel_torus_segments() {
        let m = Manifold::Torus;
        let a = CompactSubsetImage::from_polyline(m, &[Vector3::new(0.0, 1.0, 0.0), Vector3::new(1.0, 1.0, 0.0)], 0.01);
        let b = CompactSubsetImage::from_polyline(m, &[Vector3::new(0.0, 1.3, 0.0), Vector3::new(1.0, 1.3, 0.0)], 0.01);
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn wraps_across_seam() {
        let m = Manifold::Torus;
        let a = CompactSubsetImage::from_polyline(m, &[Vector3::new(6.2, 0.0, 0.0), Vector3::new(0.1, 0.0, 0.0)], 0.01);
        assert!(a.points.iter().all(|p| p.x > 6.1 || p.x < 0.2));
    }

    #[test]
    fn meridian_to_pole() {
        let m = Manifold::Sphere;
        let arc = CompactSubsetImage::from_polyline(m, &[Vector3::x(), Vector3::z()], 0.001);
        let pole = CompactSubsetImage::new(m, vec![Vector3::z()]);
        assert!((hausdorff_distance(&arc, &pole).unwrap() - FRAC_PI_2).abs() < 1e-9);
        let south = CompactSubsetImage::new(m, vec![-Vector3::z()]);
        assert!((hausdorff_distance(&pole, &south).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn within_agrees_with_distance() {
        let m = Manifold::Torus;
        let seg = |y0: f64, len: f64| {
            CompactSubsetImage::from_polyline(m, &[Vector3::new(0.0, y0, 0.0), Vector3::new(len, y0, 0.0)], 0.01)
        };
        let a = seg(1.0, 1.0);
        for b in [
            seg(1.0, 1.0),
            seg(1.005, 1.0),
            seg(1.02, 1.0),
            seg(1.0, 1.2),
            seg(1.0, 1.005),
        ] {
            for tol in [0.001, 0.01, 0.05, 0.5] {
                assert_eq!(
                    hausdorff_within(&a, &b, tol).unwrap(),
                    hausdorff_distance(&a, &b).unwrap() < tol
                );
            }
        }
    }

    #[test]
    fn empty_is_an_error() {
        let e = CompactSubsetImage::new(Manifold::Circle, vec![]);
        let p = CompactSubsetImage::new(Manifold::Circle, vec![Vector3::zeros()]);
        assert_eq!(hausdorff_distance(&e, &p), Err(Error::EmptySet));
    }
}
