use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Rotation3, SymmetricEigen, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::tolerances::Tolerances;
use crate::error::{Error, Result};
use crate::landscape::{CircleChart, Manifold, Point, SmoothFunction};

/// A nondegenerate critical point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub id: usize,
    pub position: Point,
    pub value: f64,
    /// Number of Hessian eigenvalues below `−eig_tol`.
    pub index: usize,
    /// Hessian eigenvalues in ascending order.
    pub hessian_spectrum: Vec<f64>,
    pub parent_submanifold: Option<usize>,
}

/// A critical circle of a Morse–Bott function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalSubmanifold {
    pub id: usize,
    pub dimension: usize,
    pub bott_index: usize,
    pub value: f64,
    pub chart: CircleChart,
    /// Points of the circle ordered by increasing `u`.
    pub sample_points: Vec<Point>,
    /// `(negative, positive)` eigenvalue counts of the normal Hessian.
    pub normal_hessian_signature: (usize, usize),
    /// The normal Hessian eigenvalue at the first sample.
    pub normal_eigenvalue: f64,
}

/// Reference to one element of a critical set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ElementId {
    Point(usize),
    Circle(usize),
}

/// All critical points and circles of a function, in canonical order:
/// increasing value, then lexicographic position.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalSet {
    pub manifold: Manifold,
    pub points: Vec<CriticalPoint>,
    pub circles: Vec<CriticalSubmanifold>,
}

impl CriticalSet {
    /// Critical element within `radius` of `x`, nearest first.
    pub fn locate(&self, x: &Vector3<f64>, radius: f64) -> Option<(ElementId, f64)> {
        let mut best: Option<(ElementId, f64)> = None;
        let mut consider = |id, d: f64| {
            if d <= radius && best.map_or(true, |(_, b)| d < b) {
                best = Some((id, d));
            }
        };
        for p in &self.points {
            consider(ElementId::Point(p.id), self.manifold.distance(x, p.position.raw()));
        }
        for c in &self.circles {
            consider(ElementId::Circle(c.id), c.chart.r(x).abs());
        }
        best
    }

    pub fn value_of(&self, id: ElementId) -> f64 {
        match id {
            ElementId::Point(i) => self.points[i].value,
            ElementId::Circle(i) => self.circles[i].value,
        }
    }

    /// Bott index of an element (Morse index for points).
    pub fn index_of(&self, id: ElementId) -> usize {
        match id {
            ElementId::Point(i) => self.points[i].index,
            ElementId::Circle(i) => self.circles[i].bott_index,
        }
    }

    /// Critical point counts `ν_k` by index (points only).
    pub fn counts_by_index(&self) -> Vec<usize> {
        let mut nu = vec![0; self.manifold.dim() + 1];
        for p in &self.points {
            nu[p.index] += 1;
        }
        nu
    }

    pub fn is_morse(&self) -> bool {
        self.circles.is_empty()
    }

    /// `Σ (−1)^λ χ(C)` over critical elements; equals the Euler
    /// characteristic of the manifold when detection is complete.
    pub fn euler_sum(&self) -> i64 {
        // Circles have Euler characteristic zero.
        self.points.iter().map(|p| if p.index % 2 == 0 { 1 } else { -1 }).sum()
    }

    pub fn points_of_index(&self, k: usize) -> Vec<&CriticalPoint> {
        self.points.iter().filter(|p| p.index == k).collect()
    }
}

/// Sampling layout for detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DetectOptions {
    /// Grid points per angle on tori and circles; the sphere uses
    /// `density²` Fibonacci points.
    pub density: usize,
    /// Controls only the offset and rotation of the seed layout.
    pub seed: u64,
    /// Number of verification samples on each critical circle.
    pub circle_samples: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            density: 32,
            seed: 0,
            circle_samples: 64,
        }
    }
}

/// Ascending Hessian spectrum and eigenvectors (as tangent vectors).
pub(crate) fn hessian_eigen(f: &dyn SmoothFunction, x: &Vector3<f64>) -> (Vec<f64>, Vec<Vector3<f64>>) {
    let (basis, h) = f.tangent_hessian(x);
    eigen_in_basis(&basis, &h)
}

pub(crate) fn eigen_in_basis(basis: &[Vector3<f64>], h: &DMatrix<f64>) -> (Vec<f64>, Vec<Vector3<f64>>) {
    let n = basis.len();
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let col = eig.eigenvectors.column(i);
            let mut v = Vector3::zeros();
            for (k, b) in basis.iter().enumerate() {
                v += b * col[k];
            }
            v
        })
        .collect();
    (values, vectors)
}

/// Damped Newton iteration on `∇f = 0` with a pseudo-inverse that ignores
/// eigenvalues below `eig_tol`. Returns the refined point and its gradient
/// norm.
pub(crate) fn refine(f: &dyn SmoothFunction, x0: Vector3<f64>, tol: &Tolerances) -> (Vector3<f64>, f64) {
    let m = f.manifold();
    let mut x = m.normalize(x0);
    let mut g = f.gradient(&x);
    let mut gn = g.norm();
    for _ in 0..100 {
        if gn < 1e-14 {
            break;
        }
        let (values, vectors) = hessian_eigen(f, &x);
        let mut step = Vector3::zeros();
        for (lam, v) in values.iter().zip(&vectors) {
            if lam.abs() >= tol.eig_tol {
                step -= v * (v.dot(&g) / lam);
            }
        }
        let len = step.norm();
        if len == 0.0 {
            break;
        }
        if len > 0.25 {
            step *= 0.25 / len;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let xn = m.retract(&x, &(step * alpha));
            let gnew = f.gradient(&xn);
            if gnew.norm() < gn {
                x = xn;
                g = gnew;
                gn = g.norm();
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, gn)
}

fn seeds(m: Manifold, opts: &DetectOptions) -> Vec<Vector3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.density.max(2);
    match m {
        Manifold::Circle => {
            let off: f64 = rng.gen();
            (0..n)
                .map(|i| Vector3::new(TAU * (i as f64 + off) / n as f64, 0.0, 0.0))
                .collect()
        }
        Manifold::Torus => {
            let (ox, oy): (f64, f64) = (rng.gen(), rng.gen());
            let mut v = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    v.push(Vector3::new(
                        TAU * (i as f64 + ox) / n as f64,
                        TAU * (j as f64 + oy) / n as f64,
                        0.0,
                    ));
                }
            }
            v
        }
        Manifold::Sphere => {
            let count = n * n;
            let axis = Unit::new_normalize(Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 1.0));
            let rot = Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..TAU));
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    rot * Vector3::new(r * a.cos(), r * a.sin(), z)
                })
                .collect()
        }
    }
}

fn lex_cmp(a: &Vector3<f64>, b: &Vector3<f64>) -> Ordering {
    for i in 0..3 {
        match a[i].partial_cmp(&b[i]).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Snap coordinates within 1e−12 of a multiple of π/2 (or of 0 and ±1 on the
/// sphere) so that the canonical order does not depend on rounding noise.
fn canonical(m: Manifold, x: Vector3<f64>) -> Vector3<f64> {
    let mut y = x;
    for i in 0..m.coord_dim() {
        let unit = if m == Manifold::Sphere { 1.0 } else { PI / 2.0 };
        let k = (y[i] / unit).round();
        if (y[i] - k * unit).abs() < 1e-12 {
            y[i] = k * unit;
        }
    }
    m.normalize(y)
}

struct Refined {
    x: Vector3<f64>,
    values: Vec<f64>,
    vectors: Vec<Vector3<f64>>,
}

/// Finds every critical point and critical circle by grid seeding and
/// Newton refinement, then classifies each element.
pub fn detect_critical_set(f: &dyn SmoothFunction, tol: &Tolerances, opts: &DetectOptions) -> Result<CriticalSet> {
    let m = f.manifold();
    let refined: Vec<Refined> = seeds(m, opts)
        .into_par_iter()
        .filter_map(|s| {
            let (x, gn) = refine(f, s, tol);
            (gn < 0.1 * tol.grad_tol).then(|| {
                let (values, vectors) = hessian_eigen(f, &x);
                Refined { x, values, vectors }
            })
        })
        .collect();

    let mut isolated: Vec<&Refined> = Vec::new();
    let mut on_circles: Vec<(CircleChart, &Refined)> = Vec::new();
    for r in &refined {
        let null: Vec<usize> = (0..r.values.len())
            .filter(|&i| r.values[i].abs() < tol.eig_tol)
            .collect();
        match null.len() {
            0 => isolated.push(r),
            1 if m.dim() == 2 => on_circles.push((chart_through(m, &r.x, &r.vectors[null[0]])?, r)),
            _ => {
                return Err(Error::DegenerateCritical {
                    position: r.x.as_slice()[..m.coord_dim()].to_vec(),
                    detail: format!("{} null Hessian directions", null.len()),
                })
            }
        }
    }

    // Isolated points: merge within cluster_tol.
    let mut reps: Vec<&Refined> = Vec::new();
    for r in isolated {
        if !reps.iter().any(|q| m.distance(&q.x, &r.x) < tol.cluster_tol) {
            reps.push(r);
        }
    }
    let mut points: Vec<CriticalPoint> = reps
        .into_iter()
        .map(|r| {
            let x = canonical(m, r.x);
            CriticalPoint {
                id: 0,
                position: Point::from_raw(m, x),
                value: f.value(&x),
                index: r.values.iter().filter(|&&l| l < -tol.eig_tol).count(),
                hessian_spectrum: r.values.clone(),
                parent_submanifold: None,
            }
        })
        .collect();
    points.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| lex_cmp(a.position.raw(), b.position.raw()))
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.id = i;
    }

    // Circles: group by fitted chart parameter.
    let mut groups: Vec<(CircleChart, Vec<f64>)> = Vec::new();
    for (chart, _) in &on_circles {
        let param = chart_param(chart);
        match groups
            .iter_mut()
            .find(|(c, ps)| same_family(c, chart) && param_gap(chart, ps[0], param) < tol.cluster_tol)
        {
            Some((_, ps)) => ps.push(param),
            None => groups.push((*chart, vec![param])),
        }
    }
    let mut circles = Vec::new();
    for (chart, params) in groups {
        // Newton converges far below cluster_tol, so any member represents
        // the group; averaging would break across the angle seam.
        let chart = canonical_chart(with_param(&chart, params[0]));
        circles.push(verify_circle(f, chart, tol, opts.circle_samples)?);
    }
    circles.sort_by(|a, b| {
        a.value.partial_cmp(&b.value).unwrap_or(Ordering::Equal).then_with(|| {
            chart_param(&a.chart)
                .partial_cmp(&chart_param(&b.chart))
                .unwrap_or(Ordering::Equal)
        })
    });
    for (i, c) in circles.iter_mut().enumerate() {
        c.id = i;
    }
    Ok(CriticalSet {
        manifold: m,
        points,
        circles,
    })
}

/// The coordinate circle through `x` whose tangent is the null direction.
fn chart_through(m: Manifold, x: &Vector3<f64>, null: &Vector3<f64>) -> Result<CircleChart> {
    let misaligned = || Error::DegenerateCritical {
        position: x.as_slice()[..m.coord_dim()].to_vec(),
        detail: "critical circle is not a coordinate circle of the chart".into(),
    };
    let v = null.normalize();
    match m {
        Manifold::Torus => {
            if v.x.abs() > 1.0 - 1e-6 {
                Ok(CircleChart::TorusPhi { phi0: x.y })
            } else if v.y.abs() > 1.0 - 1e-6 {
                Ok(CircleChart::TorusTheta { theta0: x.x })
            } else {
                Err(misaligned())
            }
        }
        Manifold::Sphere => {
            let along = Vector3::new(-x.y, x.x, 0.0);
            if along.norm() > 1e-6 && v.dot(&along.normalize()).abs() > 1.0 - 1e-6 {
                Ok(CircleChart::SphereLatitude { z0: x.z })
            } else {
                Err(misaligned())
            }
        }
        Manifold::Circle => Err(misaligned()),
    }
}

fn chart_param(c: &CircleChart) -> f64 {
    match c {
        CircleChart::WholeCircle => 0.0,
        CircleChart::TorusPhi { phi0 } => *phi0,
        CircleChart::TorusTheta { theta0 } => *theta0,
        CircleChart::SphereLatitude { z0 } => *z0,
    }
}

fn param_gap(c: &CircleChart, a: f64, b: f64) -> f64 {
    match c {
        CircleChart::SphereLatitude { .. } => (a - b).abs(),
        _ => crate::landscape::wrap_signed(a - b).abs(),
    }
}

fn same_family(a: &CircleChart, b: &CircleChart) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

fn with_param(c: &CircleChart, p: f64) -> CircleChart {
    match c {
        CircleChart::WholeCircle => CircleChart::WholeCircle,
        CircleChart::TorusPhi { .. } => CircleChart::TorusPhi { phi0: p },
        CircleChart::TorusTheta { .. } => CircleChart::TorusTheta { theta0: p },
        CircleChart::SphereLatitude { .. } => CircleChart::SphereLatitude { z0: p },
    }
}

fn canonical_chart(c: CircleChart) -> CircleChart {
    let snap = |v: f64, unit: f64| {
        let k = (v / unit).round();
        if (v - k * unit).abs() < 1e-9 {
            k * unit
        } else {
            v
        }
    };
    match c {
        CircleChart::TorusPhi { phi0 } => CircleChart::TorusPhi {
            phi0: crate::landscape::wrap_angle(snap(phi0, PI / 2.0)),
        },
        CircleChart::TorusTheta { theta0 } => CircleChart::TorusTheta {
            theta0: crate::landscape::wrap_angle(snap(theta0, PI / 2.0)),
        },
        CircleChart::SphereLatitude { z0 } => CircleChart::SphereLatitude { z0: snap(z0, 1.0) },
        other => other,
    }
}

/// Checks criticality and Morse–Bott nondegeneracy on a dense sample of the
/// circle.
fn verify_circle(
    f: &dyn SmoothFunction,
    chart: CircleChart,
    tol: &Tolerances,
    samples: usize,
) -> Result<CriticalSubmanifold> {
    let m = f.manifold();
    let mut bott = None;
    let mut normal_eig = 0.0;
    let mut pts = Vec::with_capacity(samples);
    for k in 0..samples {
        let u = TAU * k as f64 / samples as f64;
        let x = chart.point(u);
        let degenerate = |detail: String| Error::DegenerateCritical {
            position: x.as_slice()[..m.coord_dim()].to_vec(),
            detail,
        };
        let g = f.gradient(&x).norm();
        if g >= tol.grad_tol {
            return Err(degenerate(format!("gradient {g:e} on fitted critical circle")));
        }
        let (values, vectors) = hessian_eigen(f, &x);
        let along = chart.along(&x);
        let mut null = 0;
        let mut neg = 0;
        for (lam, v) in values.iter().zip(&vectors) {
            if lam.abs() < tol.eig_tol {
                null += 1;
                if v.dot(&along).abs() < 1.0 - 1e-6 {
                    return Err(degenerate("null direction transverse to the circle".into()));
                }
            } else if *lam < 0.0 {
                neg += 1;
            }
            if lam.abs() >= tol.eig_tol && k == 0 {
                normal_eig = *lam;
            }
        }
        if null != 1 {
            return Err(degenerate(format!("{null} null directions on a critical circle")));
        }
        match bott {
            None => bott = Some(neg),
            Some(b) if b != neg => return Err(degenerate("Bott index varies along the circle".into())),
            _ => {}
        }
        pts.push(Point::from_raw(m, x));
    }
    let bott_index = bott.unwrap_or(0);
    let normal_dim = m.dim() - 1;
    Ok(CriticalSubmanifold {
        id: 0,
        dimension: 1,
        bott_index,
        value: f.value(&chart.point(0.0)),
        chart,
        sample_points: pts,
        normal_hessian_signature: (bott_index, normal_dim - bott_index),
        normal_eigenvalue: normal_eig,
    })
}
