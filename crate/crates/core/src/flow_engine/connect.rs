use std::collections::BTreeMap;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use super::detect::{hessian_eigen, CriticalSet, ElementId};
use super::image::hausdorff_distance;
use super::integrate::{integrate, Direction, Limit, Trajectory};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};
use crate::landscape::SmoothFunction;

/// Sampling spacing used when comparing flow-line images.
pub(crate) const IMAGE_SPACING: f64 = 5e-3;

/// A flow line between two critical points with its orientation sign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowLine {
    pub from: usize,
    pub to: usize,
    pub sign: i64,
    pub trajectory: Trajectory,
}

/// Flow lines from `from` down to `to` for a pair of relative index one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionCount {
    pub from: usize,
    pub to: usize,
    pub unsigned: usize,
    pub signed: i64,
    pub mod2: u8,
    pub lines: Vec<FlowLine>,
}

/// Expected dimension of the space of unparametrized flow lines between two
/// critical elements: `λ_a − λ_b + dim C_a − 1`.
pub fn moduli_dimension(set: &CriticalSet, a: ElementId, b: ElementId) -> i64 {
    let dim_a = match a {
        ElementId::Point(_) => 0,
        ElementId::Circle(_) => 1,
    };
    set.index_of(a) as i64 - set.index_of(b) as i64 + dim_a - 1
}

/// Unit eigenvector for the unique Hessian eigenvalue of the given sign,
/// oriented so that its largest coordinate is positive.
pub(crate) fn principal_direction(f: &dyn SmoothFunction, x: &Vector3<f64>, negative: bool) -> Option<Vector3<f64>> {
    let (values, vectors) = hessian_eigen(f, x);
    let picked: Vec<&Vector3<f64>> = values
        .iter()
        .zip(&vectors)
        .filter(|(l, _)| if negative { **l < 0.0 } else { **l > 0.0 })
        .map(|(_, v)| v)
        .collect();
    if picked.len() != 1 {
        return None;
    }
    Some(canonical_orientation(picked[0].normalize()))
}

fn canonical_orientation(v: Vector3<f64>) -> Vector3<f64> {
    let mut best = 0;
    for i in 1..3 {
        if v[i].abs() > v[best].abs() + 1e-9 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

fn require_morse(set: &CriticalSet) -> Result<()> {
    if set.is_morse() {
        Ok(())
    } else {
        Err(Error::DimensionUnsupported(
            "flow-line counting between isolated points needs a Morse function".into(),
        ))
    }
}

/// Integrates from `exp_center(r e)` in the given direction and records the
/// center as the opposite limit.
fn shoot_one(
    f: &dyn SmoothFunction,
    set: &CriticalSet,
    source: usize,
    e: &Vector3<f64>,
    direction: Direction,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let m = f.manifold();
    let center = set.points[source].position.raw();
    let mut tr = integrate(f, &m.exp(center, &(e * tol.shooting_radius)), direction, set, tol)?;
    let origin = Some(Limit::of(set, ElementId::Point(source), center));
    match direction {
        Direction::Forward => tr.alpha_limit = origin,
        Direction::Backward => tr.omega_limit = origin,
    }
    tr.close_ends();
    Ok(tr)
}

/// Sign of a line arriving at the index-one point `q` of a surface: the
/// orientation of (arrival velocity, oriented unstable direction of `q`).
fn arrival_sign(f: &dyn SmoothFunction, set: &CriticalSet, q: usize, tr: &Trajectory) -> Result<i64> {
    let m = f.manifold();
    let x = set.points[q].position.raw();
    let e_u = principal_direction(f, x, true).ok_or(Error::RelativeIndexNotOne(set.points[q].index as i64))?;
    // The last sample is the limit itself; read the velocity one step before.
    let n = tr.samples.len();
    let near = tr.samples[n.saturating_sub(2)].x;
    let arrival = -f.gradient(near.raw());
    Ok(if m.orientation(x, &arrival, &e_u) > 0.0 { 1 } else { -1 })
}

/// Lines leaving an index-one point downward; sign `+1` along the oriented
/// unstable direction.
fn descending_lines(f: &dyn SmoothFunction, set: &CriticalSet, p: usize, tol: &Tolerances) -> Result<Vec<FlowLine>> {
    let x = *set.points[p].position.raw();
    let e = principal_direction(f, &x, true).ok_or(Error::RelativeIndexNotOne(set.points[p].index as i64))?;
    let mut out = Vec::new();
    for sign in [1, -1] {
        let tr = shoot_one(f, set, p, &(e * sign as f64), Direction::Forward, tol)?;
        if let ElementId::Point(q) = tr.captured().element {
            out.push(FlowLine {
                from: p,
                to: q,
                sign,
                trajectory: tr,
            });
        }
    }
    Ok(out)
}

/// Lines arriving at a point of index `dim − 1` from above, found by
/// shooting backward along its one stable direction.
fn ascending_lines(f: &dyn SmoothFunction, set: &CriticalSet, q: usize, tol: &Tolerances) -> Result<Vec<FlowLine>> {
    let x = *set.points[q].position.raw();
    let e_s = principal_direction(f, &x, false).ok_or(Error::RelativeIndexNotOne(set.points[q].index as i64))?;
    let mut out = Vec::new();
    for side in [1.0, -1.0] {
        let tr = shoot_one(f, set, q, &(e_s * side), Direction::Backward, tol)?;
        if let ElementId::Point(p) = tr.captured().element {
            out.push(FlowLine {
                from: p,
                to: q,
                sign: arrival_sign(f, set, q, &tr)?,
                trajectory: tr,
            });
        }
    }
    Ok(out)
}

/// Forward cross-check of [`count_connections`] for a source of index two on
/// a surface: shoots from `density` equally spaced directions on the
/// radius-`r` unstable circle, refines each local minimum of the closest
/// approach to `q` by golden-section search until the flow is captured at
/// `q`, and clusters the captured lines. Sources of index one have a
/// zero-dimensional unstable sphere and use the two-direction shot.
pub fn dense_scan_connections(
    f: &dyn SmoothFunction,
    set: &CriticalSet,
    p: usize,
    q: usize,
    tol: &Tolerances,
    density: usize,
) -> Result<ConnectionCount> {
    require_morse(set)?;
    let rel = set.points[p].index as i64 - set.points[q].index as i64;
    if rel != 1 {
        return Err(Error::RelativeIndexNotOne(rel));
    }
    if set.points[p].index == 1 {
        let lines = descending_lines(f, set, p, tol)?
            .into_iter()
            .filter(|l| l.to == q)
            .collect();
        return Ok(summarize(p, q, cluster(lines, tol)?));
    }
    if set.points[p].index != 2 || f.manifold().dim() != 2 {
        return Err(Error::DimensionUnsupported(
            "dense scan needs a surface and a source of index two".into(),
        ));
    }
    let m = f.manifold();
    let center = *set.points[p].position.raw();
    let target = *set.points[q].position.raw();
    let basis = m.tangent_basis(&center);
    let shot = |psi: f64| -> Result<(Trajectory, f64)> {
        let dir = basis[0] * psi.cos() + basis[1] * psi.sin();
        let tr = shoot_one(f, set, p, &dir, Direction::Forward, tol)?;
        let closest = tr
            .samples
            .iter()
            .map(|s| m.distance(s.x.raw(), &target))
            .fold(f64::INFINITY, f64::min);
        Ok((tr, closest))
    };
    let hits_q = |tr: &Trajectory| tr.captured().element == ElementId::Point(q);
    let step = std::f64::consts::TAU / density as f64;
    let scan: Vec<(Trajectory, f64)> = (0..density)
        .into_par_iter()
        .map(|k| shot(k as f64 * step))
        .collect::<Result<_>>()?;
    let mut found = Vec::new();
    for k in 0..density {
        let (tr, d) = &scan[k];
        if hits_q(tr) {
            found.push(tr.clone());
            continue;
        }
        let prev = scan[(k + density - 1) % density].1;
        let next = scan[(k + 1) % density].1;
        if !(*d <= prev && *d <= next && *d < 0.25) {
            continue;
        }
        // Golden-section search on the closest-approach distance.
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let mut c = b - g * (b - a);
        let mut dd = a + g * (b - a);
        let (mut fc, mut fd) = (shot(c)?, shot(dd)?);
        for _ in 0..100 {
            if hits_q(&fc.0) {
                found.push(fc.0.clone());
                break;
            }
            if hits_q(&fd.0) {
                found.push(fd.0.clone());
                break;
            }
            if fc.1 < fd.1 {
                b = dd;
                dd = c;
                fd = fc;
                c = b - g * (b - a);
                fc = shot(c)?;
            } else {
                a = c;
                c = dd;
                fc = fd;
                dd = a + g * (b - a);
                fd = shot(dd)?;
            }
        }
    }
    let lines = found
        .into_iter()
        .map(|tr| {
            Ok(FlowLine {
                from: p,
                to: q,
                sign: arrival_sign(f, set, q, &tr)?,
                trajectory: tr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(p, q, cluster(lines, tol)?))
}

/// Collapses lines whose images are within `line_sep_tol` of each other.
fn cluster(lines: Vec<FlowLine>, tol: &Tolerances) -> Result<Vec<FlowLine>> {
    let mut kept: Vec<FlowLine> = Vec::new();
    let mut images = Vec::new();
    for l in lines {
        let img = l.trajectory.image(IMAGE_SPACING);
        let mut dup = false;
        for other in &images {
            if hausdorff_distance(&img, other)? < tol.line_sep_tol {
                dup = true;
                break;
            }
        }
        if !dup {
            images.push(img);
            kept.push(l);
        }
    }
    Ok(kept)
}

fn summarize(from: usize, to: usize, lines: Vec<FlowLine>) -> ConnectionCount {
    ConnectionCount {
        from,
        to,
        unsigned: lines.len(),
        signed: lines.iter().map(|l| l.sign).sum(),
        mod2: (lines.len() % 2) as u8,
        lines,
    }
}

/// Signed and unsigned count of flow lines from `p` to `q` (point ids of a
/// Morse critical set). Requires `λ_p − λ_q = 1`.
pub fn count_connections(
    f: &dyn SmoothFunction,
    set: &CriticalSet,
    p: usize,
    q: usize,
    tol: &Tolerances,
) -> Result<ConnectionCount> {
    require_morse(set)?;
    let rel = set.points[p].index as i64 - set.points[q].index as i64;
    if rel != 1 {
        return Err(Error::RelativeIndexNotOne(rel));
    }
    let m = f.manifold();
    let lines = if set.points[p].index == 1 {
        descending_lines(f, set, p, tol)?
    } else if set.points[q].index + 1 == m.dim() {
        ascending_lines(f, set, q, tol)?
    } else {
        return Err(Error::DimensionUnsupported(format!(
            "index pair ({}, {}) on a {}-manifold",
            set.points[p].index,
            set.points[q].index,
            m.dim()
        )));
    };
    let lines = lines.into_iter().filter(|l| l.from == p && l.to == q).collect();
    Ok(summarize(p, q, cluster(lines, tol)?))
}

/// Counts for every pair of relative index one, keyed `(from, to)`. Pairs
/// without flow lines are present with zero counts.
pub fn all_connections(
    f: &dyn SmoothFunction,
    set: &CriticalSet,
    tol: &Tolerances,
) -> Result<BTreeMap<(usize, usize), ConnectionCount>> {
    require_morse(set)?;
    let m = f.manifold();
    let jobs: Vec<(usize, bool)> = set
        .points
        .iter()
        .filter(|c| c.index == 1)
        .flat_map(|c| {
            // Index one is also `dim − 1` on a surface.
            let up = (m.dim() == 2).then_some((c.id, false));
            std::iter::once((c.id, true)).chain(up)
        })
        .collect();
    let batches: Vec<Vec<FlowLine>> = jobs
        .par_iter()
        .map(|&(id, down)| {
            if down {
                descending_lines(f, set, id, tol)
            } else {
                ascending_lines(f, set, id, tol)
            }
        })
        .collect::<Result<_>>()?;
    let mut grouped: BTreeMap<(usize, usize), Vec<FlowLine>> = BTreeMap::new();
    for p in &set.points {
        for q in &set.points {
            if p.index == q.index + 1 {
                grouped.insert((p.id, q.id), Vec::new());
            }
        }
    }
    for line in batches.into_iter().flatten() {
        if let Some(slot) = grouped.get_mut(&(line.from, line.to)) {
            slot.push(line);
        }
    }
    grouped
        .into_iter()
        .map(|((a, b), lines)| Ok(((a, b), summarize(a, b, cluster(lines, tol)?))))
        .collect()
}
