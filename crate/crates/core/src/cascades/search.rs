use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow_engine::{
    detect_critical_set, hausdorff_distance, hausdorff_within, integrate, principal_direction, CompactSubsetImage,
    CriticalSet, DetectOptions, Direction, ElementId, Limit, Tolerances, Trajectory, IMAGE_SPACING,
};
use crate::landscape::{wrap_angle, wrap_signed, CircleChart, Landscape, Point};
use crate::perturbation::{predicted_critical_points, Auxiliary, ExpectedCritical};

/// A landing on a circle-maximum target counts when the angle is this close.
const ANGLE_HIT: f64 = 1e-6;
/// Brackets for the landing angle must stay away from the antipodal jump.
const ANGLE_BRACKET: f64 = PI / 2.0;
/// Relative slack when comparing closest approaches of neighboring samples,
/// so that a minimum midway between two samples is bracketed from both.
const APPROACH_TIE: f64 = 1e-9;
/// Angular step of the polylines drawn along critical circles.
const ARC_STEP: f64 = 1e-2;
/// Number of positive flow times in the relaunch grid.
const TIME_GRID: usize = 24;
/// Coarsest scan resolution and number of doublings tried by
/// [`find_cascades`].
const START_DENSITY: usize = 16;
const MAX_DOUBLINGS: usize = 4;

/// A Morse–Bott function with one auxiliary per critical circle. The
/// generators of the cascade complex are the auxiliary critical points.
#[derive(Clone, Debug)]
pub struct CascadeSetup {
    pub landscape: Landscape,
    pub set: CriticalSet,
    pub auxiliaries: Vec<Auxiliary>,
    pub generators: Vec<ExpectedCritical>,
    pub tol: Tolerances,
}

impl CascadeSetup {
    /// Detects the critical set of `landscape` and lists the generators.
    pub fn new(
        landscape: &Landscape,
        auxiliaries: &[Auxiliary],
        tol: &Tolerances,
        opts: &DetectOptions,
    ) -> Result<Self> {
        let set = detect_critical_set(landscape, tol, opts)?;
        Self::from_set(landscape, set, auxiliaries, tol)
    }

    pub fn from_set(
        landscape: &Landscape,
        set: CriticalSet,
        auxiliaries: &[Auxiliary],
        tol: &Tolerances,
    ) -> Result<Self> {
        if landscape.manifold.dim() > 2 {
            return Err(Error::DimensionUnsupported(
                "cascades are implemented on curves and surfaces".into(),
            ));
        }
        let generators = predicted_critical_points(&set, auxiliaries)?;
        Ok(Self {
            landscape: landscape.clone(),
            set,
            auxiliaries: auxiliaries.to_vec(),
            generators,
            tol: *tol,
        })
    }

    /// `λ_q = λ_j + λ_q^j`.
    pub fn total_index(&self, q: usize) -> usize {
        total_index(&self.generators[q])
    }

    /// Generator ids grouped by total index.
    pub fn generators_by_index(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.landscape.manifold.dim() + 1];
        for (i, g) in self.generators.iter().enumerate() {
            out[g.total_index()].push(i);
        }
        out
    }

    /// Pairs `(q, p)` with `λ_q − λ_p = 1`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.generators.len();
        let mut out = Vec::new();
        for q in 0..n {
            for p in 0..n {
                if self.total_index(q) == self.total_index(p) + 1 {
                    out.push((q, p));
                }
            }
        }
        out
    }

    fn chart(&self, circle: usize) -> CircleChart {
        self.set.circles[circle].chart
    }

    /// Along-circle coordinate of a generator on a circle.
    fn u_of(&self, g: usize) -> Option<(usize, f64)> {
        let e = &self.generators[g];
        e.circle().map(|c| (c, self.chart(c).u(e.position.raw())))
    }

    /// The other critical point of the auxiliary on the same circle.
    fn partner_u(&self, circle: usize, aux_index: usize) -> f64 {
        let [(u_min, _), (u_max, _)] = self.auxiliaries[circle].critical_points();
        if aux_index == 1 {
            u_min
        } else {
            u_max
        }
    }
}

/// `λ_q = λ_j + λ_q^j` for an auxiliary critical point.
pub fn total_index(q: &ExpectedCritical) -> usize {
    q.total_index()
}

/// One non-constant flow line `x_k` of `f`, stored unparameterized: its
/// samples are indexed by the value of `f`, which strictly decreases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadePiece {
    pub levels: Vec<f64>,
    pub points: Vec<Point>,
}

impl CascadePiece {
    fn from_trajectory(tr: &Trajectory) -> Self {
        Self {
            levels: tr.samples.iter().map(|s| s.f).collect(),
            points: tr.samples.iter().map(|s| s.x).collect(),
        }
    }
}

/// A flow line with `n` cascades from `q` to `p`: `n` flow lines of `f`
/// joined by `n − 1` finite-time flows of the auxiliaries on the critical
/// circles they land on. For `n = 0` it is a single auxiliary flow line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cascade {
    pub from: usize,
    pub to: usize,
    pub n: usize,
    pub x: Vec<CascadePiece>,
    /// Auxiliary flow times between consecutive pieces.
    pub t: Vec<f64>,
    /// Critical submanifolds where the pieces are joined.
    pub intermediate: Vec<ElementId>,
    /// Parameter of the launch family that produced the cascade.
    pub launch_parameter: Option<f64>,
    /// Transported from the matched flow line of the perturbed function.
    pub sign: Option<i64>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
    /// Auxiliary flow segments on critical circles, in order along the
    /// cascade.
    #[serde(skip)]
    pub arcs: Vec<Vec<Vector3<f64>>>,
    #[serde(skip)]
    pub image: CompactSubsetImage,
}

impl Cascade {
    /// `f` is nonincreasing along the whole tuple and strictly decreasing
    /// along each piece.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let pieces_ok = self
            .x
            .iter()
            .all(|p| p.levels.windows(2).all(|w| w[1] <= w[0] + slack) && p.levels[0] > p.levels[p.levels.len() - 1]);
        let joints_ok = self
            .x
            .windows(2)
            .all(|w| w[1].levels[0] <= w[0].levels[w[0].levels.len() - 1] + slack);
        pieces_ok && joints_ok
    }

    /// Whether [`Cascade::distance`] is below `tol`, without computing it.
    pub fn is_near(&self, other: &Cascade, tol: f64) -> Result<bool> {
        if self.n != other.n {
            return Ok(false);
        }
        let squash = |t: f64| if t.is_finite() { t / (1.0 + t) } else { 1.0 };
        if self
            .t
            .iter()
            .zip(&other.t)
            .any(|(a, b)| (squash(*a) - squash(*b)).abs() >= tol)
        {
            return Ok(false);
        }
        hausdorff_within(&self.image, &other.image, tol)
    }

    /// Hausdorff distance on (image, t-vector) pairs, with times compared
    /// through `t / (1 + t)` so that `t = ∞` is a finite point.
    pub fn distance(&self, other: &Cascade) -> Result<f64> {
        if self.n != other.n {
            return Ok(f64::INFINITY);
        }
        let squash = |t: f64| if t.is_finite() { t / (1.0 + t) } else { 1.0 };
        let dt = self
            .t
            .iter()
            .zip(&other.t)
            .map(|(a, b)| (squash(*a) - squash(*b)).abs())
            .fold(0.0, f64::max);
        Ok(hausdorff_distance(&self.image, &other.image)?.max(dt))
    }
}

/// The distinct cascades from `q` to `p` found at a scan resolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeModuli {
    pub from: usize,
    pub to: usize,
    pub density: usize,
    pub cascades: Vec<Cascade>,
}

impl CascadeModuli {
    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    /// Sum of the transported signs, when every cascade carries one.
    pub fn signed_count(&self) -> Option<i64> {
        self.cascades.iter().map(|c| c.sign).sum()
    }
}

/// Finds the cascades from `q` to `p` with at most `n_max` pieces, doubling
/// the scan resolution until two consecutive counts agree. A count that
/// keeps changing is [`Error::BudgetExceeded`]; this is the expected
/// outcome for pairs whose moduli space has positive dimension.
pub fn find_cascades(setup: &CascadeSetup, q: usize, p: usize, n_max: usize) -> Result<CascadeModuli> {
    let mut density = START_DENSITY;
    let mut previous = scan_cascades(setup, q, p, n_max, density)?;
    for _ in 0..MAX_DOUBLINGS {
        density *= 2;
        let next = scan_cascades(setup, q, p, n_max, density)?;
        if next.len() == previous.len() {
            return Ok(next);
        }
        previous = next;
    }
    Err(Error::BudgetExceeded(format!(
        "cascade count from {q} to {p} still changing at scan density {density}"
    )))
}

/// Cascades from `q` to `p` with at most `n_max` pieces at one scan
/// resolution, clustered by [`Cascade::distance`].
pub fn scan_cascades(setup: &CascadeSetup, q: usize, p: usize, n_max: usize, density: usize) -> Result<CascadeModuli> {
    let n_gen = setup.generators.len();
    if q >= n_gen || p >= n_gen {
        return Err(Error::NotFound {
            kind: "generator",
            name: format!("{}", q.max(p)),
        });
    }
    if density == 0 {
        return Err(Error::Config("scan density must be positive".into()));
    }
    let mut found = Vec::new();
    if setup.total_index(q) > setup.total_index(p) {
        found.extend(zero_cascades(setup, q, p));
        for n in 1..=n_max {
            for family in launch_families(setup, q)? {
                found.extend(Scanner { setup, q, p, n, family }.run(density)?);
            }
        }
    }
    let mut kept: Vec<Cascade> = Vec::new();
    for c in found {
        let mut dup = false;
        for k in &kept {
            if c.is_near(k, setup.tol.line_sep_tol)? {
                dup = true;
                break;
            }
        }
        if !dup {
            kept.push(c);
        }
    }
    Ok(CascadeModuli {
        from: q,
        to: p,
        density,
        cascades: kept,
    })
}

/// Closed-form flow of `−∇a` for `a = δ(1 + cos(u − phase))` on a circle of
/// radius `rho`: `tan(v/2)` grows like `exp(δ t / rho²)` with `v = u − phase`.
pub fn auxiliary_flow(aux: &Auxiliary, rho: f64, u0: f64, t: f64) -> f64 {
    let v0 = wrap_signed(u0 - aux.phase);
    if v0 == 0.0 || v0.abs() == PI {
        return wrap_angle(u0);
    }
    let v = 2.0 * ((v0 / 2.0).tan() * (aux.scale * t / (rho * rho)).exp()).atan();
    wrap_angle(aux.phase + v)
}

/// Time after which the auxiliary flow from `u0` is within `radius` of the
/// minimum.
fn saturation_time(aux: &Auxiliary, rho: f64, u0: f64, radius: f64) -> f64 {
    let v0 = wrap_signed(u0 - aux.phase).abs().max(1e-12);
    let target = ((PI - radius / rho) / 2.0).tan();
    ((target / (v0 / 2.0).tan()).ln() * rho * rho / aux.scale).max(0.0)
}

/// `{0}` together with log-spaced times up to saturation.
fn time_grid(aux: &Auxiliary, rho: f64, u0: f64, radius: f64) -> Vec<f64> {
    let t_sat = saturation_time(aux, rho, u0, radius);
    let mut out = vec![0.0];
    if t_sat > 0.0 {
        let lo = (t_sat * 1e-3).ln();
        let hi = t_sat.ln();
        for k in 0..TIME_GRID {
            out.push((lo + (hi - lo) * k as f64 / (TIME_GRID - 1) as f64).exp());
        }
    }
    out
}

/// Vertices of the arc of `chart` from `u_a` to `u_b` turning in direction
/// `dir`.
fn arc(chart: &CircleChart, u_a: f64, u_b: f64, dir: f64) -> Vec<Vector3<f64>> {
    let span = if dir > 0.0 {
        wrap_angle(u_b - u_a)
    } else {
        -wrap_angle(u_a - u_b)
    };
    let steps = (span.abs() / ARC_STEP).ceil().max(1.0) as usize;
    (0..=steps)
        .map(|k| chart.point(u_a + span * k as f64 / steps as f64))
        .collect()
}

/// The arc from `u_a` to `u_b` that avoids `u_avoid`.
fn arc_avoiding(chart: &CircleChart, u_a: f64, u_b: f64, u_avoid: f64) -> Vec<Vector3<f64>> {
    let dir = if wrap_angle(u_avoid - u_a) > wrap_angle(u_b - u_a) {
        1.0
    } else {
        -1.0
    };
    arc(chart, u_a, u_b, dir)
}

/// Cascades without pieces: the two half circles from the maximum to the
/// minimum of the auxiliary on one circle, checked against the closed-form
/// auxiliary flow.
fn zero_cascades(setup: &CascadeSetup, q: usize, p: usize) -> Vec<Cascade> {
    let (Some((cq, uq)), Some((cp, up))) = (setup.u_of(q), setup.u_of(p)) else {
        return Vec::new();
    };
    let (gq, gp) = (&setup.generators[q], &setup.generators[p]);
    if cq != cp || gq.auxiliary_index != 1 || gp.auxiliary_index != 0 {
        return Vec::new();
    }
    let chart = setup.chart(cq);
    let aux = &setup.auxiliaries[cq];
    let rho = chart.radius();
    let m = setup.landscape.manifold;
    let mut out = Vec::new();
    for dir in [1.0, -1.0] {
        let u0 = uq + dir * setup.tol.shooting_radius / rho;
        let t = saturation_time(aux, rho, u0, setup.tol.capture_radius);
        let u_end = auxiliary_flow(aux, rho, u0, t);
        if wrap_signed(u_end - up).abs() * rho > 2.0 * setup.tol.capture_radius {
            continue;
        }
        let verts = arc(&chart, uq, up, dir);
        let image = CompactSubsetImage::from_polyline(m, &verts, IMAGE_SPACING);
        out.push(Cascade {
            from: q,
            to: p,
            n: 0,
            x: Vec::new(),
            t: Vec::new(),
            intermediate: Vec::new(),
            launch_parameter: Some(dir),
            sign: None,
            trajectories: Vec::new(),
            arcs: vec![verts],
            image,
        });
    }
    out
}

/// A family of launches from `q` into the flow of `f`: either a single
/// launch, or a loop parameterized by an angle.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Family {
    /// Launch from `q` itself on the given normal side.
    Fixed { side: f64 },
    /// Launch from every point of the unstable manifold of the auxiliary
    /// maximum (the circle minus the minimum), on the given side.
    CircleLoop { side: f64 },
    /// Launch in every direction of the unstable plane of a point of
    /// index two.
    PointLoop,
}

fn launch_families(setup: &CascadeSetup, q: usize) -> Result<Vec<Family>> {
    let g = &setup.generators[q];
    let sides = [Family::Fixed { side: 1.0 }, Family::Fixed { side: -1.0 }];
    Ok(match (g.element, g.bott_index) {
        (_, 0) => Vec::new(),
        (ElementId::Circle(_), 1) if g.auxiliary_index == 1 => {
            vec![Family::CircleLoop { side: 1.0 }, Family::CircleLoop { side: -1.0 }]
        }
        (_, 1) => sides.to_vec(),
        (ElementId::Point(_), 2) => vec![Family::PointLoop],
        (_, k) => {
            return Err(Error::DimensionUnsupported(format!(
                "launching from a critical submanifold of Bott index {k}"
            )))
        }
    })
}

/// How the last piece meets the stable manifold of `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Outcome {
    Miss,
    /// Lands in the stable manifold.
    Hit,
    /// Lands on the circle of a maximum target at this signed angle from it.
    Angle(f64),
    /// Passes a saddle target at this closest distance.
    Approach(f64),
}

/// A followed launch up to its last piece.
#[derive(Clone, Debug)]
struct Branch {
    /// Relaunch choices `(time index, side)` at each intermediate landing.
    key: Vec<(usize, i8)>,
    outcome: Outcome,
    pieces: Vec<Trajectory>,
    times: Vec<f64>,
    via: Vec<ElementId>,
    arcs: Vec<Vec<Vector3<f64>>>,
}

struct Scanner<'a> {
    setup: &'a CascadeSetup,
    q: usize,
    p: usize,
    n: usize,
    family: Family,
}

impl Scanner<'_> {
    fn f(&self) -> &Landscape {
        &self.setup.landscape
    }

    /// Start of the loop parameter range; for a circle loop this is the
    /// auxiliary minimum, which the range excludes.
    fn loop_base(&self) -> f64 {
        match self.family {
            Family::CircleLoop { .. } => {
                let (c, _) = self.setup.u_of(self.q).expect("circle loops start on circles");
                self.setup.partner_u(c, 1)
            }
            _ => 0.0,
        }
    }

    /// `(origin element, origin, start, arc from q to the origin)`.
    fn launch(&self, s: f64) -> Result<(ElementId, Vector3<f64>, Vector3<f64>, Option<Vec<Vector3<f64>>>)> {
        let setup = self.setup;
        let m = setup.landscape.manifold;
        let r = setup.tol.shooting_radius;
        let g = &setup.generators[self.q];
        let x = *g.position.raw();
        match (self.family, g.element) {
            (Family::Fixed { side }, ElementId::Circle(c)) => {
                let chart = setup.chart(c);
                Ok((g.element, x, m.exp(&x, &(chart.normal(&x) * (side * r))), None))
            }
            (Family::Fixed { side }, ElementId::Point(_)) => {
                let e = principal_direction(self.f(), &x, true).ok_or_else(|| Error::DegenerateCritical {
                    position: g.position.coords().to_vec(),
                    detail: "no unique unstable direction".into(),
                })?;
                Ok((g.element, x, m.exp(&x, &(e * (side * r))), None))
            }
            (Family::CircleLoop { side }, ElementId::Circle(c)) => {
                let chart = setup.chart(c);
                let y0 = chart.point(s);
                let (_, uq) = setup.u_of(self.q).expect("circle generator");
                let path = arc_avoiding(&chart, uq, s, self.loop_base());
                Ok((g.element, y0, m.exp(&y0, &(chart.normal(&y0) * (side * r))), Some(path)))
            }
            (Family::PointLoop, ElementId::Point(_)) => {
                let b = m.tangent_basis(&x);
                let dir = b[0] * s.cos() + b[1] * s.sin();
                Ok((g.element, x, m.exp(&x, &(dir * r)), None))
            }
            _ => unreachable!("families are built to match their generator"),
        }
    }

    /// Follows every branch of the launch at parameter `s`.
    fn evaluate(&self, s: f64) -> Result<Vec<Branch>> {
        let (el, origin, start, path) = self.launch(s)?;
        let root = Branch {
            key: Vec::new(),
            outcome: Outcome::Miss,
            pieces: Vec::new(),
            times: Vec::new(),
            via: Vec::new(),
            arcs: path.into_iter().collect(),
        };
        let mut out = Vec::new();
        self.follow(el, origin, start, self.n, root, &mut out)?;
        Ok(out)
    }

    fn follow(
        &self,
        origin_el: ElementId,
        origin: Vector3<f64>,
        start: Vector3<f64>,
        remaining: usize,
        mut branch: Branch,
        out: &mut Vec<Branch>,
    ) -> Result<()> {
        let setup = self.setup;
        let set = &setup.set;
        let m = setup.landscape.manifold;
        let tol = &setup.tol;
        let mut tr = integrate(self.f(), &start, Direction::Forward, set, tol)?;
        tr.alpha_limit = Some(Limit::of(set, origin_el, &origin));
        tr.close_ends();
        let landing = *tr.captured();
        let y = *landing.position.raw();
        branch.pieces.push(tr);
        if remaining == 1 {
            branch.outcome = self.final_condition(landing.element, &y, branch.pieces.last().expect("just pushed"));
            out.push(branch);
            return Ok(());
        }
        match landing.element {
            ElementId::Circle(k) if set.circles[k].bott_index == 1 => {
                let chart = setup.chart(k);
                let aux = &setup.auxiliaries[k];
                let rho = chart.radius();
                let u_y = chart.u(&y);
                for (ti, t) in time_grid(aux, rho, u_y, tol.capture_radius).into_iter().enumerate() {
                    let u_next = auxiliary_flow(aux, rho, u_y, t);
                    let y_next = chart.point(u_next);
                    let dir = if wrap_signed(u_next - u_y) >= 0.0 { 1.0 } else { -1.0 };
                    for side in [1i8, -1] {
                        let mut b = branch.clone();
                        b.key.push((ti, side));
                        b.times.push(t);
                        b.via.push(landing.element);
                        b.arcs.push(arc(&chart, u_y, u_next, dir));
                        let start = m.exp(&y_next, &(chart.normal(&y_next) * (side as f64 * tol.shooting_radius)));
                        self.follow(landing.element, y_next, start, remaining - 1, b, out)?;
                    }
                }
            }
            ElementId::Point(k) if set.points[k].index == 1 => {
                if let Some(e) = principal_direction(self.f(), &y, true) {
                    for side in [1i8, -1] {
                        let mut b = branch.clone();
                        b.key.push((0, side));
                        b.times.push(0.0);
                        b.via.push(landing.element);
                        let start = m.exp(&y, &(e * (side as f64 * tol.shooting_radius)));
                        self.follow(landing.element, y, start, remaining - 1, b, out)?;
                    }
                }
            }
            // No unstable normal direction: a dead end.
            _ => out.push(branch),
        }
        Ok(())
    }

    fn final_condition(&self, element: ElementId, y: &Vector3<f64>, last: &Trajectory) -> Outcome {
        let setup = self.setup;
        let target = &setup.generators[self.p];
        match target.element {
            ElementId::Circle(c) => {
                if element != ElementId::Circle(c) {
                    return Outcome::Miss;
                }
                let chart = setup.chart(c);
                let (_, u_p) = setup.u_of(self.p).expect("circle generator");
                if target.auxiliary_index == 1 {
                    Outcome::Angle(wrap_signed(chart.u(y) - u_p))
                } else if wrap_signed(chart.u(y) - setup.partner_u(c, 0)).abs() < 1e-9 {
                    Outcome::Miss
                } else {
                    Outcome::Hit
                }
            }
            ElementId::Point(i) => {
                if element == ElementId::Point(i) {
                    return Outcome::Hit;
                }
                if setup.set.points[i].index == 0 {
                    return Outcome::Miss;
                }
                let m = setup.landscape.manifold;
                let x = target.position.raw();
                let d = last
                    .samples
                    .iter()
                    .map(|s| m.distance(s.x.raw(), x))
                    .fold(f64::INFINITY, f64::min);
                Outcome::Approach(d)
            }
        }
    }

    fn pick(&self, s: f64, key: &[(usize, i8)]) -> Result<Option<Branch>> {
        Ok(self.evaluate(s)?.into_iter().find(|b| b.key == key))
    }

    fn run(&self, density: usize) -> Result<Vec<Cascade>> {
        let mut out = Vec::new();
        if let Family::Fixed { .. } = self.family {
            for b in self.evaluate(0.0)? {
                let accept = match b.outcome {
                    Outcome::Hit => true,
                    Outcome::Angle(g) => g.abs() < ANGLE_HIT,
                    _ => false,
                };
                if accept {
                    out.push(self.finish(b, None));
                }
            }
            return Ok(out);
        }
        let base = self.loop_base();
        let step = TAU / density as f64;
        let params: Vec<f64> = (0..density).map(|k| base + step * (k as f64 + 0.5)).collect();
        let scan: Vec<Vec<Branch>> = params.par_iter().map(|&s| self.evaluate(s)).collect::<Result<_>>()?;
        // Outcomes per relaunch key, in parameter order.
        let mut by_key: BTreeMap<Vec<(usize, i8)>, Vec<Option<Outcome>>> = BTreeMap::new();
        for (k, branches) in scan.iter().enumerate() {
            for b in branches {
                by_key.entry(b.key.clone()).or_insert_with(|| vec![None; density])[k] = Some(b.outcome);
            }
        }
        let cyclic = self.family == Family::PointLoop;
        for (k, branches) in scan.into_iter().enumerate() {
            for b in branches {
                if b.outcome == Outcome::Hit {
                    out.push(self.finish(b, Some(wrap_angle(params[k]))));
                }
            }
        }
        for (key, outcomes) in &by_key {
            for k in 0..density {
                let next = if k + 1 < density {
                    k + 1
                } else if cyclic {
                    0
                } else {
                    continue;
                };
                let s_next = if next == 0 { params[0] + TAU } else { params[next] };
                if let (Some(Outcome::Angle(ga)), Some(Outcome::Angle(gb))) = (outcomes[k], outcomes[next]) {
                    if ga * gb <= 0.0 && ga.abs() < ANGLE_BRACKET && gb.abs() < ANGLE_BRACKET && ga != 0.0 {
                        if let Some((s, b)) = self.bisect(key, params[k], s_next, ga)? {
                            out.push(self.finish(b, Some(wrap_angle(s))));
                        }
                    }
                }
                if let Some(Outcome::Approach(d)) = outcomes[k] {
                    let prev = if k > 0 {
                        Some(k - 1)
                    } else if cyclic {
                        Some(density - 1)
                    } else {
                        None
                    };
                    let around = |j: Option<usize>| match j.and_then(|j| outcomes[j]) {
                        Some(Outcome::Approach(e)) => e,
                        Some(Outcome::Hit) => 0.0,
                        _ => f64::INFINITY,
                    };
                    let after = if k + 1 < density || cyclic {
                        Some((k + 1) % density)
                    } else {
                        None
                    };
                    // Every local minimum is refined: near a weak unstable
                    // direction the approach is steep in the launch angle and
                    // the grid minimum can be far from the target.
                    let slack = APPROACH_TIE * d.max(1.0);
                    if d <= around(prev) + slack && d <= around(after) + slack {
                        if let Some((s, b)) = self.golden(key, params[k] - step, params[k] + step)? {
                            out.push(self.finish(b, Some(wrap_angle(s))));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Bisection on the landing angle between a sign change.
    fn bisect(&self, key: &[(usize, i8)], mut a: f64, mut b: f64, ga: f64) -> Result<Option<(f64, Branch)>> {
        let mut best = None;
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            let Some(br) = self.pick(mid, key)? else {
                return Ok(None);
            };
            let Outcome::Angle(g) = br.outcome else {
                return Ok(None);
            };
            let done = g.abs() < 1e-11 || (b - a).abs() < 1e-13;
            if g * ga > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            best = Some((mid, br, g));
            if done {
                break;
            }
        }
        Ok(best.filter(|(_, _, g)| g.abs() < ANGLE_HIT).map(|(s, b, _)| (s, b)))
    }

    /// Golden-section search on the closest approach to a saddle target
    /// until the flow is captured there.
    fn golden(&self, key: &[(usize, i8)], mut a: f64, mut b: f64) -> Result<Option<(f64, Branch)>> {
        let eval = |s: f64| -> Result<(f64, Option<Branch>)> {
            match self.pick(s, key)? {
                Some(br) => match br.outcome {
                    Outcome::Hit => Ok((0.0, Some(br))),
                    Outcome::Approach(d) => Ok((d, None)),
                    _ => Ok((f64::INFINITY, None)),
                },
                None => Ok((f64::INFINITY, None)),
            }
        };
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (eval(c)?, eval(d)?);
        for _ in 0..100 {
            if let Some(br) = fc.1.take() {
                return Ok(Some((c, br)));
            }
            if let Some(br) = fd.1.take() {
                return Ok(Some((d, br)));
            }
            if fc.0 < fd.0 {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = eval(d)?;
            }
        }
        Ok(None)
    }

    /// Assembles the cascade from an accepted branch: adds the auxiliary
    /// arc from the landing point to `p` and builds the image.
    fn finish(&self, mut b: Branch, launch_parameter: Option<f64>) -> Cascade {
        let setup = self.setup;
        let m = setup.landscape.manifold;
        if let Some((c, u_p)) = setup.u_of(self.p) {
            let chart = setup.chart(c);
            let last = b.pieces.last().expect("cascades have pieces");
            let u_y = chart.u(last.captured().position.raw());
            let avoid = setup.partner_u(c, setup.generators[self.p].auxiliary_index);
            b.arcs.push(arc_avoiding(&chart, u_y, u_p, avoid));
        }
        let image = CompactSubsetImage::union(
            m,
            b.pieces.iter().map(|t| t.image(IMAGE_SPACING)).chain(
                b.arcs
                    .iter()
                    .map(|a| CompactSubsetImage::from_polyline(m, a, IMAGE_SPACING)),
            ),
        );
        Cascade {
            from: self.q,
            to: self.p,
            n: self.n,
            x: b.pieces.iter().map(CascadePiece::from_trajectory).collect(),
            t: b.times,
            intermediate: b.via,
            launch_parameter,
            sign: None,
            trajectories: b.pieces,
            arcs: b.arcs,
            image,
        }
    }
}

/// Cluster sizes of the scan at each density, for the dimension check: a
/// zero-dimensional moduli space gives a constant sequence, a
/// one-dimensional one grows with the density.
pub fn family_growth(
    setup: &CascadeSetup,
    q: usize,
    p: usize,
    n_max: usize,
    densities: &[usize],
) -> Result<Vec<usize>> {
    densities
        .iter()
        .map(|&d| scan_cascades(setup, q, p, n_max, d).map(|m| m.len()))
        .collect()
}
