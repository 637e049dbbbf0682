use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use super::algebra::{assemble, AssembledComplex, Multicomplex};
use super::symbolic::MulticomplexDoc;
use crate::chains_cubical::{cubical_homology, CubicalComplex, ElementaryCube, Interval};
use crate::error::{Error, Result};
use crate::exact_algebra::{betti_numbers, homology, Coefficients, HomologyResult, IntegerMatrix};
use crate::flow_engine::{
    dense_scan_connections, detect_critical_set, integrate, principal_direction, CriticalSet, DetectOptions, Direction,
    ElementId, Limit, Tolerances,
};
use crate::landscape::{catalog, constant_on, wrap_signed, Landscape, LandscapeKind, Manifold};
use crate::msw_complex::build_msw;

/// Directions sampled around an index-two point for the flow family.
pub const FAMILY_STEPS: usize = 128;
/// Base points sampled per cubical edge of a critical circle.
pub const EDGE_STEPS: usize = 16;
/// Scan density for connections out of index-two points.
pub const SCAN_DENSITY: usize = 32;
/// Largest landing-angle jump accepted between neighboring samples before
/// the family is subdivided.
const MAX_JUMP: f64 = FRAC_PI_4;
/// Subdivision depth for the flow family.
const REFINE_DEPTH: usize = 12;

/// Where the chain groups of the multicomplex come from.
#[derive(Clone, Copy, Debug)]
pub enum BuildMode<'a> {
    /// Cubical models of the detected critical set and numerically computed
    /// boundary maps.
    Numeric,
    /// User-supplied groups and maps.
    Symbolic(&'a MulticomplexDoc),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentShape {
    Point,
    Circle,
    /// The whole manifold, for a constant function.
    Manifold {
        manifold: Manifold,
    },
}

/// One connected component of `B_i` and its cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelComponent {
    pub element: Option<ElementId>,
    pub shape: ComponentShape,
    /// Indices in `X_{i,q}` of the cells of this component, per `q`.
    pub cells: Vec<Vec<usize>>,
}

/// Cubical model of the critical submanifolds of one Bott index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BottModel {
    pub bott_index: usize,
    pub components: Vec<ModelComponent>,
    pub cell_counts: Vec<usize>,
    #[serde(skip)]
    pub complex: CubicalComplex,
}

/// One flow line out of a vertex and where its endpoint was placed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointTerm {
    pub source: ElementId,
    /// Vertex in `X_{i,0}`.
    pub source_cell: usize,
    pub sign: i64,
    pub target: ElementId,
    /// Vertex in `X_{i−1,0}`; `None` if the line drops more than one index.
    pub target_cell: Option<usize>,
}

/// Degree of the endpoint map of a one-parameter flow family onto a
/// critical circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingDegree {
    pub source: ElementId,
    /// Vertex of an index-two point, or `None` for the fundamental cycle of a
    /// critical circle.
    pub source_cell: Option<usize>,
    /// Side of the normal direction for circle families.
    pub side: Option<i64>,
    pub target: ElementId,
    pub degree: i64,
}

/// Cubical models per Bott index together with the numerical data behind
/// each boundary map. Chains on `B_i` of cubical degree `p` sit in
/// Morse–Bott degree `p + i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseBottChainData {
    pub landscape: String,
    pub models: Vec<BottModel>,
    pub endpoint_terms: Vec<EndpointTerm>,
    pub windings: Vec<WindingDegree>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorseBottBuild {
    pub data: MorseBottChainData,
    /// `X_{i,p}` is the group of cubical `p`-chains on `B_i`.
    pub multicomplex: Multicomplex,
    pub assembled: AssembledComplex,
}

impl MorseBottBuild {
    /// Homology of the assembly, up to the last degree with generators (the
    /// rectangular rank table adds empty degrees above the manifold's).
    pub fn homology(&self, coefficients: Coefficients) -> Result<Vec<HomologyResult>> {
        let mut h = homology(&self.assembled.complex, coefficients)?;
        let top = self
            .assembled
            .complex
            .generators()
            .iter()
            .rposition(|&n| n > 0)
            .map_or(0, |k| k + 1);
        h.truncate(top);
        Ok(h)
    }

    pub fn document(&self) -> Option<MulticomplexDoc> {
        MulticomplexDoc::from_multicomplex(&self.multicomplex)
    }
}

/// Builds the Morse–Bott multicomplex of a landscape and verifies
/// `Σ_{q=0}^j ∂_q ∂_{j−q} = 0`.
///
/// Numeric mode models each critical circle by the boundary of the unit
/// square (vertices at `u = kπ/2`, oriented by increasing `u`) and each
/// critical point by a vertex. `∂_0` is `(−1)^k` times the cubical boundary
/// in Morse–Bott degree `k`. `∂_1` of a vertex is the signed sum of the
/// endpoints of the flow lines leaving it, rounded to the nearest vertex;
/// `∂_1` of an edge is the cubical path traced by the endpoints as the base
/// point moves along the edge. `∂_2` of an index-two point is its endpoint
/// cycle, with multiplicity the winding degree of the family of flow lines
/// leaving it. A constant function has the whole manifold as its only
/// critical set and the cubical model of the manifold as `B_0`.
pub fn build_morse_bott_multicomplex(
    landscape: &Landscape,
    mode: BuildMode<'_>,
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<MorseBottBuild> {
    let (data, multicomplex) = match mode {
        BuildMode::Symbolic(doc) => (
            MorseBottChainData {
                landscape: landscape.name.clone(),
                models: Vec::new(),
                endpoint_terms: Vec::new(),
                windings: Vec::new(),
            },
            doc.to_multicomplex()?,
        ),
        BuildMode::Numeric if landscape.kind == LandscapeKind::Constant => constant_build(landscape),
        BuildMode::Numeric => {
            let set = detect_critical_set(landscape, tol, opts)?;
            Builder::new(landscape, set, tol).run()?
        }
    };
    let assembled = assemble(&multicomplex)?;
    Ok(MorseBottBuild {
        data,
        multicomplex,
        assembled,
    })
}

/// Cubical model of a whole manifold.
pub fn manifold_model(m: Manifold) -> CubicalComplex {
    match m {
        Manifold::Circle => CubicalComplex::circle(),
        Manifold::Torus => CubicalComplex::torus(),
        Manifold::Sphere => CubicalComplex::sphere(),
    }
}

fn signed_boundary(k: &CubicalComplex, bott_index: usize, q: usize) -> IntegerMatrix {
    let d = k.boundary_matrix(q);
    if (bott_index + q) % 2 == 1 {
        d.neg()
    } else {
        d
    }
}

fn constant_build(landscape: &Landscape) -> (MorseBottChainData, Multicomplex) {
    let complex = manifold_model(landscape.manifold);
    let counts = complex.counts();
    let maps = (1..counts.len())
        .map(|q| ((0, 0, q), signed_boundary(&complex, 0, q)))
        .collect();
    let component = ModelComponent {
        element: None,
        shape: ComponentShape::Manifold {
            manifold: landscape.manifold,
        },
        cells: counts.iter().map(|&n| (0..n).collect()).collect(),
    };
    let data = MorseBottChainData {
        landscape: landscape.name.clone(),
        models: vec![BottModel {
            bott_index: 0,
            components: vec![component],
            cell_counts: counts.clone(),
            complex,
        }],
        endpoint_terms: Vec::new(),
        windings: Vec::new(),
    };
    let x = Multicomplex::new(vec![counts], maps).expect("boundary shapes match the model");
    (data, x)
}

/// Vertices of a circle model in cyclic order and the edge from vertex `k`
/// to vertex `k + 1` with the sign `ε` making `∂(ε e) = v_{k+1} − v_k`.
#[derive(Clone, Copy, Debug)]
struct CircleCells {
    vertices: [usize; 4],
    edges: [(usize, i64); 4],
}

impl CircleCells {
    /// Vertex nearest to the circle coordinate `u` (any real value).
    fn vertex_at(&self, u: f64) -> usize {
        self.vertices[quarter(u).rem_euclid(4) as usize]
    }

    /// Cubical path between the vertices nearest to the unwrapped
    /// coordinates `from` and `to`.
    fn path(&self, from: f64, to: f64) -> Vec<(usize, i64)> {
        let (a, b) = (quarter(from), quarter(to));
        let mut out = Vec::new();
        let mut k = a;
        while k != b {
            if b > a {
                let (e, s) = self.edges[k.rem_euclid(4) as usize];
                out.push((e, s));
                k += 1;
            } else {
                let (e, s) = self.edges[(k - 1).rem_euclid(4) as usize];
                out.push((e, -s));
                k -= 1;
            }
        }
        out
    }

    /// The fundamental cycle, oriented by increasing `u`.
    fn cycle(&self) -> Vec<(usize, i64)> {
        self.edges.to_vec()
    }
}

fn quarter(u: f64) -> i64 {
    (u / FRAC_PI_2).round() as i64
}

fn circle_cubes(c: i64) -> Vec<ElementaryCube> {
    let (u, p) = (Interval::unit, Interval::point);
    vec![
        ElementaryCube::new(vec![u(3 * c), p(0)]),
        ElementaryCube::new(vec![p(3 * c + 1), u(0)]),
        ElementaryCube::new(vec![u(3 * c), p(1)]),
        ElementaryCube::new(vec![p(3 * c), u(0)]),
    ]
}

fn circle_cells(k: &CubicalComplex, c: i64) -> CircleCells {
    let corners = [[3 * c, 0], [3 * c + 1, 0], [3 * c + 1, 1], [3 * c, 1]];
    let vertex = |i: usize| ElementaryCube::vertex(&corners[i]);
    let vertices = std::array::from_fn(|i| k.index_of(&vertex(i)).expect("vertex in model"));
    let cubes = circle_cubes(c);
    let edges = std::array::from_fn(|i| {
        let e = &cubes[i];
        let head = vertex((i + 1) % 4);
        let sign = e
            .boundary()
            .into_iter()
            .find(|(f, _)| *f == head)
            .expect("edge ends at the next vertex")
            .1;
        (k.index_of(e).expect("edge in model"), sign)
    });
    CircleCells { vertices, edges }
}

struct Builder<'a> {
    landscape: &'a Landscape,
    set: CriticalSet,
    tol: &'a Tolerances,
    models: Vec<BottModel>,
    circles: BTreeMap<ElementId, CircleCells>,
    maps: BTreeMap<(usize, usize, usize), IntegerMatrix>,
    endpoint_terms: Vec<EndpointTerm>,
    windings: Vec<WindingDegree>,
}

impl<'a> Builder<'a> {
    fn new(landscape: &'a Landscape, set: CriticalSet, tol: &'a Tolerances) -> Self {
        let dim = landscape.manifold.dim();
        let mut models = Vec::new();
        let mut circles = BTreeMap::new();
        for i in 0..=dim {
            let mut elements: Vec<ElementId> = set
                .circles
                .iter()
                .filter(|c| c.bott_index == i)
                .map(|c| ElementId::Circle(c.id))
                .collect();
            elements.extend(
                set.points
                    .iter()
                    .filter(|p| p.index == i)
                    .map(|p| ElementId::Point(p.id)),
            );
            let mut cubes = Vec::new();
            for (c, e) in elements.iter().enumerate() {
                match e {
                    ElementId::Circle(_) => cubes.extend(circle_cubes(c as i64)),
                    ElementId::Point(_) => cubes.push(ElementaryCube::vertex(&[3 * c as i64, 0])),
                }
            }
            let complex = CubicalComplex::closure(cubes);
            let components = elements
                .iter()
                .enumerate()
                .map(|(c, &e)| match e {
                    ElementId::Circle(_) => {
                        let cells = circle_cells(&complex, c as i64);
                        circles.insert(e, cells);
                        ModelComponent {
                            element: Some(e),
                            shape: ComponentShape::Circle,
                            cells: vec![cells.vertices.to_vec(), cells.edges.iter().map(|x| x.0).collect()],
                        }
                    }
                    ElementId::Point(_) => ModelComponent {
                        element: Some(e),
                        shape: ComponentShape::Point,
                        cells: vec![vec![complex
                            .index_of(&ElementaryCube::vertex(&[3 * c as i64, 0]))
                            .expect("vertex in model")]],
                    },
                })
                .collect();
            models.push(BottModel {
                bott_index: i,
                components,
                cell_counts: complex.counts(),
                complex,
            });
        }
        Self {
            landscape,
            set,
            tol,
            models,
            circles,
            maps: BTreeMap::new(),
            endpoint_terms: Vec::new(),
            windings: Vec::new(),
        }
    }

    fn rank(&self, i: usize, q: usize) -> usize {
        self.models.get(i).map_or(0, |m| m.complex.cells(q).len())
    }

    fn entry(&mut self, key: (usize, usize, usize), row: usize, col: usize, value: i64) {
        let (j, i, q) = key;
        let rows = self.rank(i - j, q + j - 1);
        let cols = self.rank(i, q);
        self.maps
            .entry(key)
            .or_insert_with(|| IntegerMatrix::zeros(rows, cols))
            .add_to(row, col, &value.into());
    }

    fn run(mut self) -> Result<(MorseBottChainData, Multicomplex)> {
        let dim = self.landscape.manifold.dim();
        for i in 0..=dim {
            for q in 1..self.models[i].cell_counts.len() {
                let d = signed_boundary(&self.models[i].complex, i, q);
                self.maps.insert((0, i, q), d);
            }
        }
        for i in 1..=dim {
            let components = self.models[i].components.clone();
            for comp in &components {
                match (comp.element.expect("numeric components are elements"), i) {
                    (ElementId::Point(p), 1) => self.from_saddle(p, comp.cells[0][0])?,
                    (ElementId::Point(p), 2) => {
                        self.from_maximum_d1(p, comp.cells[0][0])?;
                        self.from_maximum_d2(p, comp.cells[0][0])?;
                    }
                    (e @ ElementId::Circle(_), 1) => self.from_circle(e)?,
                    (e, _) => {
                        return Err(Error::DimensionUnsupported(format!("{e:?} of Bott index {i}")));
                    }
                }
            }
        }
        let width = self
            .models
            .iter()
            .map(|m| m.cell_counts.len())
            .max()
            .unwrap_or(0)
            .max(1);
        let ranks = (0..=dim)
            .map(|i| (0..width).map(|q| self.rank(i, q)).collect())
            .collect();
        let x = Multicomplex::new(ranks, self.maps)?;
        let data = MorseBottChainData {
            landscape: self.landscape.name.clone(),
            models: self.models,
            endpoint_terms: self.endpoint_terms,
            windings: self.windings,
        };
        Ok((data, x))
    }

    fn land(&self, x: &Vector3<f64>, dir: &Vector3<f64>) -> Result<Limit> {
        let m = self.landscape.manifold;
        let start = m.exp(x, &(dir * self.tol.shooting_radius));
        let tr = integrate(self.landscape, &start, Direction::Forward, &self.set, self.tol)?;
        Ok(*tr.captured())
    }

    /// Coordinate of a landing on a critical circle.
    fn landing_u(&self, l: &Limit) -> Option<f64> {
        match l.element {
            ElementId::Circle(c) => Some(self.set.circles[c].chart.u(l.position.raw())),
            ElementId::Point(_) => None,
        }
    }

    /// Vertex of the model of `B_{i−1}` where a line from `B_i` ends.
    fn endpoint_vertex(&self, i: usize, l: &Limit) -> Option<usize> {
        if self.set.index_of(l.element) + 1 != i {
            return None;
        }
        match l.element {
            ElementId::Circle(_) => Some(self.circles[&l.element].vertex_at(self.landing_u(l)?)),
            ElementId::Point(_) => self.models[i - 1]
                .components
                .iter()
                .find(|c| c.element == Some(l.element))
                .map(|c| c.cells[0][0]),
        }
    }

    fn add_endpoint(&mut self, i: usize, source: ElementId, source_cell: usize, sign: i64, l: &Limit) {
        let target_cell = self.endpoint_vertex(i, l);
        if let Some(row) = target_cell {
            self.entry((1, i, 0), row, source_cell, sign);
        }
        self.endpoint_terms.push(EndpointTerm {
            source,
            source_cell,
            sign,
            target: l.element,
            target_cell,
        });
    }

    /// `∂_1` of an index-one point: its two descending lines, `+1` along the
    /// canonically oriented unstable direction.
    fn from_saddle(&mut self, p: usize, cell: usize) -> Result<()> {
        let x = *self.set.points[p].position.raw();
        let e = principal_direction(self.landscape, &x, true)
            .ok_or_else(|| Error::DimensionUnsupported(format!("point {p} has no single unstable direction")))?;
        for sign in [1, -1] {
            let l = self.land(&x, &(e * sign as f64))?;
            self.add_endpoint(1, ElementId::Point(p), cell, sign, &l);
        }
        Ok(())
    }

    /// `∂_1` of an index-two point into index-one points, by the forward
    /// dense scan.
    fn from_maximum_d1(&mut self, p: usize, cell: usize) -> Result<()> {
        if self.models[1]
            .components
            .iter()
            .any(|c| c.shape == ComponentShape::Circle)
        {
            return Err(Error::DimensionUnsupported(
                "flow lines from an index-two point onto a critical circle".into(),
            ));
        }
        let targets: Vec<(usize, usize)> = self.models[1]
            .components
            .iter()
            .filter_map(|c| match c.element {
                Some(ElementId::Point(q)) => Some((q, c.cells[0][0])),
                _ => None,
            })
            .collect();
        for (q, row) in targets {
            let conn = dense_scan_connections(self.landscape, &self.set, p, q, self.tol, SCAN_DENSITY)?;
            for line in &conn.lines {
                self.endpoint_terms.push(EndpointTerm {
                    source: ElementId::Point(p),
                    source_cell: cell,
                    sign: line.sign,
                    target: ElementId::Point(q),
                    target_cell: Some(row),
                });
            }
            if conn.signed != 0 {
                self.entry((1, 2, 0), row, cell, conn.signed);
            }
        }
        Ok(())
    }

    /// `∂_2` of an index-two point: the winding degree of the circle of
    /// flow lines leaving it, times the fundamental cycle it lands on.
    fn from_maximum_d2(&mut self, p: usize, cell: usize) -> Result<()> {
        if self.rank(0, 1) == 0 {
            return Ok(());
        }
        if !self.models[1].components.is_empty() {
            return Err(Error::DimensionUnsupported(
                "two-step flow family from an index-two point with index-one elements present".into(),
            ));
        }
        let x = *self.set.points[p].position.raw();
        let basis = self.landscape.manifold.tangent_basis(&x);
        let dir = |psi: f64| basis[0] * psi.cos() + basis[1] * psi.sin();
        let psis: Vec<f64> = (0..FAMILY_STEPS)
            .map(|k| k as f64 * TAU / FAMILY_STEPS as f64)
            .collect();
        let lands: Vec<Limit> = psis
            .par_iter()
            .map(|&psi| self.land(&x, &dir(psi)))
            .collect::<Result<_>>()?;
        let target = lands[0].element;
        let mut total = 0.0;
        for k in 0..FAMILY_STEPS {
            let (a, b) = (&lands[k], &lands[(k + 1) % FAMILY_STEPS]);
            let psi_b = psis[k] + TAU / FAMILY_STEPS as f64;
            total += self.sweep(&x, &dir, target, (psis[k], a), (psi_b, b), REFINE_DEPTH)?;
        }
        let degree = (total / TAU).round() as i64;
        self.windings.push(WindingDegree {
            source: ElementId::Point(p),
            source_cell: Some(cell),
            side: None,
            target,
            degree,
        });
        if let Some(cells) = self.circles.get(&target).copied() {
            for (e, s) in cells.cycle() {
                self.entry((2, 2, 0), e, cell, degree * s);
            }
        }
        Ok(())
    }

    /// Landing-angle change across `[a, b]` of the family, subdividing where
    /// the angle jumps.
    fn sweep(
        &self,
        x: &Vector3<f64>,
        dir: &dyn Fn(f64) -> Vector3<f64>,
        target: ElementId,
        a: (f64, &Limit),
        b: (f64, &Limit),
        depth: usize,
    ) -> Result<f64> {
        for l in [a.1, b.1] {
            if l.element != target || self.landing_u(l).is_none() {
                return Err(Error::DimensionUnsupported(format!(
                    "flow family from {x:?} does not land on a single critical circle"
                )));
            }
        }
        let jump = wrap_signed(self.landing_u(b.1).unwrap() - self.landing_u(a.1).unwrap());
        if jump.abs() <= MAX_JUMP {
            return Ok(jump);
        }
        if depth == 0 {
            return Err(Error::RelationFailure(format!(
                "flow family from {x:?} jumps by {jump:.3} near direction {:.6}",
                a.0
            )));
        }
        let mid = 0.5 * (a.0 + b.0);
        let lm = self.land(x, &dir(mid))?;
        Ok(self.sweep(x, dir, target, a, (mid, &lm), depth - 1)?
            + self.sweep(x, dir, target, (mid, &lm), b, depth - 1)?)
    }

    /// `∂_1` of a critical circle of Bott index one, on vertices and edges,
    /// one normal side at a time (`+1` along the chart normal).
    fn from_circle(&mut self, e: ElementId) -> Result<()> {
        let ElementId::Circle(c) = e else { unreachable!() };
        let chart = self.set.circles[c].chart;
        let cells = self.circles[&e];
        let n = 4 * EDGE_STEPS;
        let us: Vec<f64> = (0..n).map(|k| k as f64 * TAU / n as f64).collect();
        for side in [1i64, -1] {
            let lands: Vec<Limit> = us
                .par_iter()
                .map(|&u| {
                    let x = chart.point(u);
                    self.land(&x, &(chart.normal(&x) * side as f64))
                })
                .collect::<Result<_>>()?;
            for k in 0..4 {
                let l = lands[k * EDGE_STEPS];
                self.add_endpoint(1, e, cells.vertices[k], side, &l);
            }
            let target = lands[0].element;
            if lands.iter().any(|l| l.element != target) {
                return Err(Error::DimensionUnsupported(format!(
                    "flow family from circle {c} lands on several components"
                )));
            }
            let Some(target_cells) = self.circles.get(&target).copied() else {
                // Endpoints on a point: no 1-chains there.
                continue;
            };
            if self.set.index_of(target) != 0 {
                continue;
            }
            let mut unwrapped = vec![self.landing_u(&lands[0]).expect("circle target")];
            for k in 1..=n {
                let prev = self.landing_u(&lands[k - 1]).expect("circle target");
                let next = self.landing_u(&lands[k % n]).expect("circle target");
                let jump = wrap_signed(next - prev);
                if jump.abs() > MAX_JUMP {
                    return Err(Error::RelationFailure(format!(
                        "endpoint curve of circle {c} jumps by {jump:.3} at u = {:.4}",
                        us[k - 1]
                    )));
                }
                unwrapped.push(unwrapped[k - 1] + jump);
            }
            for k in 0..4 {
                let (edge, eps) = cells.edges[k];
                let from = unwrapped[k * EDGE_STEPS];
                let to = unwrapped[(k + 1) * EDGE_STEPS];
                for (row, s) in target_cells.path(from, to) {
                    self.entry((1, 1, 1), row, edge, side * eps * s);
                }
            }
            self.windings.push(WindingDegree {
                source: e,
                source_cell: None,
                side: Some(side),
                target,
                degree: ((unwrapped[n] - unwrapped[0]) / TAU).round() as i64,
            });
        }
        Ok(())
    }
}

/// The Morse case of the interpolation: the multicomplex is the MSW complex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseCaseRow {
    pub landscape: String,
    pub concentrated_in_row_zero: bool,
    pub matrices_equal: bool,
    pub error: Option<String>,
}

/// The constant case: the multicomplex is the cubical complex of `M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantCaseRow {
    pub landscape: String,
    pub homology: Vec<HomologyResult>,
    pub cubical: Vec<HomologyResult>,
    pub reference_betti: Vec<usize>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    pub morse: Vec<MorseCaseRow>,
    pub constant: Vec<ConstantCaseRow>,
}

impl InterpolationReport {
    pub fn passed(&self) -> bool {
        self.morse
            .iter()
            .all(|r| r.error.is_none() && r.concentrated_in_row_zero && r.matrices_equal)
            && self.constant.iter().all(|r| r.passed)
    }
}

fn morse_row(l: &Landscape, tol: &Tolerances, opts: &DetectOptions) -> Result<MorseCaseRow> {
    let build = build_morse_bott_multicomplex(l, BuildMode::Numeric, tol, opts)?;
    let set = detect_critical_set(l, tol, opts)?;
    let msw = build_msw(l, &set, Coefficients::Integers, tol)?;
    let x = &build.multicomplex;
    let concentrated = (0..x.p_len()).all(|p| (1..x.q_len()).all(|q| x.rank(p, q) == 0));
    let a = &build.assembled.complex;
    let b = &msw.complex;
    let matrices_equal =
        a.generators() == b.generators() && (1..=a.max_degree()).all(|k| a.boundary(k) == b.boundary(k));
    Ok(MorseCaseRow {
        landscape: l.name.clone(),
        concentrated_in_row_zero: concentrated,
        matrices_equal,
        error: None,
    })
}

fn constant_row(m: Manifold, tol: &Tolerances, opts: &DetectOptions) -> Result<ConstantCaseRow> {
    let l = constant_on(m);
    let build = build_morse_bott_multicomplex(&l, BuildMode::Numeric, tol, opts)?;
    let h = build.homology(Coefficients::Integers)?;
    let cubical = cubical_homology(&manifold_model(m), Coefficients::Integers)?;
    let reference_betti = m.reference_betti();
    Ok(ConstantCaseRow {
        landscape: l.name,
        passed: h == cubical && betti_numbers(&h) == reference_betti,
        homology: h,
        cubical,
        reference_betti,
        error: None,
    })
}

/// Both ends of the interpolation: every Morse catalog entry (the
/// multicomplex is a single row and its assembly is the MSW complex) and the
/// constant function on each manifold (the assembly is the cubical complex
/// of the manifold). Failures are recorded in the rows.
pub fn interpolation_checks(tol: &Tolerances, opts: &DetectOptions) -> InterpolationReport {
    let morse = catalog()
        .iter()
        .filter(|l| l.kind == LandscapeKind::Morse)
        .map(|l| {
            morse_row(l, tol, opts).unwrap_or_else(|e| MorseCaseRow {
                landscape: l.name.clone(),
                concentrated_in_row_zero: false,
                matrices_equal: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let constant = [Manifold::Circle, Manifold::Torus, Manifold::Sphere]
        .into_iter()
        .map(|m| {
            constant_row(m, tol, opts).unwrap_or_else(|e| ConstantCaseRow {
                landscape: constant_on(m).name,
                homology: Vec::new(),
                cubical: Vec::new(),
                reference_betti: m.reference_betti(),
                passed: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    InterpolationReport { morse, constant }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::lookup;

    fn build(name: &str) -> MorseBottBuild {
        build_morse_bott_multicomplex(
            &lookup(name).unwrap(),
            BuildMode::Numeric,
            &Tolerances::default(),
            &DetectOptions::default(),
        )
        .unwrap()
    }

    fn betti(b: &MorseBottBuild) -> Vec<usize> {
        betti_numbers(&b.homology(Coefficients::Integers).unwrap())
    }

    /// Independent oracle for the circle model: walking the cycle visits
    /// every vertex once and each edge goes from one vertex to the next.
    #[test]
    fn circle_cells_are_cyclic() {
        let k = CubicalComplex::closure(circle_cubes(0));
        let cells = circle_cells(&k, 0);
        let d = k.boundary_matrix(1);
        for i in 0..4 {
            let (e, s) = cells.edges[i];
            for v in 0..4 {
                let expect = if v == cells.vertices[(i + 1) % 4] {
                    s
                } else if v == cells.vertices[i] {
                    -s
                } else {
                    0
                };
                assert_eq!(d.get(v, e), &expect.into());
            }
        }
        assert_eq!(cells.path(0.0, TAU).len(), 4);
        assert_eq!(
            cells.path(TAU, 0.0).iter().map(|x| x.1).sum::<i64>(),
            -cells.cycle().iter().map(|x| x.1).sum::<i64>()
        );
        assert!(cells.path(0.1, 0.2).is_empty());
    }

    fn set_of(name: &str) -> CriticalSet {
        detect_critical_set(
            &lookup(name).unwrap(),
            &Tolerances::default(),
            &DetectOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn zsq_sphere() {
        let b = build("sphere_zsq");
        assert_eq!(b.multicomplex.ranks(), &[vec![4, 4], vec![0, 0], vec![2, 0]]);
        let set = set_of("sphere_zsq");
        let mut w: Vec<(f64, i64)> = b
            .data
            .windings
            .iter()
            .map(|w| {
                let ElementId::Point(p) = w.source else {
                    panic!("winding from a circle")
                };
                (set.points[p].position.raw().z, w.degree)
            })
            .collect();
        w.sort_by(|a, c| a.0.total_cmp(&c.0));
        // South pole winds −1, north pole +1.
        assert_eq!(w.iter().map(|x| x.1).collect::<Vec<_>>(), vec![-1, 1]);
        // ∂_2 of each pole is ± the fundamental cycle of the equator model.
        let d2 = b.multicomplex.map(2, 2, 0);
        let d0 = b.multicomplex.map(0, 0, 1);
        assert!(d0.checked_mul(&d2).unwrap().is_zero());
        assert_eq!(betti(&b), vec![1, 0, 1]);
        assert!(b
            .homology(Coefficients::Integers)
            .unwrap()
            .iter()
            .all(|h| h.torsion.is_empty()));
    }

    #[test]
    fn cosphi_torus() {
        let b = build("torus_cosphi");
        assert_eq!(b.multicomplex.ranks(), &[vec![4, 4], vec![4, 4], vec![0, 0]]);
        assert!(b.multicomplex.map(1, 1, 0).is_zero());
        assert!(b.multicomplex.map(1, 1, 1).is_zero());
        // Two endpoint terms per vertex, on the same vertex with opposite signs.
        let terms: Vec<&EndpointTerm> = b.data.endpoint_terms.iter().collect();
        assert_eq!(terms.len(), 8);
        for v in 0..4 {
            let at: Vec<_> = terms.iter().filter(|t| t.source_cell == v).collect();
            assert_eq!(at.len(), 2);
            assert_eq!(at[0].target_cell, at[1].target_cell);
            assert!(at[0].target_cell.is_some());
            assert_eq!(at[0].sign + at[1].sign, 0);
        }
        // Each side of the circle winds once around the minimum circle.
        assert!(b.data.windings.iter().all(|w| w.degree == 1));
        assert_eq!(betti(&b), vec![1, 2, 1]);
    }

    #[test]
    fn degree_bookkeeping() {
        for name in ["sphere_zsq", "torus_cosphi", "torus_tilted"] {
            let b = build(name);
            for (k, blocks) in b.assembled.layout.blocks.iter().enumerate() {
                assert!(blocks.iter().all(|bl| bl.p + bl.q == k));
            }
            assert!(b.assembled.filtration_preserved());
        }
    }

    #[test]
    fn interpolation() {
        let r = interpolation_checks(&Tolerances::default(), &DetectOptions::default());
        assert_eq!(r.morse.len(), 4);
        assert!(r.passed(), "{r:?}");
        let torus = r.constant.iter().find(|c| c.landscape == "torus_constant").unwrap();
        assert_eq!(betti_numbers(&torus.homology), vec![1, 2, 1]);
        let sphere = r.constant.iter().find(|c| c.landscape == "sphere_constant").unwrap();
        assert_eq!(betti_numbers(&sphere.homology), vec![1, 0, 1]);
    }

    #[test]
    fn symbolic_mode_verifies_relations() {
        let l = lookup("sphere_zsq").unwrap();
        let (tol, opts) = (Tolerances::default(), DetectOptions::default());
        let good = MulticomplexDoc::parse(
            r#"{"ranks": [[1, 1], [1, 1]], "differentials": [
                {"j": 0, "p": 0, "q": 1, "matrix": [[1]]},
                {"j": 0, "p": 1, "q": 1, "matrix": [[1]]},
                {"j": 1, "p": 1, "q": 0, "matrix": [[1]]},
                {"j": 1, "p": 1, "q": 1, "matrix": [[-1]]}]}"#,
        )
        .unwrap();
        let b = build_morse_bott_multicomplex(&l, BuildMode::Symbolic(&good), &tol, &opts).unwrap();
        assert_eq!(betti(&b), vec![0, 0, 0]);
        let bad = MulticomplexDoc::parse(
            r#"{"ranks": [[1, 1], [1, 1]], "differentials": [
                {"j": 0, "p": 0, "q": 1, "matrix": [[1]]},
                {"j": 0, "p": 1, "q": 1, "matrix": [[1]]},
                {"j": 1, "p": 1, "q": 0, "matrix": [[1]]},
                {"j": 1, "p": 1, "q": 1, "matrix": [[1]]}]}"#,
        )
        .unwrap();
        assert!(matches!(
            build_morse_bott_multicomplex(&l, BuildMode::Symbolic(&bad), &tol, &opts),
            Err(Error::RelationFailure(_))
        ));
    }
}
