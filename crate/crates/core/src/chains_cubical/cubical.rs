use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::exact_algebra::{homology, Coefficients, GradedChainComplex, HomologyResult, IntegerMatrix};

/// Elementary interval on the integer line: `[a, a]` or `[a, a + 1]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: i64,
    pub unit: bool,
}

impl Interval {
    pub fn point(a: i64) -> Self {
        Self { lo: a, unit: false }
    }

    pub fn unit(a: i64) -> Self {
        Self { lo: a, unit: true }
    }
}

/// Elementary cube in `Z^N`: a product of elementary intervals.
///
/// Ordered by dimension first so that sorted collections list vertices, then
/// edges, then squares.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementaryCube {
    intervals: Vec<Interval>,
}

impl ElementaryCube {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn vertex(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&a| Interval::point(a)).collect())
    }

    pub fn dim(&self) -> usize {
        self.intervals.iter().filter(|i| i.unit).count()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Lower-left corner.
    pub fn corner(&self) -> Vec<i64> {
        self.intervals.iter().map(|i| i.lo).collect()
    }

    /// Signed codimension-one faces, using the same convention as the
    /// standard cube: `Σ_j (−1)^j [upper_j − lower_j]` over unit coordinates.
    pub fn boundary(&self) -> Vec<(ElementaryCube, i64)> {
        let mut out = Vec::new();
        let units = self.intervals.iter().enumerate().filter(|(_, i)| i.unit);
        for (j, (pos, iv)) in units.enumerate() {
            let sign = if (j + 1) % 2 == 0 { 1 } else { -1 };
            let mut upper = self.intervals.clone();
            upper[pos] = Interval::point(iv.lo + 1);
            let mut lower = self.intervals.clone();
            lower[pos] = Interval::point(iv.lo);
            out.push((ElementaryCube::new(upper), sign));
            out.push((ElementaryCube::new(lower), -sign));
        }
        out
    }

    /// Cartesian product.
    pub fn product(&self, other: &Self) -> Self {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        Self::new(v)
    }
}

impl PartialOrd for ElementaryCube {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ElementaryCube {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.dim(), &self.intervals).cmp(&(other.dim(), &other.intervals))
    }
}

impl fmt::Debug for ElementaryCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, "x")?;
            }
            if i.unit {
                write!(f, "[{},{}]", i.lo, i.lo + 1)?;
            } else {
                write!(f, "[{}]", i.lo)?;
            }
        }
        Ok(())
    }
}

/// Finite face-closed set of elementary cubes.
///
/// Elementary cubes are never constant along a free coordinate, so the
/// degenerate subcomplex of the cubical singular chains restricted to these
/// generators is zero and the chain complex below is already the quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicalComplex {
    /// Cubes grouped by dimension, each group sorted.
    cells: Vec<Vec<ElementaryCube>>,
}

impl CubicalComplex {
    /// Builds a complex from an explicit cube list, rejecting it unless every
    /// face of every cube is present.
    pub fn new(cubes: impl IntoIterator<Item = ElementaryCube>) -> Result<Self> {
        let set: BTreeSet<ElementaryCube> = cubes.into_iter().collect();
        let ambient = set.iter().next().map(|c| c.intervals.len());
        for c in &set {
            if Some(c.intervals.len()) != ambient {
                return Err(Error::ShapeMismatch(format!(
                    "cube {c:?} in a different ambient dimension"
                )));
            }
            for (face, _) in c.boundary() {
                if !set.contains(&face) {
                    return Err(Error::NotFaceClosed(format!("{face:?} (face of {c:?})")));
                }
            }
        }
        let top = set.iter().map(ElementaryCube::dim).max();
        let mut cells = vec![Vec::new(); top.map_or(0, |t| t + 1)];
        for c in set {
            cells[c.dim()].push(c);
        }
        Ok(Self { cells })
    }

    /// Smallest face-closed complex containing the given cubes.
    pub fn closure(cubes: impl IntoIterator<Item = ElementaryCube>) -> Self {
        let mut set = BTreeSet::new();
        let mut stack: Vec<ElementaryCube> = cubes.into_iter().collect();
        while let Some(c) = stack.pop() {
            if set.insert(c.clone()) {
                stack.extend(c.boundary().into_iter().map(|(f, _)| f));
            }
        }
        Self::new(set).expect("closure is face closed")
    }

    pub fn dim(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn cells(&self, k: usize) -> &[ElementaryCube] {
        self.cells.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, c: &ElementaryCube) -> Option<usize> {
        self.cells.get(c.dim())?.binary_search(c).ok()
    }

    /// Boundary matrix from `k`-cubes to `(k−1)`-cubes in sorted order.
    pub fn boundary_matrix(&self, k: usize) -> IntegerMatrix {
        let rows = if k == 0 { 0 } else { self.cells(k - 1).len() };
        let mut m = IntegerMatrix::zeros(rows, self.cells(k).len());
        if k == 0 {
            return m;
        }
        for (col, c) in self.cells(k).iter().enumerate() {
            for (face, sign) in c.boundary() {
                let row = self.index_of(&face).expect("face closed");
                m.add_to(row, col, &sign.into());
            }
        }
        m
    }

    pub fn chain_complex(&self) -> GradedChainComplex {
        let boundary: BTreeMap<usize, IntegerMatrix> = (1..=self.dim()).map(|k| (k, self.boundary_matrix(k))).collect();
        GradedChainComplex::new(self.counts(), boundary).expect("shapes consistent")
    }

    /// Cartesian product complex.
    pub fn product(&self, other: &Self) -> Self {
        let mut cubes = Vec::new();
        for a in self.cells.iter().flatten() {
            for b in other.cells.iter().flatten() {
                cubes.push(a.product(b));
            }
        }
        Self::new(cubes).expect("product of face-closed complexes is face closed")
    }

    /// Single point.
    pub fn point() -> Self {
        Self::new([ElementaryCube::new(Vec::new())]).expect("point")
    }

    /// Boundary of the unit square in `Z^2`: 4 vertices, 4 edges.
    pub fn circle() -> Self {
        let u = Interval::unit(0);
        let p = Interval::point;
        Self::closure([
            ElementaryCube::new(vec![u, p(0)]),
            ElementaryCube::new(vec![p(1), u]),
            ElementaryCube::new(vec![u, p(1)]),
            ElementaryCube::new(vec![p(0), u]),
        ])
    }

    /// Boundary of the unit cube in `Z^3`: 8 vertices, 12 edges, 6 squares.
    pub fn sphere() -> Self {
        let u = Interval::unit(0);
        let mut squares = Vec::new();
        for fixed in 0..3 {
            for side in 0..2 {
                let mut v = vec![u; 3];
                v[fixed] = Interval::point(side);
                squares.push(ElementaryCube::new(v));
            }
        }
        Self::closure(squares)
    }

    /// Product of two square boundaries in `Z^4`: 16 vertices, 32 edges,
    /// 16 squares.
    pub fn torus() -> Self {
        Self::circle().product(&Self::circle())
    }
}

/// Homology of a cubical complex.
pub fn cubical_homology(k: &CubicalComplex, coefficients: Coefficients) -> Result<Vec<HomologyResult>> {
    homology(&k.chain_complex(), coefficients)
}
