use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_algebra::{verify_complex, GradedChainComplex, IntegerMatrix};

/// First-quadrant multicomplex: groups `X_{p,q}` of given ranks with maps
/// `d_j: X_{p,q} → X_{p−j, q+j−1}`. Unlisted maps are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multicomplex {
    /// `ranks[p][q]`; every row has the same length.
    ranks: Vec<Vec<usize>>,
    /// Keyed by `(j, p, q)` of the source group.
    maps: BTreeMap<(usize, usize, usize), IntegerMatrix>,
}

/// One failing instance of `Σ_{i+j=n} d_i d_j = 0`, at source bidegree `(p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RelationFailure {
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl Multicomplex {
    /// Builds a multicomplex, checking that every map has the shape its
    /// bidegree demands and stays in the first quadrant.
    pub fn new(ranks: Vec<Vec<usize>>, maps: BTreeMap<(usize, usize, usize), IntegerMatrix>) -> Result<Self> {
        let width = ranks.first().map_or(0, Vec::len);
        if ranks.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeMismatch("ragged rank table".into()));
        }
        let mc = Self { ranks, maps };
        for (&(j, p, q), m) in &mc.maps {
            let Some((tp, tq)) = target(j, p, q) else {
                return Err(Error::ShapeMismatch(format!(
                    "d_{j} out of ({p},{q}) leaves the first quadrant"
                )));
            };
            let expected = (mc.rank(tp, tq), mc.rank(p, q));
            if m.shape() != expected {
                return Err(Error::ShapeMismatch(format!(
                    "d_{j} at ({p},{q}) has shape {:?}, expected {expected:?}",
                    m.shape()
                )));
            }
        }
        Ok(mc)
    }

    pub fn zero(ranks: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(ranks, BTreeMap::new())
    }

    pub fn p_len(&self) -> usize {
        self.ranks.len()
    }

    pub fn q_len(&self) -> usize {
        self.ranks.first().map_or(0, Vec::len)
    }

    pub fn rank(&self, p: usize, q: usize) -> usize {
        self.ranks.get(p).and_then(|r| r.get(q)).copied().unwrap_or(0)
    }

    pub fn ranks(&self) -> &[Vec<usize>] {
        &self.ranks
    }

    pub fn max_total_degree(&self) -> usize {
        (self.p_len() + self.q_len()).saturating_sub(2)
    }

    /// `d_j` out of `X_{p,q}`, zero when absent or out of range.
    pub fn map(&self, j: usize, p: usize, q: usize) -> IntegerMatrix {
        if let Some(m) = self.maps.get(&(j, p, q)) {
            return m.clone();
        }
        let rows = target(j, p, q).map_or(0, |(tp, tq)| self.rank(tp, tq));
        IntegerMatrix::zeros(rows, self.rank(p, q))
    }

    pub fn maps(&self) -> impl Iterator<Item = (&(usize, usize, usize), &IntegerMatrix)> {
        self.maps.iter()
    }

    /// Largest `j` with a nonzero map.
    pub fn max_j(&self) -> usize {
        self.maps
            .iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(&(j, _, _), _)| j)
            .max()
            .unwrap_or(0)
    }

    /// Splits an assembled differential back into components. Entries that
    /// raise the filtration degree are reported as a shape error.
    pub fn from_assembled(ranks: Vec<Vec<usize>>, complex: &GradedChainComplex) -> Result<Self> {
        let skeleton = Self::zero(ranks)?;
        let layout = Layout::of(&skeleton);
        let mut maps = BTreeMap::new();
        for k in 1..layout.blocks.len() {
            let big = complex.boundary(k);
            for src in &layout.blocks[k] {
                for dst in &layout.blocks[k - 1] {
                    let block = big.block(dst.offset, src.offset, dst.len, src.len);
                    if block.is_zero() {
                        continue;
                    }
                    if dst.p > src.p {
                        return Err(Error::ShapeMismatch(format!(
                            "component ({},{}) -> ({},{}) raises filtration",
                            src.p, src.q, dst.p, dst.q
                        )));
                    }
                    maps.insert((src.p - dst.p, src.p, src.q), block);
                }
            }
        }
        Self::new(skeleton.ranks, maps)
    }
}

fn target(j: usize, p: usize, q: usize) -> Option<(usize, usize)> {
    let tp = p.checked_sub(j)?;
    let tq = (q + j).checked_sub(1)?;
    Some((tp, tq))
}

/// Checks `Σ_{i+j=n} d_i d_j = 0` on every source bidegree and every `n`.
pub fn verify_multicomplex(x: &Multicomplex) -> std::result::Result<(), Vec<RelationFailure>> {
    let mut failures = Vec::new();
    let n_max = x.p_len();
    for p in 0..x.p_len() {
        for q in 0..x.q_len() {
            for n in 0..=n_max.max(1) {
                // Target of the composite: (p − n, q + n − 2).
                let Some(tp) = p.checked_sub(n) else { continue };
                let Some(tq) = (q + n).checked_sub(2) else { continue };
                let mut sum = IntegerMatrix::zeros(x.rank(tp, tq), x.rank(p, q));
                for j in 0..=n {
                    let i = n - j;
                    let Some((mp, mq)) = target(j, p, q) else { continue };
                    let first = x.map(j, p, q);
                    let second = x.map(i, mp, mq);
                    sum = sum.checked_add(&(&second * &first)).expect("composite shape");
                }
                if !sum.is_zero() {
                    failures.push(RelationFailure { n, p, q });
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}

/// Position of `X_{p,q}` inside `(CX)_{p+q}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub p: usize,
    pub q: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Layout {
    /// Blocks per total degree, in increasing `p`.
    pub blocks: Vec<Vec<Block>>,
}

impl Layout {
    fn of(x: &Multicomplex) -> Self {
        let total = if x.p_len() == 0 || x.q_len() == 0 {
            0
        } else {
            x.max_total_degree() + 1
        };
        let blocks = (0..total)
            .map(|k| {
                let mut offset = 0;
                (0..=k)
                    .filter(|&p| p < x.p_len() && k - p < x.q_len())
                    .map(|p| {
                        let b = Block {
                            p,
                            q: k - p,
                            offset,
                            len: x.rank(p, k - p),
                        };
                        offset += b.len;
                        b
                    })
                    .collect()
            })
            .collect();
        Self { blocks }
    }

    pub fn size(&self, k: usize) -> usize {
        self.blocks.get(k).map_or(0, |b| b.iter().map(|b| b.len).sum())
    }

    /// Filtration degree `p` of each generator of `(CX)_k`.
    pub fn filtration(&self, k: usize) -> Vec<usize> {
        self.blocks
            .get(k)
            .map(|bs| bs.iter().flat_map(|b| std::iter::repeat(b.p).take(b.len)).collect())
            .unwrap_or_default()
    }
}

/// Total complex `(CX)_k = ⊕_{p+q=k} X_{p,q}` with `∂ = d_0 + d_1 + ⋯`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssembledComplex {
    pub complex: GradedChainComplex,
    pub layout: Layout,
}

impl AssembledComplex {
    /// `∂ F_s ⊆ F_s`: no matrix entry maps a generator of filtration `p` to
    /// one of filtration greater than `p`.
    pub fn filtration_preserved(&self) -> bool {
        (1..self.layout.blocks.len()).all(|k| {
            let m = self.complex.boundary(k);
            let src = self.layout.filtration(k);
            let dst = self.layout.filtration(k - 1);
            (0..m.rows()).all(|r| (0..m.cols()).all(|c| m.get(r, c).is_zero() || dst[r] <= src[c]))
        })
    }

    /// Generators of `F_s (CX)_k`.
    pub fn filtration_rank(&self, s: usize, k: usize) -> usize {
        self.layout.filtration(k).iter().filter(|&&p| p <= s).count()
    }
}

/// Sums a verified multicomplex along its diagonals.
pub fn assemble(x: &Multicomplex) -> Result<AssembledComplex> {
    verify_multicomplex(x).map_err(|f| {
        Error::RelationFailure(format!(
            "Σ d_i d_j ≠ 0 at {}",
            f.iter()
                .map(|r| format!("n={} ({},{})", r.n, r.p, r.q))
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })?;
    let layout = Layout::of(x);
    let generators: Vec<usize> = (0..layout.blocks.len()).map(|k| layout.size(k)).collect();
    let mut boundary = BTreeMap::new();
    for k in 1..layout.blocks.len() {
        let mut m = IntegerMatrix::zeros(layout.size(k - 1), layout.size(k));
        for src in &layout.blocks[k] {
            for dst in &layout.blocks[k - 1] {
                if dst.p > src.p {
                    continue;
                }
                let block = x.map(src.p - dst.p, src.p, src.q);
                m.set_block(dst.offset, src.offset, &block);
            }
        }
        boundary.insert(k, m);
    }
    let complex = GradedChainComplex::new(generators, boundary)?;
    verify_complex(&complex).map_err(|degrees| Error::NotAComplex { degrees })?;
    Ok(AssembledComplex { complex, layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::{betti_numbers, homology, Coefficients};

    fn m(rows: &[Vec<i64>]) -> IntegerMatrix {
        IntegerMatrix::from_rows(rows)
    }

    /// Double complex on a square: X_{0,0}, X_{1,0}, X_{0,1}, X_{1,1} of rank 1
    /// with anticommuting d_0 and d_1 (an acyclic square).
    fn square() -> Multicomplex {
        let maps = BTreeMap::from([
            ((0, 0, 1), m(&[vec![1]])),
            ((0, 1, 1), m(&[vec![1]])),
            ((1, 1, 0), m(&[vec![1]])),
            ((1, 1, 1), m(&[vec![-1]])),
        ]);
        Multicomplex::new(vec![vec![1, 1], vec![1, 1]], maps).unwrap()
    }

    #[test]
    fn double_complex_passes() {
        let x = square();
        assert_eq!(verify_multicomplex(&x), Ok(()));
        let a = assemble(&x).unwrap();
        assert!(a.filtration_preserved());
        let h = homology(&a.complex, Coefficients::Integers).unwrap();
        assert_eq!(betti_numbers(&h), vec![0, 0, 0]);
    }

    #[test]
    fn commuting_square_fails() {
        let maps = BTreeMap::from([
            ((0, 0, 1), m(&[vec![1]])),
            ((0, 1, 1), m(&[vec![1]])),
            ((1, 1, 0), m(&[vec![1]])),
            ((1, 1, 1), m(&[vec![1]])),
        ]);
        let x = Multicomplex::new(vec![vec![1, 1], vec![1, 1]], maps).unwrap();
        assert_eq!(verify_multicomplex(&x), Err(vec![RelationFailure { n: 1, p: 1, q: 1 }]));
        assert!(matches!(assemble(&x), Err(Error::RelationFailure(_))));
    }

    #[test]
    fn zero_differentials_pass() {
        let x = Multicomplex::zero(vec![vec![2, 1], vec![0, 3]]).unwrap();
        assert_eq!(verify_multicomplex(&x), Ok(()));
    }

    #[test]
    fn d0_squared_nonzero_fails_at_n0() {
        let maps = BTreeMap::from([((0, 0, 1), m(&[vec![1]])), ((0, 0, 2), m(&[vec![1]]))]);
        let x = Multicomplex::new(vec![vec![1, 1, 1]], maps).unwrap();
        assert_eq!(verify_multicomplex(&x), Err(vec![RelationFailure { n: 0, p: 0, q: 2 }]));
    }

    #[test]
    fn single_column_is_the_column_complex() {
        let maps = BTreeMap::from([((0, 0, 1), m(&[vec![1], vec![-1]]))]);
        let x = Multicomplex::new(vec![vec![2, 1]], maps).unwrap();
        let a = assemble(&x).unwrap();
        assert_eq!(a.complex.boundary(1), m(&[vec![1], vec![-1]]));
    }

    #[test]
    fn shape_checked() {
        let maps = BTreeMap::from([((1, 1, 0), m(&[vec![1, 1]]))]);
        assert!(matches!(
            Multicomplex::new(vec![vec![1, 1], vec![1, 1]], maps),
            Err(Error::ShapeMismatch(_))
        ));
        let out_of_quadrant = BTreeMap::from([((0, 0, 0), IntegerMatrix::zeros(0, 1))]);
        assert!(Multicomplex::new(vec![vec![1]], out_of_quadrant).is_err());
    }

    #[test]
    fn round_trip_through_assembly() {
        let x = square();
        let a = assemble(&x).unwrap();
        let back = Multicomplex::from_assembled(x.ranks().to_vec(), &a.complex).unwrap();
        assert_eq!(assemble(&back).unwrap(), a);
    }
}
