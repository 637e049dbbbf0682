use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::matrix::{bigint_json, IntegerMatrix};
use super::snf::smith_normal_form;
use crate::error::{Error, Result};

/// Coefficient ring for homology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Coefficients {
    #[default]
    #[serde(rename = "z")]
    Integers,
    #[serde(rename = "z2")]
    Mod2,
}

impl std::str::FromStr for Coefficients {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" => Ok(Self::Integers),
            "z2" => Ok(Self::Mod2),
            other => Err(Error::Config(format!(
                "unknown coefficient ring `{other}` (expected z or z2)"
            ))),
        }
    }
}

/// Finitely generated chain complex concentrated in degrees `0..=max_degree`.
///
/// `boundary[k]` maps degree `k` to degree `k - 1` and has shape
/// `generators[k-1] x generators[k]`. Missing entries are zero maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedChainComplex {
    generators: Vec<usize>,
    boundary: BTreeMap<usize, IntegerMatrix>,
}

impl GradedChainComplex {
    /// Builds a complex, checking boundary shapes but not `∂∂ = 0`.
    pub fn new(generators: Vec<usize>, boundary: BTreeMap<usize, IntegerMatrix>) -> Result<Self> {
        for (&k, m) in &boundary {
            if k == 0 || k >= generators.len() {
                return Err(Error::ShapeMismatch(format!(
                    "boundary in degree {k} outside 1..={}",
                    generators.len().saturating_sub(1)
                )));
            }
            if m.shape() != (generators[k - 1], generators[k]) {
                return Err(Error::ShapeMismatch(format!(
                    "boundary[{k}] has shape {:?}, expected {:?}",
                    m.shape(),
                    (generators[k - 1], generators[k])
                )));
            }
        }
        Ok(Self { generators, boundary })
    }

    pub fn max_degree(&self) -> usize {
        self.generators.len().saturating_sub(1)
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// The boundary out of degree `k`, materializing zero maps where absent.
    pub fn boundary(&self, k: usize) -> IntegerMatrix {
        if let Some(m) = self.boundary.get(&k) {
            return m.clone();
        }
        let rows = if k == 0 { 0 } else { self.gens(k - 1) };
        IntegerMatrix::zeros(rows, self.gens(k))
    }

    fn gens(&self, k: usize) -> usize {
        self.generators.get(k).copied().unwrap_or(0)
    }

    /// Replaces every boundary matrix by `f(k, ∂_k)`, keeping generator counts.
    pub fn map_boundaries(&self, f: impl Fn(usize, &IntegerMatrix) -> IntegerMatrix) -> Self {
        let boundary = (1..=self.max_degree()).map(|k| (k, f(k, &self.boundary(k)))).collect();
        Self {
            generators: self.generators.clone(),
            boundary,
        }
    }
}

/// Checks `∂_{k-1} ∂_k = 0` exactly for every degree; returns the failing `k`.
pub fn verify_complex(c: &GradedChainComplex) -> std::result::Result<(), Vec<usize>> {
    let failing: Vec<usize> = (2..=c.max_degree())
        .filter(|&k| !(&c.boundary(k - 1) * &c.boundary(k)).is_zero())
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(failing)
    }
}

/// Checks `∂_{k-1} ∂_k ≡ 0` modulo two; returns the failing `k`.
pub fn verify_complex_mod2(c: &GradedChainComplex) -> std::result::Result<(), Vec<usize>> {
    let failing: Vec<usize> = (2..=c.max_degree())
        .filter(|&k| {
            let prod = &c.boundary(k - 1) * &c.boundary(k);
            let (r, cols) = prod.shape();
            (0..r).any(|i| (0..cols).any(|j| prod.get(i, j).is_odd()))
        })
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(failing)
    }
}

/// Homology in one degree: Betti rank plus torsion coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyResult {
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyResult {
    pub fn free(betti: usize) -> Self {
        Self {
            betti,
            torsion: Vec::new(),
        }
    }
}

impl Serialize for HomologyResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let torsion: Vec<_> = self.torsion.iter().map(bigint_json).collect();
        let mut st = s.serialize_struct("HomologyResult", 2)?;
        st.serialize_field("betti", &self.betti)?;
        st.serialize_field("torsion", &torsion)?;
        st.end()
    }
}

/// Betti numbers only; convenient for comparing against reference tables.
pub fn betti_numbers(h: &[HomologyResult]) -> Vec<usize> {
    h.iter().map(|r| r.betti).collect()
}

/// Homology of a chain complex over the integers or over the field of two
/// elements. Over the two-element field torsion lists are always empty.
///
/// The `∂∂ = 0` check runs over the chosen coefficients, so a matrix of
/// mod-two counts is accepted in mod-two mode.
pub fn homology(c: &GradedChainComplex, coefficients: Coefficients) -> Result<Vec<HomologyResult>> {
    match coefficients {
        Coefficients::Integers => verify_complex(c),
        Coefficients::Mod2 => verify_complex_mod2(c),
    }
    .map_err(|degrees| Error::NotAComplex { degrees })?;
    let top = c.max_degree();
    if c.generators.is_empty() {
        return Ok(Vec::new());
    }
    match coefficients {
        Coefficients::Integers => {
            let snfs: Vec<_> = (0..=top + 1)
                .map(|k| {
                    if k == 0 || k > top {
                        None
                    } else {
                        Some(smith_normal_form(&c.boundary(k)))
                    }
                })
                .collect();
            Ok((0..=top)
                .map(|k| {
                    let out_rank = snfs[k].as_ref().map_or(0, |s| s.rank());
                    let (in_rank, torsion) = snfs[k + 1]
                        .as_ref()
                        .map_or((0, Vec::new()), |s| (s.rank(), s.torsion()));
                    HomologyResult {
                        betti: c.gens(k) - out_rank - in_rank,
                        torsion,
                    }
                })
                .collect())
        }
        Coefficients::Mod2 => {
            let ranks: Vec<usize> = (0..=top + 1)
                .map(|k| {
                    if k == 0 || k > top {
                        0
                    } else {
                        c.boundary(k).rank_mod2()
                    }
                })
                .collect();
            Ok((0..=top)
                .map(|k| HomologyResult::free(c.gens(k) - ranks[k] - ranks[k + 1]))
                .collect())
        }
    }
}

/// Rank of the kernel of `∂_k` over the rationals, per degree.
pub fn kernel_ranks(c: &GradedChainComplex) -> Vec<usize> {
    (0..=c.max_degree())
        .map(|k| {
            let r = if k == 0 {
                0
            } else {
                smith_normal_form(&c.boundary(k)).rank()
            };
            c.gens(k) - r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle() -> GradedChainComplex {
        // Columns v1 - v0 and v0 - v1.
        let d1 = IntegerMatrix::from_rows(&[vec![-1, 1], vec![1, -1]]);
        GradedChainComplex::new(vec![2, 2], BTreeMap::from([(1, d1)])).unwrap()
    }

    #[test]
    fn point() {
        let c = GradedChainComplex::new(vec![1], BTreeMap::new()).unwrap();
        assert_eq!(
            homology(&c, Coefficients::Integers).unwrap(),
            vec![HomologyResult::free(1)]
        );
    }

    #[test]
    fn circle_model() {
        let c = circle();
        assert!(verify_complex(&c).is_ok());
        let h = homology(&c, Coefficients::Integers).unwrap();
        assert_eq!(h, vec![HomologyResult::free(1), HomologyResult::free(1)]);
    }

    #[test]
    fn multiplication_by_two() {
        let d2 = IntegerMatrix::from_rows(&[vec![2]]);
        let c = GradedChainComplex::new(vec![0, 1, 1], BTreeMap::from([(2, d2)])).unwrap();
        let h = homology(&c, Coefficients::Integers).unwrap();
        assert_eq!(h[1].betti, 0);
        assert_eq!(h[1].torsion, vec![BigInt::from(2)]);
        assert_eq!(h[2].betti, 0);
        let h2 = homology(&c, Coefficients::Mod2).unwrap();
        assert_eq!(betti_numbers(&h2), vec![0, 1, 1]);
    }

    #[test]
    fn mod2_check_accepts_even_products() {
        // ∂_1 ∂_2 = 2 over the integers but vanishes mod 2.
        let d1 = IntegerMatrix::from_rows(&[vec![1]]);
        let d2 = IntegerMatrix::from_rows(&[vec![2]]);
        let c = GradedChainComplex::new(vec![1, 1, 1], BTreeMap::from([(1, d1), (2, d2)])).unwrap();
        assert!(verify_complex(&c).is_err());
        assert!(verify_complex_mod2(&c).is_ok());
        assert_eq!(betti_numbers(&homology(&c, Coefficients::Mod2).unwrap()), vec![0, 0, 1]);
    }

    #[test]
    fn corrupted_sign_is_reported() {
        // Disk-like stacking: a 2-cell whose boundary is e0 + e1; with the
        // circle's d1 the composite cancels. Flipping one sign in d1 breaks it.
        let d2 = IntegerMatrix::from_rows(&[vec![1], vec![1]]);
        let good = GradedChainComplex::new(
            vec![2, 2, 1],
            BTreeMap::from([(1, circle().boundary(1)), (2, d2.clone())]),
        )
        .unwrap();
        assert!(verify_complex(&good).is_ok());
        let bad_d1 = IntegerMatrix::from_rows(&[vec![-1, 1], vec![1, 1]]);
        let bad = GradedChainComplex::new(vec![2, 2, 1], BTreeMap::from([(1, bad_d1), (2, d2)])).unwrap();
        assert_eq!(verify_complex(&bad), Err(vec![2]));
        assert_eq!(
            homology(&bad, Coefficients::Integers),
            Err(Error::NotAComplex { degrees: vec![2] })
        );
    }

    #[test]
    fn single_degree_passes() {
        let c = GradedChainComplex::new(vec![5], BTreeMap::new()).unwrap();
        assert!(verify_complex(&c).is_ok());
    }

    #[test]
    fn shape_checked() {
        let d1 = IntegerMatrix::zeros(3, 2);
        assert!(GradedChainComplex::new(vec![2, 2], BTreeMap::from([(1, d1)])).is_err());
    }

    #[test]
    fn kernel_ranks_circle() {
        assert_eq!(kernel_ranks(&circle()), vec![2, 1]);
    }

    /// Random unimodular matrix as a product of elementary operations.
    fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntegerMatrix {
        let mut m = IntegerMatrix::identity(n);
        if n < 2 {
            return m;
        }
        for &(a, b, k) in ops {
            let (a, b) = (a % n, b % n);
            if a == b {
                m.swap_rows(a, (a + 1) % n);
            } else {
                m.add_row_multiple(a, b, &BigInt::from(k));
            }
        }
        m
    }

    fn adjugate_inverse(u: &IntegerMatrix) -> IntegerMatrix {
        // Inverse of a unimodular matrix via its Smith form: U A V = I gives A^{-1} = V U.
        let s = smith_normal_form(u);
        &s.v * &s.u
    }

    proptest! {
        #[test]
        fn homology_invariant_under_basis_change(
            seed_ops in proptest::collection::vec((0usize..6, 0usize..6, -3i64..=3), 0..12),
            a_entries in proptest::collection::vec(-3i64..=3, 9),
        ) {
            let d2 = IntegerMatrix::from_i64(3, 3, &a_entries);
            let c = GradedChainComplex::new(vec![3, 3, 3], BTreeMap::from([(2, d2)])).unwrap();
            let before = homology(&c, Coefficients::Integers).unwrap();
            let p: Vec<IntegerMatrix> = (0..3).map(|k| {
                let ops: Vec<_> = seed_ops.iter().map(|&(a, b, x)| (a + k, b, x)).collect();
                unimodular(3, &ops)
            }).collect();
            let changed = c.map_boundaries(|k, m| {
                let left = adjugate_inverse(&p[k - 1]);
                &(&left * m) * &p[k]
            });
            prop_assert!(verify_complex(&changed).is_ok());
            let after = homology(&changed, Coefficients::Integers).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
