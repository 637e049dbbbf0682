use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::algebra::Multicomplex;
use crate::error::{Error, Result};
use crate::exact_algebra::IntegerMatrix;

/// JSON form of a multicomplex:
///
/// ```json
/// { "ranks": [[1, 1], [1, 1]],
///   "differentials": [ { "j": 1, "p": 1, "q": 0, "matrix": [[1]] } ] }
/// ```
///
/// `ranks[p][q]` is the rank of `X_{p,q}`; each matrix is row-major with
/// `rank(target)` rows and `rank(source)` columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MulticomplexDoc {
    pub ranks: Vec<Vec<usize>>,
    #[serde(default)]
    pub differentials: Vec<DifferentialDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferentialDoc {
    pub j: usize,
    pub p: usize,
    pub q: usize,
    pub matrix: Vec<Vec<i64>>,
}

/// Upper bound on any single rank in a document, to keep hostile input from
/// allocating huge zero matrices.
const MAX_RANK: usize = 4096;

impl MulticomplexDoc {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("multicomplex document: {e}")))
    }

    pub fn to_multicomplex(&self) -> Result<Multicomplex> {
        if self.ranks.iter().flatten().any(|&r| r > MAX_RANK) {
            return Err(Error::ShapeMismatch(format!("rank above {MAX_RANK}")));
        }
        let width = self.ranks.first().map_or(0, Vec::len);
        if self.ranks.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeMismatch("ragged rank table".into()));
        }
        let rank = |p: usize, q: usize| self.ranks.get(p).and_then(|r| r.get(q)).copied().unwrap_or(0);
        let mut maps = BTreeMap::new();
        for d in &self.differentials {
            let (Some(tp), Some(tq)) = (d.p.checked_sub(d.j), (d.q + d.j).checked_sub(1)) else {
                return Err(Error::ShapeMismatch(format!(
                    "d_{} out of ({},{}) leaves the first quadrant",
                    d.j, d.p, d.q
                )));
            };
            let rows = rank(tp, tq);
            let cols = rank(d.p, d.q);
            if d.matrix.len() != rows || d.matrix.iter().any(|r| r.len() != cols) {
                return Err(Error::ShapeMismatch(format!(
                    "d_{} at ({},{}) must be {rows}x{cols}",
                    d.j, d.p, d.q
                )));
            }
            let flat: Vec<i64> = d.matrix.iter().flatten().copied().collect();
            let m = IntegerMatrix::from_i64(rows, cols, &flat);
            if maps.insert((d.j, d.p, d.q), m).is_some() {
                return Err(Error::ShapeMismatch(format!(
                    "d_{} at ({},{}) given twice",
                    d.j, d.p, d.q
                )));
            }
        }
        Multicomplex::new(self.ranks.clone(), maps)
    }

    /// Document form of a multicomplex; `None` if an entry exceeds `i64`.
    /// Zero maps are omitted.
    pub fn from_multicomplex(x: &Multicomplex) -> Option<Self> {
        let mut differentials = Vec::new();
        for (&(j, p, q), m) in x.maps() {
            if m.is_zero() {
                continue;
            }
            differentials.push(DifferentialDoc {
                j,
                p,
                q,
                matrix: m.to_i64_rows()?,
            });
        }
        Some(Self {
            ranks: x.ranks().to_vec(),
            differentials,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicomplex::algebra::verify_multicomplex;

    #[test]
    fn parses_double_complex() {
        let text = r#"{
            "ranks": [[1, 1], [1, 1]],
            "differentials": [
                {"j": 0, "p": 0, "q": 1, "matrix": [[1]]},
                {"j": 0, "p": 1, "q": 1, "matrix": [[1]]},
                {"j": 1, "p": 1, "q": 0, "matrix": [[1]]},
                {"j": 1, "p": 1, "q": 1, "matrix": [[-1]]}
            ]
        }"#;
        let x = MulticomplexDoc::parse(text).unwrap().to_multicomplex().unwrap();
        assert_eq!(verify_multicomplex(&x), Ok(()));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_shapes() {
        assert!(MulticomplexDoc::parse(r#"{"ranks": [], "extra": 1}"#).is_err());
        let doc = MulticomplexDoc::parse(
            r#"{"ranks": [[1, 2]], "differentials": [{"j": 0, "p": 0, "q": 1, "matrix": [[1]]}]}"#,
        )
        .unwrap();
        assert!(matches!(doc.to_multicomplex(), Err(Error::ShapeMismatch(_))));
        let doc =
            MulticomplexDoc::parse(r#"{"ranks": [[1]], "differentials": [{"j": 1, "p": 0, "q": 0, "matrix": []}]}"#)
                .unwrap();
        assert!(doc.to_multicomplex().is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{"ranks": [[1, 1], [1, 1]], "differentials": [{"j": 1, "p": 1, "q": 0, "matrix": [[2]]}]}"#;
        let doc = MulticomplexDoc::parse(text).unwrap();
        let x = doc.to_multicomplex().unwrap();
        assert_eq!(MulticomplexDoc::from_multicomplex(&x), Some(doc));
    }

    #[test]
    fn zero_rank_source_uses_empty_rows() {
        let doc = MulticomplexDoc::parse(
            r#"{"ranks": [[2, 0]], "differentials": [{"j": 0, "p": 0, "q": 1, "matrix": [[], []]}]}"#,
        )
        .unwrap();
        assert!(doc.to_multicomplex().is_ok());
    }
}
