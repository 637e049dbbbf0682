use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Dense integer matrix with arbitrary-precision entries, stored row-major.
///
/// The 0×n and n×0 shapes are valid and behave as the zero map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from row-major `i64` entries.
    ///
    /// Panics if `entries.len() != rows * cols`.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        Self {
            rows,
            cols,
            data: entries.iter().map(|&e| BigInt::from(e)).collect(),
        }
    }

    /// Builds a matrix from a list of rows. All rows must have the same length;
    /// an empty list gives the 0×0 matrix.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let flat: Vec<i64> = rows.iter().flatten().copied().collect();
        Self::from_i64(rows.len(), cols, &flat)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.data[r * self.cols + c] = value;
    }

    pub fn add_to(&mut self, r: usize, c: usize, value: &BigInt) {
        self.data[r * self.cols + c] += value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| -e).collect(),
        }
    }

    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn checked_add(&self, rhs: &Self) -> Option<Self> {
        if self.shape() != rhs.shape() {
            return None;
        }
        Some(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Row-major entries converted to `i64`, or `None` if any entry overflows.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).to_i64()).collect())
            .collect()
    }

    /// Copy of the block `rows r0..r0+nr`, `cols c0..c0+nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let mut b = Self::zeros(nr, nc);
        for r in 0..nr {
            for c in 0..nc {
                b.data[r * nc + c] = self.get(r0 + r, c0 + c).clone();
            }
        }
        b
    }

    /// Writes `src` into this matrix with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) {
        for r in 0..src.rows {
            for c in 0..src.cols {
                self.set(r0 + r, c0 + c, src.get(r, c).clone());
            }
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.data[src * self.cols + c] * factor;
            self.data[dst * self.cols + c] += v;
        }
    }

    /// col[dst] += factor * col[src]
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = &self.data[r * self.cols + src] * factor;
            self.data[r * self.cols + dst] += v;
        }
    }

    pub(crate) fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -&self.data[r * self.cols + c];
            self.data[r * self.cols + c] = v;
        }
    }

    /// Rank over the rationals by fraction-free (Bareiss) elimination.
    pub fn rank_fraction_free(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut prev = BigInt::one();
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(piv) = (rank..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(rank, piv);
            let p = m.get(rank, col).clone();
            for r in rank + 1..m.rows {
                let a = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = (&p * m.get(r, c) - &a * m.get(rank, c)).div_floor(&prev);
                    m.set(r, c, v);
                }
            }
            prev = p;
            rank += 1;
        }
        rank
    }

    /// Exact determinant by Bareiss elimination. `None` for non-square input.
    pub fn determinant(&self) -> Option<BigInt> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !m.get(r, k).is_zero()) {
                    Some(r) => {
                        m.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return Some(BigInt::zero()),
                }
            }
            let p = m.get(k, k).clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&p * m.get(i, j) - m.get(i, k) * m.get(k, j)).div_floor(&prev);
                    m.set(i, j, v);
                }
            }
            prev = p;
        }
        Some(sign * m.get(n - 1, n - 1).clone())
    }

    /// Rank over the two-element field.
    pub fn rank_mod2(&self) -> usize {
        let two = BigInt::from(2);
        let mut bits: Vec<Vec<bool>> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| !self.get(r, c).mod_floor(&two).is_zero())
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(piv) = (rank..self.rows).find(|&r| bits[r][col]) else {
                continue;
            };
            bits.swap(rank, piv);
            let pivot_row = bits[rank].clone();
            for (r, row) in bits.iter_mut().enumerate() {
                if r != rank && row[col] {
                    for (x, &p) in row.iter_mut().zip(&pivot_row) {
                        *x ^= p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

impl Mul for &IntegerMatrix {
    type Output = IntegerMatrix;

    fn mul(self, rhs: &IntegerMatrix) -> IntegerMatrix {
        self.checked_mul(rhs).expect("matrix shapes do not compose")
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}

/// Row-major serialization with explicit shape. Entries that fit in `i64`
/// become JSON numbers, larger ones are written as decimal strings.
impl Serialize for IntegerMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Vec<serde_json::Value>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| bigint_json(self.get(r, c))).collect())
            .collect();
        let mut s = serializer.serialize_struct("IntegerMatrix", 2)?;
        s.serialize_field("shape", &[self.rows, self.cols])?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

pub(crate) fn bigint_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(x) => serde_json::Value::from(x),
        None => serde_json::Value::from(v.to_string()),
    }
}

/// Largest absolute entry, used by tests and diagnostics.
pub fn max_abs_entry(m: &IntegerMatrix) -> BigInt {
    m.data.iter().map(|e| e.abs()).max().unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_shapes_multiply() {
        let a = IntegerMatrix::zeros(0, 3);
        let b = IntegerMatrix::zeros(3, 2);
        let c = &a * &b;
        assert_eq!(c.shape(), (0, 2));
        let d = IntegerMatrix::zeros(2, 0);
        let e = IntegerMatrix::zeros(0, 4);
        let f = &d * &e;
        assert_eq!(f.shape(), (2, 4));
        assert!(f.is_zero());
    }

    #[test]
    fn determinant_small() {
        let m = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        assert_eq!(m.determinant().unwrap(), BigInt::from(-8));
        let m = IntegerMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]);
        assert_eq!(m.determinant().unwrap(), BigInt::from(-1));
        assert_eq!(IntegerMatrix::zeros(0, 0).determinant().unwrap(), BigInt::one());
    }

    #[test]
    fn ranks() {
        let m = IntegerMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank_fraction_free(), 2);
        let m2 = IntegerMatrix::from_rows(&[vec![2, 0], vec![0, 2]]);
        assert_eq!(m2.rank_fraction_free(), 2);
        assert_eq!(m2.rank_mod2(), 0);
        let m3 = IntegerMatrix::from_rows(&[vec![1, 1], vec![1, -1]]);
        assert_eq!(m3.rank_mod2(), 1);
    }

    #[test]
    fn serializes_row_major_with_shape() {
        let m = IntegerMatrix::from_rows(&[vec![1, -2], vec![0, 3]]);
        let j = serde_json::to_string(&m).unwrap();
        assert_eq!(j, r#"{"shape":[2,2],"entries":[[1,-2],[0,3]]}"#);
    }
}
