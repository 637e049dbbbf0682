use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntegerMatrix;

/// Smith normal form `U·A·V = D` together with the positive diagonal entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SNFDecomposition {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
    /// Nonzero diagonal entries `d_1 | d_2 | ...`, all positive.
    pub diagonal: Vec<BigInt>,
}

impl SNFDecomposition {
    /// Rank over the rationals: the number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Diagonal entries greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        let one = BigInt::from(1);
        self.diagonal.iter().filter(|d| **d > one).cloned().collect()
    }
}

struct Work {
    d: IntegerMatrix,
    u: IntegerMatrix,
    v: IntegerMatrix,
}

impl Work {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap_rows(a, b);
        self.u.swap_rows(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.d.swap_cols(a, b);
        self.v.swap_cols(a, b);
    }

    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.d.add_row_multiple(dst, src, k);
        self.u.add_row_multiple(dst, src, k);
    }

    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.d.add_col_multiple(dst, src, k);
        self.v.add_col_multiple(dst, src, k);
    }

    /// Smallest nonzero absolute value in the trailing block, ties broken by
    /// row-major position.
    fn pivot_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(BigInt, usize, usize)> = None;
        for r in t..self.d.rows() {
            for c in t..self.d.cols() {
                let e = self.d.get(r, c);
                if e.is_zero() {
                    continue;
                }
                let a = e.abs();
                if best.as_ref().map_or(true, |(b, _, _)| a < *b) {
                    best = Some((a, r, c));
                }
            }
        }
        best.map(|(_, r, c)| (r, c))
    }

    /// Clears row `t` and column `t` outside the pivot. Returns `false` if a
    /// nonzero remainder was left behind and the pivot must be re-chosen.
    fn eliminate(&mut self, t: usize) -> bool {
        let p = self.d.get(t, t).clone();
        let mut clean = true;
        for r in t + 1..self.d.rows() {
            let e = self.d.get(r, t).clone();
            if e.is_zero() {
                continue;
            }
            let q = e.div_floor(&p);
            self.add_row(r, t, &-q);
            if !self.d.get(r, t).is_zero() {
                clean = false;
            }
        }
        for c in t + 1..self.d.cols() {
            let e = self.d.get(t, c).clone();
            if e.is_zero() {
                continue;
            }
            let q = e.div_floor(&p);
            self.add_col(c, t, &-q);
            if !self.d.get(t, c).is_zero() {
                clean = false;
            }
        }
        clean
    }

    fn first_nondivisible(&self, t: usize) -> Option<usize> {
        let p = self.d.get(t, t);
        for r in t + 1..self.d.rows() {
            for c in t + 1..self.d.cols() {
                if !self.d.get(r, c).mod_floor(p).is_zero() {
                    return Some(r);
                }
            }
        }
        None
    }
}

/// Deterministic Smith normal form over the integers.
///
/// Pivot rule: the smallest nonzero absolute value in the remaining block,
/// ties broken by row-major position. When the pivot fails to divide some
/// entry of the remaining block, that entry's row is added to the pivot row
/// and the step is repeated.
pub fn smith_normal_form(a: &IntegerMatrix) -> SNFDecomposition {
    let (m, n) = a.shape();
    let mut w = Work {
        d: a.clone(),
        u: IntegerMatrix::identity(m),
        v: IntegerMatrix::identity(n),
    };
    let mut diagonal = Vec::new();
    for t in 0..m.min(n) {
        let Some((r, c)) = w.pivot_in_block(t) else {
            break;
        };
        w.swap_rows(t, r);
        w.swap_cols(t, c);
        loop {
            if !w.eliminate(t) {
                // A remainder smaller than the pivot survived; move it to (t, t).
                let (r, c) = w.pivot_in_block(t).expect("nonzero remainder exists");
                w.swap_rows(t, r);
                w.swap_cols(t, c);
                continue;
            }
            match w.first_nondivisible(t) {
                Some(r) => {
                    let one = BigInt::from(1);
                    w.add_row(t, r, &one);
                }
                None => break,
            }
        }
        if w.d.get(t, t).is_negative() {
            w.d.negate_row(t);
            w.u.negate_row(t);
        }
        diagonal.push(w.d.get(t, t).clone());
    }
    SNFDecomposition {
        u: w.u,
        d: w.d,
        v: w.v,
        diagonal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn check(a: &IntegerMatrix) -> SNFDecomposition {
        let s = smith_normal_form(a);
        assert_eq!(&(&s.u * a) * &s.v, s.d, "U*A*V != D for {a:?}");
        let du = s.u.determinant().unwrap();
        let dv = s.v.determinant().unwrap();
        assert!(du.abs().is_one(), "U not unimodular");
        assert!(dv.abs().is_one(), "V not unimodular");
        let (m, n) = a.shape();
        for r in 0..m {
            for c in 0..n {
                let e = s.d.get(r, c);
                if r == c && r < s.diagonal.len() {
                    assert_eq!(e, &s.diagonal[r]);
                    assert!(e.is_positive());
                } else {
                    assert!(e.is_zero(), "off-diagonal or trailing entry nonzero");
                }
            }
        }
        for w in s.diagonal.windows(2) {
            assert!(w[1].mod_floor(&w[0]).is_zero(), "divisibility chain broken");
        }
        s
    }

    #[test]
    fn identity_is_fixed() {
        let i = IntegerMatrix::identity(3);
        let s = check(&i);
        assert_eq!(s.d, i);
        assert_eq!(s.u, i);
        assert_eq!(s.v, i);
    }

    #[test]
    fn two_by_two_example() {
        // gcd of entries is 2 and |det| = 8, so the diagonal is (2, 4).
        let a = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let s = check(&a);
        assert_eq!(s.diagonal, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn zero_matrix() {
        let z = IntegerMatrix::zeros(2, 3);
        let s = check(&z);
        assert_eq!(s.d, z);
        assert!(s.diagonal.is_empty());
    }

    #[test]
    fn empty_shapes() {
        check(&IntegerMatrix::zeros(0, 4));
        check(&IntegerMatrix::zeros(3, 0));
        check(&IntegerMatrix::zeros(0, 0));
    }

    #[test]
    fn needs_divisibility_fix() {
        // diag(2, 3) has invariant factors (1, 6).
        let a = IntegerMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let s = check(&a);
        assert_eq!(s.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn deterministic() {
        let a = IntegerMatrix::from_rows(&[vec![3, -7, 2], vec![5, 1, -4], vec![0, 6, 9]]);
        assert_eq!(smith_normal_form(&a), smith_normal_form(&a));
    }

    fn small_matrix() -> impl Strategy<Value = IntegerMatrix> {
        (0usize..=6, 0usize..=6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-9i64..=9, r * c).prop_map(move |v| IntegerMatrix::from_i64(r, c, &v))
        })
    }

    proptest! {
        #[test]
        fn snf_invariants(a in small_matrix()) {
            check(&a);
        }

        #[test]
        fn two_rank_routes_agree(a in small_matrix()) {
            prop_assert_eq!(smith_normal_form(&a).rank(), a.rank_fraction_free());
        }

        #[test]
        fn product_of_diagonal_is_abs_det(v in proptest::collection::vec(-9i64..=9, 16)) {
            let a = IntegerMatrix::from_i64(4, 4, &v);
            let s = smith_normal_form(&a);
            let det = a.determinant().unwrap().abs();
            if s.rank() == 4 {
                let prod = s.diagonal.iter().fold(BigInt::one(), |acc, d| acc * d);
                prop_assert_eq!(prod, det);
            } else {
                prop_assert!(det.is_zero());
            }
        }
    }
}
