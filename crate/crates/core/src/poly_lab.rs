//! Integer polynomials in one variable `t` and the polynomial Morse and
//! Morse–Bott inequality machinery built on them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_algebra::HomologyResult;

/// Polynomial with integer coefficients, lowest power first.
///
/// Trailing zeros are always trimmed, so the zero polynomial has no
/// coefficients and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(vec![1])
    }

    /// `t^k`
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficient of `t^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> i64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: i64) -> i64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * t + c)
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0)
    }
}

impl From<Vec<i64>> for IntPoly {
    fn from(v: Vec<i64>) -> Self {
        Self::new(v)
    }
}

impl From<IntPoly> for Vec<i64> {
    fn from(p: IntPoly) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.unsigned_abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1 {
                        write!(f, "{a}")?;
                    }
                    write!(f, "t")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut c = vec![0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        IntPoly::new(c)
    }
}

impl std::iter::Sum for IntPoly {
    fn sum<I: Iterator<Item = IntPoly>>(iter: I) -> Self {
        iter.fold(IntPoly::zero(), |acc, p| &acc + &p)
    }
}

/// `1 + t`
pub fn one_plus_t() -> IntPoly {
    IntPoly::new(vec![1, 1])
}

/// Poincaré polynomial: Betti numbers as coefficients, torsion ignored.
pub fn poincare_poly(h: &[HomologyResult]) -> IntPoly {
    IntPoly::new(h.iter().map(|r| r.betti as i64).collect())
}

/// Morse polynomial `Σ ν_k t^k` from critical point counts by index.
pub fn morse_poly(nu: &[usize]) -> IntPoly {
    IntPoly::new(nu.iter().map(|&n| n as i64).collect())
}

/// Morse–Bott polynomial `Σ P_t(C_j) t^{λ_j}`.
pub fn morse_bott_poly(submanifolds: &[(IntPoly, usize)]) -> IntPoly {
    submanifolds.iter().map(|(p, lambda)| p.shift(*lambda)).sum()
}

/// `M_t(h) = Σ M_t(f_j) t^{λ_j}` for the perturbed function.
pub fn perturbed_morse_poly(per_submanifold: &[(IntPoly, usize)]) -> IntPoly {
    morse_bott_poly(per_submanifold)
}

/// Exact division by `1 + t`: returns `q` with `p = (1+t) q`.
pub fn divide_by_one_plus_t(p: &IntPoly) -> Result<IntPoly> {
    let at_minus_one = p.eval(-1);
    if at_minus_one != 0 {
        return Err(Error::NotDivisible {
            value_at_minus_one: at_minus_one,
        });
    }
    let Some(deg) = p.degree() else {
        return Ok(IntPoly::zero());
    };
    // p_k = q_k + q_{k-1}
    let mut q = vec![0; deg];
    let mut prev = 0;
    for (k, slot) in q.iter_mut().enumerate() {
        *slot = p.coeff(k) - prev;
        prev = *slot;
    }
    Ok(IntPoly::new(q))
}

/// Solves `M = P + (1+t) R` for `R` and checks that `R` has nonnegative
/// coefficients.
#[allow(non_snake_case)]
pub fn solve_R(m: &IntPoly, p: &IntPoly) -> Result<IntPoly> {
    let r = divide_by_one_plus_t(&(m - p))?;
    if let Some((power, &value)) = r.coeffs.iter().enumerate().find(|(_, &c)| c < 0) {
        return Err(Error::NegativeCoefficient { power, value });
    }
    Ok(r)
}

/// `R_j(t) = Σ_{k≥1} (ν_k − z_k) t^{k−1}` from critical counts and kernel
/// ranks of the boundary maps.
pub fn r_from_kernels(nu: &[usize], z: &[usize]) -> Result<IntPoly> {
    let mut c = Vec::new();
    for k in 0..nu.len().max(z.len()) {
        let n = nu.get(k).copied().unwrap_or(0);
        let zk = z.get(k).copied().unwrap_or(0);
        if zk > n {
            return Err(Error::InvalidKernelRank {
                degree: k,
                z: zk,
                nu: n,
            });
        }
        if k >= 1 {
            c.push((n - zk) as i64);
        }
    }
    Ok(IntPoly::new(c))
}

/// Kernel ranks of one critical submanifold's auxiliary complex, shifted by
/// its Bott index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmanifoldKernels {
    pub bott_index: usize,
    pub z: Vec<usize>,
}

/// Checks `Σ_{λ_j + k = n} z_k^j ≥ z_n^h` for `n = 1..`; returns the first
/// failing `n`.
pub fn kernel_inequality_check(z_sub: &[SubmanifoldKernels], z_h: &[usize]) -> std::result::Result<(), usize> {
    for (n, &zh) in z_h.iter().enumerate().skip(1) {
        let lhs: usize = z_sub
            .iter()
            .filter(|s| s.bott_index <= n)
            .map(|s| s.z.get(n - s.bott_index).copied().unwrap_or(0))
            .sum();
        if lhs < zh {
            return Err(n);
        }
    }
    Ok(())
}
