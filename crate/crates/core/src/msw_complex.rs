//! The Morse–Smale–Witten chain complex of a Morse function: generators are
//! critical points graded by index, and the boundary counts flow lines
//! between points of relative index one.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_algebra::{homology, kernel_ranks, Coefficients, GradedChainComplex, HomologyResult, IntegerMatrix};
use crate::flow_engine::{all_connections, ConnectionCount, CriticalSet, Tolerances};
use crate::landscape::SmoothFunction;
use crate::poly_lab::{morse_poly, IntPoly};

/// Generators, boundary matrices and the underlying flow counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseComplex {
    pub coefficients: Coefficients,
    /// Critical point ids per index, in canonical order.
    pub generators: Vec<Vec<usize>>,
    pub complex: GradedChainComplex,
    #[serde(skip)]
    pub connections: BTreeMap<(usize, usize), ConnectionCount>,
}

impl MorseComplex {
    /// `ν_k` per index.
    pub fn counts(&self) -> Vec<usize> {
        self.generators.iter().map(Vec::len).collect()
    }

    pub fn homology(&self) -> Result<Vec<HomologyResult>> {
        homology(&self.complex, self.coefficients)
    }
}

/// Assembles the complex from counted connections. `∂_k` has the signed
/// count (or the count mod 2) from column `p` of index `k` to row `q` of
/// index `k − 1`.
pub fn assemble_msw(
    set: &CriticalSet,
    connections: BTreeMap<(usize, usize), ConnectionCount>,
    coefficients: Coefficients,
) -> Result<MorseComplex> {
    let m = set.manifold.dim();
    let mut generators = vec![Vec::new(); m + 1];
    for p in &set.points {
        generators[p.index].push(p.id);
    }
    let mut boundary = BTreeMap::new();
    for k in 1..=m {
        let mut d = IntegerMatrix::zeros(generators[k - 1].len(), generators[k].len());
        for (col, &p) in generators[k].iter().enumerate() {
            for (row, &q) in generators[k - 1].iter().enumerate() {
                if let Some(c) = connections.get(&(p, q)) {
                    let v = match coefficients {
                        Coefficients::Integers => c.signed,
                        Coefficients::Mod2 => c.mod2 as i64,
                    };
                    d.set(row, col, v.into());
                }
            }
        }
        boundary.insert(k, d);
    }
    let complex = GradedChainComplex::new(generators.iter().map(Vec::len).collect(), boundary)?;
    let check = match coefficients {
        Coefficients::Integers => crate::exact_algebra::verify_complex(&complex),
        Coefficients::Mod2 => crate::exact_algebra::verify_complex_mod2(&complex),
    };
    check.map_err(|degrees| Error::NotAComplex { degrees })?;
    Ok(MorseComplex {
        coefficients,
        generators,
        complex,
        connections,
    })
}

/// Counts every relative-index-one connection of a Morse function and
/// assembles its complex.
pub fn build_msw(
    f: &dyn SmoothFunction,
    set: &CriticalSet,
    coefficients: Coefficients,
    tol: &Tolerances,
) -> Result<MorseComplex> {
    if !set.is_morse() {
        return Err(Error::DimensionUnsupported(
            "critical set contains circles; perturb first".into(),
        ));
    }
    let connections = all_connections(f, set, tol)?;
    assemble_msw(set, connections, coefficients)
}

/// `M_t(f) = Σ ν_k t^k`.
pub fn morse_poly_of(c: &MorseComplex) -> IntPoly {
    morse_poly(&c.counts())
}

/// Kernel ranks of the boundary over the rationals, per index.
pub fn msw_kernel_ranks(c: &MorseComplex) -> Vec<usize> {
    kernel_ranks(&c.complex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::betti_numbers;
    use crate::flow_engine::{detect_critical_set, DetectOptions};
    use crate::landscape::lookup;
    use crate::poly_lab::{poincare_poly, solve_R};

    fn msw(name: &str, coeffs: Coefficients) -> MorseComplex {
        let l = lookup(name).unwrap();
        let tol = Tolerances::default();
        let set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        build_msw(&l, &set, coeffs, &tol).unwrap()
    }

    #[test]
    fn circle() {
        let c = msw("circle_cos", Coefficients::Integers);
        assert_eq!(c.counts(), vec![1, 1]);
        assert!(c.complex.boundary(1).is_zero());
        assert_eq!(betti_numbers(&c.homology().unwrap()), vec![1, 1]);
        assert_eq!(morse_poly_of(&c), IntPoly::new(vec![1, 1]));
        assert_eq!(msw_kernel_ranks(&c), vec![1, 1]);
    }

    #[test]
    fn tilted_torus() {
        let c = msw("torus_tilted", Coefficients::Integers);
        assert_eq!(c.counts(), vec![1, 2, 1]);
        let h = c.homology().unwrap();
        assert_eq!(betti_numbers(&h), vec![1, 2, 1]);
        assert!(h.iter().all(|r| r.torsion.is_empty()));
        assert_eq!(msw_kernel_ranks(&c), vec![1, 2, 1]);
        assert_eq!(morse_poly_of(&c), IntPoly::new(vec![1, 2, 1]));
    }

    #[test]
    fn dented_sphere() {
        let c = msw("sphere_dented", Coefficients::Integers);
        assert_eq!(morse_poly_of(&c), IntPoly::new(vec![1, 1, 2]));
        assert_eq!(msw_kernel_ranks(&c), vec![1, 1, 1]);
        let h = c.homology().unwrap();
        assert_eq!(betti_numbers(&h), vec![1, 0, 1]);
        assert_eq!(
            solve_R(&morse_poly_of(&c), &poincare_poly(&h)).unwrap(),
            IntPoly::monomial(1)
        );
    }

    #[test]
    fn mod2_matches_integer_betti() {
        for name in ["circle_cos", "torus_tilted", "sphere_height", "sphere_dented"] {
            let z = msw(name, Coefficients::Integers).homology().unwrap();
            let z2 = msw(name, Coefficients::Mod2).homology().unwrap();
            assert_eq!(betti_numbers(&z), betti_numbers(&z2), "{name}");
        }
    }

    #[test]
    fn morse_bott_input_rejected() {
        let l = lookup("sphere_zsq").unwrap();
        let tol = Tolerances::default();
        let set = detect_critical_set(&l, &tol, &DetectOptions::default()).unwrap();
        assert!(matches!(
            build_msw(&l, &set, Coefficients::Integers, &tol),
            Err(Error::DimensionUnsupported(_))
        ));
    }
}
