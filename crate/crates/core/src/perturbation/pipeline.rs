use serde::Serialize;

use super::perturbed::{build_h, match_expected, Auxiliary, AuxiliaryOnCircle, PerturbedLandscape};
use crate::error::{Error, Result};
use crate::exact_algebra::{betti_numbers, Coefficients, HomologyResult};
use crate::flow_engine::{detect_critical_set, CriticalSet, DetectOptions, Tolerances};
use crate::landscape::Landscape;
use crate::msw_complex::{build_msw, morse_poly_of, msw_kernel_ranks, MorseComplex};
use crate::poly_lab::{
    kernel_inequality_check, morse_bott_poly, one_plus_t, perturbed_morse_poly, poincare_poly, r_from_kernels, solve_R,
    IntPoly, SubmanifoldKernels,
};

/// One critical point of `h` matched to its prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexMatch {
    pub position: Vec<f64>,
    pub value: f64,
    /// Index read from the Hessian of `h`.
    pub index: usize,
    pub circle: Option<usize>,
    pub bott_index: usize,
    pub auxiliary_index: usize,
    pub holds: bool,
}

/// Outcome of the index relation `λ^h = λ_j + λ^j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexRelation {
    pub matches: Vec<IndexMatch>,
    /// Predicted critical points that `h` does not have.
    pub missing: Vec<Vec<f64>>,
}

impl IndexRelation {
    pub fn holds(&self) -> bool {
        self.missing.is_empty() && self.matches.iter().all(|m| m.holds)
    }
}

/// Matches every critical point of `h` to a predicted one and compares
/// indices. A critical point with no prediction is
/// [`Error::UnmatchedCritical`].
pub fn verify_index_relation(h: &PerturbedLandscape, hset: &CriticalSet, tol: &Tolerances) -> Result<IndexRelation> {
    let mut used = vec![false; h.expected.len()];
    let mut matches = Vec::new();
    for p in &hset.points {
        let i = match_expected(h, p.position.raw(), tol.capture_radius).ok_or_else(|| Error::UnmatchedCritical {
            position: p.position.coords().to_vec(),
        })?;
        used[i] = true;
        let e = &h.expected[i];
        matches.push(IndexMatch {
            position: p.position.coords().to_vec(),
            value: p.value,
            index: p.index,
            circle: e.circle(),
            bott_index: e.bott_index,
            auxiliary_index: e.auxiliary_index,
            holds: p.index == e.total_index(),
        });
    }
    if let Some(c) = hset.circles.first() {
        return Err(Error::UnmatchedCritical {
            position: c.sample_points[0].coords().to_vec(),
        });
    }
    let missing = h
        .expected
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(e, _)| e.position.coords().to_vec())
        .collect();
    Ok(IndexRelation { matches, missing })
}

/// Ranks of `C_n(h)` against `⊕_{λ_j + k = n} C_k(f_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub h_ranks: Vec<usize>,
    pub sum_ranks: Vec<usize>,
    pub failing_degree: Option<usize>,
}

pub fn chain_group_decomposition(h: &PerturbedLandscape, hset: &CriticalSet) -> Decomposition {
    let m = hset.manifold.dim();
    let h_ranks = hset.counts_by_index();
    let mut sum_ranks = vec![0; m + 1];
    for e in &h.expected {
        sum_ranks[e.total_index()] += 1;
    }
    let failing_degree = (0..=m).find(|&n| h_ranks[n] != sum_ranks[n]);
    Decomposition {
        h_ranks,
        sum_ranks,
        failing_degree,
    }
}

/// Flow-line complex data of one auxiliary function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxiliaryData {
    pub circle: Option<usize>,
    pub bott_index: usize,
    pub nu: Vec<usize>,
    pub z: Vec<usize>,
    pub morse_poly: IntPoly,
    pub r: IntPoly,
}

/// Auxiliary complexes: on each circle the flow-line complex of its
/// auxiliary function; a point submanifold contributes one generator.
pub fn auxiliary_data(
    set: &CriticalSet,
    auxiliaries: &[Auxiliary],
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<Vec<AuxiliaryData>> {
    let mut out = Vec::new();
    for (c, aux) in set.circles.iter().zip(auxiliaries) {
        let f = AuxiliaryOnCircle(*aux);
        let cset = detect_critical_set(&f, tol, opts)?;
        let cx = build_msw(&f, &cset, Coefficients::Integers, tol)?;
        let nu = cx.counts();
        let z = msw_kernel_ranks(&cx);
        out.push(AuxiliaryData {
            circle: Some(c.id),
            bott_index: c.bott_index,
            r: r_from_kernels(&nu, &z)?,
            morse_poly: morse_poly_of(&cx),
            nu,
            z,
        });
    }
    for p in &set.points {
        out.push(AuxiliaryData {
            circle: None,
            bott_index: p.index,
            nu: vec![1],
            z: vec![1],
            morse_poly: IntPoly::one(),
            r: IntPoly::zero(),
        });
    }
    Ok(out)
}

/// End-to-end report of the polynomial Morse–Bott inequalities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub landscape: String,
    pub epsilon: f64,
    pub index_relation: IndexRelation,
    pub decomposition: Decomposition,
    pub auxiliaries: Vec<AuxiliaryData>,
    /// `MB_t(f)` from the detected critical submanifolds.
    pub mb_t: IntPoly,
    /// `P_t(M)` from the homology of `h`.
    pub p_t: IntPoly,
    pub m_h: IntPoly,
    /// `Σ M_t(f_j) t^{λ_j}`; must equal `m_h`.
    pub m_h_predicted: IntPoly,
    pub r_h: IntPoly,
    /// `R(t)` from `solve_R(MB_t, P_t)`.
    pub r_solved: IntPoly,
    /// `R(t) = R_h − Σ R_j t^{λ_j}`.
    pub r_identity: IntPoly,
    pub kernel_check_failure: Option<usize>,
    pub homology: Vec<HomologyResult>,
    pub reference_betti: Vec<usize>,
    pub h_complex: MorseComplex,
}

impl PerturbationReport {
    /// Every check of the pipeline holds.
    pub fn passed(&self) -> bool {
        self.index_relation.holds()
            && self.decomposition.failing_degree.is_none()
            && self.m_h == self.m_h_predicted
            && self.r_solved == self.r_identity
            && self.kernel_check_failure.is_none()
            && betti_numbers(&self.homology) == self.reference_betti
            && self.homology.iter().all(|h| h.torsion.is_empty())
    }
}

/// `h`, its critical set and its flow-line complex.
pub struct PerturbedRun {
    pub h: PerturbedLandscape,
    pub hset: CriticalSet,
    pub complex: MorseComplex,
}

/// Detects `f`, builds `h` and its flow-line complex.
pub fn perturbed_complex(
    landscape: &Landscape,
    set: &CriticalSet,
    auxiliaries: &[Auxiliary],
    epsilon: f64,
    coefficients: Coefficients,
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<PerturbedRun> {
    let h = build_h(landscape, set, auxiliaries, epsilon, tol, opts)?;
    let hset = detect_critical_set(&h, tol, opts)?;
    let complex = build_msw(&h, &hset, coefficients, tol)?;
    Ok(PerturbedRun { h, hset, complex })
}

/// Runs the whole chain: perturbation, index relation, chain-group
/// decomposition, flow-line complex of `h`, auxiliary complexes, and both
/// routes to `R(t)`.
pub fn mb_inequalities_pipeline(
    landscape: &Landscape,
    auxiliaries: &[Auxiliary],
    epsilon: f64,
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<PerturbationReport> {
    let set = detect_critical_set(landscape, tol, opts)?;
    let run = perturbed_complex(landscape, &set, auxiliaries, epsilon, Coefficients::Integers, tol, opts)?;
    let index_relation = verify_index_relation(&run.h, &run.hset, tol)?;
    let decomposition = chain_group_decomposition(&run.h, &run.hset);
    let aux = auxiliary_data(&set, auxiliaries, tol, opts)?;

    let homology = run.complex.homology()?;
    let p_t = poincare_poly(&homology);
    let sub: Vec<(IntPoly, usize)> = aux
        .iter()
        .map(|a| {
            let p = if a.circle.is_some() {
                one_plus_t()
            } else {
                IntPoly::one()
            };
            (p, a.bott_index)
        })
        .collect();
    let mb_t = morse_bott_poly(&sub);
    let m_h = morse_poly_of(&run.complex);
    let m_h_predicted = perturbed_morse_poly(
        &aux.iter()
            .map(|a| (a.morse_poly.clone(), a.bott_index))
            .collect::<Vec<_>>(),
    );
    let z_h = msw_kernel_ranks(&run.complex);
    let r_h = r_from_kernels(&run.complex.counts(), &z_h)?;
    let shifted: IntPoly = aux.iter().map(|a| a.r.shift(a.bott_index)).sum();
    let r_identity = &r_h - &shifted;
    let r_solved = solve_R(&mb_t, &p_t)?;
    let kernels: Vec<SubmanifoldKernels> = aux
        .iter()
        .map(|a| SubmanifoldKernels {
            bott_index: a.bott_index,
            z: a.z.clone(),
        })
        .collect();
    let kernel_check_failure = kernel_inequality_check(&kernels, &z_h).err();

    Ok(PerturbationReport {
        landscape: landscape.name.clone(),
        epsilon,
        index_relation,
        decomposition,
        auxiliaries: aux,
        mb_t,
        p_t,
        m_h,
        m_h_predicted,
        r_h,
        r_solved,
        r_identity,
        kernel_check_failure,
        homology,
        reference_betti: landscape.manifold.reference_betti(),
        h_complex: run.complex,
    })
}

/// Critical table of `h` for one `ε`: positions (rounded to the predicted
/// points) and indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub matched: Vec<(usize, usize)>,
    pub stable: bool,
}

/// Builds `h` for each `ε` and checks that the matched critical points and
/// their indices agree with the first row.
pub fn stability_sweep(
    landscape: &Landscape,
    auxiliaries: &[Auxiliary],
    epsilons: &[f64],
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<Vec<SweepRow>> {
    let set = detect_critical_set(landscape, tol, opts)?;
    let mut rows: Vec<SweepRow> = Vec::new();
    for &eps in epsilons {
        let h = build_h(landscape, &set, auxiliaries, eps, tol, opts)?;
        let hset = detect_critical_set(&h, tol, opts)?;
        let rel = verify_index_relation(&h, &hset, tol)?;
        let mut matched: Vec<(usize, usize)> = hset
            .points
            .iter()
            .map(|p| {
                (
                    match_expected(&h, p.position.raw(), tol.capture_radius).unwrap_or(usize::MAX),
                    p.index,
                )
            })
            .collect();
        matched.sort_unstable();
        let stable = rel.holds() && rows.first().map_or(true, |r| r.matched == matched);
        rows.push(SweepRow {
            epsilon: eps,
            matched,
            stable,
        });
    }
    Ok(rows)
}

/// Largest `ε` in the halving sequence `start, start/2, …` (at most
/// `halvings` steps) for which `h` has exactly the predicted critical
/// points with the predicted indices.
pub fn calibrate_epsilon_max(
    landscape: &Landscape,
    auxiliaries: &[Auxiliary],
    start: f64,
    halvings: usize,
    tol: &Tolerances,
    opts: &DetectOptions,
) -> Result<Option<f64>> {
    let set = detect_critical_set(landscape, tol, opts)?;
    let mut eps = start;
    for _ in 0..=halvings {
        let ok = match build_h(landscape, &set, auxiliaries, eps, tol, opts) {
            Ok(h) => {
                let hset = detect_critical_set(&h, tol, opts)?;
                verify_index_relation(&h, &hset, tol).is_ok_and(|r| r.holds())
            }
            Err(Error::EpsilonTooLarge { .. }) => false,
            Err(e) => return Err(e),
        };
        if ok {
            return Ok(Some(eps));
        }
        eps /= 2.0;
    }
    Ok(None)
}
