use std::collections::BTreeMap;

use serde::Serialize;

use super::search::{find_cascades, CascadeModuli, CascadeSetup};
use crate::error::{Error, Result};
use crate::exact_algebra::{betti_numbers, homology, Coefficients, GradedChainComplex, HomologyResult, IntegerMatrix};
use crate::flow_engine::{
    count_connections, detect_critical_set, hausdorff_distance, CriticalSet, DetectOptions, ElementId, FlowLine,
    IMAGE_SPACING,
};
use crate::perturbation::{build_h, perturbed_complex};

/// Pieces allowed per cascade when enumerating moduli spaces.
pub const DEFAULT_N_MAX: usize = 2;

/// Nearest and second-nearest cascade of one flow line of `h`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineMatch {
    pub line: usize,
    pub cascade: usize,
    pub nearest: f64,
    pub second: Option<f64>,
    pub sign: i64,
}

/// One total-index-adjacent pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCorrespondence {
    pub from: usize,
    pub to: usize,
    pub cascades: usize,
    pub flow_lines: usize,
    pub matches: Vec<LineMatch>,
    pub boundary_cascade: i64,
    pub boundary_h: i64,
}

/// A generator with its total index and the critical point of `h` at it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorInfo {
    pub id: usize,
    pub element: ElementId,
    pub position: Vec<f64>,
    pub total_index: usize,
    pub h_point: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub landscape: String,
    pub epsilon: f64,
    pub generators: Vec<GeneratorInfo>,
    pub pairs: Vec<PairCorrespondence>,
    /// Ordered like the flow-line complex of `h`.
    pub cascade_complex: GradedChainComplex,
    pub boundary_relation_holds: bool,
    pub homology_cascade: Vec<HomologyResult>,
    pub homology_h: Vec<HomologyResult>,
    pub reference_betti: Vec<usize>,
    pub moduli: Vec<CascadeModuli>,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.boundary_relation_holds
            && self.pairs.iter().all(|p| p.cascades == p.flow_lines)
            && betti_numbers(&self.homology_cascade) == self.reference_betti
            && betti_numbers(&self.homology_h) == self.reference_betti
            && self.homology_cascade == self.homology_h
    }
}

/// Point of `hset` at the position of each generator.
fn locate_generators(setup: &CascadeSetup, hset: &CriticalSet) -> Result<Vec<usize>> {
    let m = setup.landscape.manifold;
    setup
        .generators
        .iter()
        .map(|g| {
            hset.points
                .iter()
                .find(|p| m.distance(p.position.raw(), g.position.raw()) < setup.tol.capture_radius)
                .map(|p| p.id)
                .ok_or_else(|| {
                    Error::BijectionFailure(format!("no critical point of h at generator {:?}", g.position.coords()))
                })
        })
        .collect()
}

/// Matches each flow line to its nearest cascade. The matching must be
/// injective, every nearest distance below `haus_tol`, and every
/// second-nearest distance at least twice the nearest.
fn match_lines(setup: &CascadeSetup, lines: &[FlowLine], moduli: &CascadeModuli) -> Result<Vec<LineMatch>> {
    let mut out = Vec::new();
    let mut used = vec![false; moduli.len()];
    for (i, l) in lines.iter().enumerate() {
        let img = l.trajectory.image(IMAGE_SPACING);
        let mut d: Vec<(usize, f64)> = moduli
            .cascades
            .iter()
            .enumerate()
            .map(|(k, c)| Ok((k, hausdorff_distance(&img, &c.image)?)))
            .collect::<Result<_>>()?;
        d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some(&(k, nearest)) = d.first() else {
            return Err(Error::BijectionFailure(format!("flow line {i} has no cascade")));
        };
        let second = d.get(1).map(|x| x.1);
        if nearest >= setup.tol.haus_tol {
            return Err(Error::BijectionFailure(format!(
                "flow line {i} is {nearest:.3e} from the nearest cascade"
            )));
        }
        if let Some(s) = second {
            if s < 2.0 * nearest {
                return Err(Error::BijectionFailure(format!(
                    "flow line {i} is ambiguous: nearest {nearest:.3e}, second {s:.3e}"
                )));
            }
        }
        if used[k] {
            return Err(Error::BijectionFailure(format!("cascade {k} matched twice")));
        }
        used[k] = true;
        out.push(LineMatch {
            line: i,
            cascade: k,
            nearest,
            second,
            sign: l.sign,
        });
    }
    Ok(out)
}

/// Compares the cascade moduli spaces with the flow lines of
/// `h = f + ε Σ ρ_j f_j` for every pair of total-index-adjacent generators.
/// Counts must agree, each flow line must match a distinct cascade, and the
/// orientation of a flow line is transported to its cascade with the sign
/// that makes the cascade boundary `−∂^h`.
pub fn correspondence_check(setup: &CascadeSetup, epsilon: f64, opts: &DetectOptions) -> Result<CorrespondenceReport> {
    let run = perturbed_complex(
        &setup.landscape,
        &setup.set,
        &setup.auxiliaries,
        epsilon,
        Coefficients::Integers,
        &setup.tol,
        opts,
    )?;
    let h_of = locate_generators(setup, &run.hset)?;
    let gen_of: BTreeMap<usize, usize> = h_of.iter().enumerate().map(|(g, &h)| (h, g)).collect();

    let mut pairs = Vec::new();
    let mut moduli = Vec::new();
    let mut signs = BTreeMap::new();
    for (q, p) in setup.adjacent_pairs() {
        let mut mc = find_cascades(setup, q, p, DEFAULT_N_MAX)?;
        let lines = run
            .complex
            .connections
            .get(&(h_of[q], h_of[p]))
            .map(|c| c.lines.clone())
            .unwrap_or_default();
        if lines.len() != mc.len() {
            return Err(Error::BijectionFailure(format!(
                "generators {q} -> {p}: {} cascades but {} flow lines of h",
                mc.len(),
                lines.len()
            )));
        }
        let matches = match_lines(setup, &lines, &mc)?;
        for m in &matches {
            mc.cascades[m.cascade].sign = Some(-m.sign);
        }
        let boundary_cascade = mc.signed_count().unwrap_or(0);
        let boundary_h: i64 = lines.iter().map(|l| l.sign).sum();
        signs.insert((q, p), boundary_cascade);
        pairs.push(PairCorrespondence {
            from: q,
            to: p,
            cascades: mc.len(),
            flow_lines: lines.len(),
            matches,
            boundary_cascade,
            boundary_h,
        });
        moduli.push(mc);
    }

    // The cascade complex on the generator order of the complex of h.
    let gens: Vec<Vec<usize>> = run
        .complex
        .generators
        .iter()
        .map(|ids| ids.iter().map(|h| gen_of[h]).collect())
        .collect();
    let mut boundary = BTreeMap::new();
    let mut relation = true;
    for k in 1..gens.len() {
        let dh = run.complex.complex.boundary(k);
        let mut d = IntegerMatrix::zeros(gens[k - 1].len(), gens[k].len());
        for (col, &q) in gens[k].iter().enumerate() {
            for (row, &p) in gens[k - 1].iter().enumerate() {
                let v = signs.get(&(q, p)).copied().unwrap_or(0);
                d.set(row, col, v.into());
                relation &= dh.get(row, col) == &num_bigint::BigInt::from(-v);
            }
        }
        boundary.insert(k, d);
    }
    let cascade_complex = GradedChainComplex::new(gens.iter().map(Vec::len).collect(), boundary)?;
    let homology_cascade = homology(&cascade_complex, Coefficients::Integers)?;
    let homology_h = run.complex.homology()?;
    Ok(CorrespondenceReport {
        landscape: setup.landscape.name.clone(),
        epsilon,
        generators: setup
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| GeneratorInfo {
                id: i,
                element: g.element,
                position: g.position.coords().to_vec(),
                total_index: g.total_index(),
                h_point: h_of[i],
            })
            .collect(),
        pairs,
        cascade_complex,
        boundary_relation_holds: relation,
        homology_cascade,
        homology_h,
        reference_betti: setup.landscape.manifold.reference_betti(),
        moduli,
    })
}

/// One perturbation size of an ε-sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSweepRow {
    pub epsilon: f64,
    pub count: usize,
    /// Hausdorff distance from each flow line of `h` to the nearest cascade.
    pub distances: Vec<f64>,
    pub max_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSweepReport {
    pub from: usize,
    pub to: usize,
    pub cascades: usize,
    pub rows: Vec<EpsilonSweepRow>,
    /// Distances never grow by more than the tolerance as ε shrinks.
    pub nonincreasing: bool,
    pub final_distance: f64,
    pub passed: bool,
}

/// Slack allowed when checking that distances do not grow along the sweep.
pub const SWEEP_SLACK: f64 = 1e-3;

/// Counts the flow lines of `h_ε` from `q` to `p` for each `ε` (descending)
/// and measures their Hausdorff distance to the cascades. Counts that
/// change along the sweep are [`Error::CountDrift`].
pub fn epsilon_sweep(
    setup: &CascadeSetup,
    q: usize,
    p: usize,
    epsilons: &[f64],
    opts: &DetectOptions,
) -> Result<EpsilonSweepReport> {
    if epsilons.is_empty() {
        return Err(Error::Config("epsilon sweep needs at least one value".into()));
    }
    if setup.total_index(q) != setup.total_index(p) + 1 {
        return Err(Error::RelativeIndexNotOne(
            setup.total_index(q) as i64 - setup.total_index(p) as i64,
        ));
    }
    let mc = find_cascades(setup, q, p, DEFAULT_N_MAX)?;
    let mut rows = Vec::new();
    for &eps in epsilons {
        let h = build_h(&setup.landscape, &setup.set, &setup.auxiliaries, eps, &setup.tol, opts)?;
        let hset = detect_critical_set(&h, &setup.tol, opts)?;
        let ids = locate_generators(setup, &hset)?;
        let conn = count_connections(&h, &hset, ids[q], ids[p], &setup.tol)?;
        let mut distances = Vec::new();
        for l in &conn.lines {
            let img = l.trajectory.image(IMAGE_SPACING);
            let mut best = f64::INFINITY;
            for c in &mc.cascades {
                best = best.min(hausdorff_distance(&img, &c.image)?);
            }
            distances.push(best);
        }
        rows.push(EpsilonSweepRow {
            epsilon: eps,
            count: conn.unsigned,
            max_distance: distances.iter().copied().fold(0.0, f64::max),
            distances,
        });
    }
    let counts: Vec<usize> = rows.iter().map(|r| r.count).collect();
    if counts.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::CountDrift { counts });
    }
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].max_distance <= w[0].max_distance + SWEEP_SLACK);
    let final_distance = rows.last().expect("nonempty sweep").max_distance;
    Ok(EpsilonSweepReport {
        from: q,
        to: p,
        cascades: mc.len(),
        passed: nonincreasing && final_distance < setup.tol.haus_tol && counts[0] == mc.len(),
        rows,
        nonincreasing,
        final_distance,
    })
}
