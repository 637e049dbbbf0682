use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng;

use super::algebra::Multicomplex;
use crate::exact_algebra::{smith_normal_form, GradedChainComplex, IntegerMatrix};

/// Random valid multicomplex with total degree at most `max_total_degree`.
///
/// Built as a direct sum of single generators and two-generator pieces
/// `x ↦ y` under one `d_j`, then conjugated in every total degree by a random
/// filtration-preserving unimodular change of basis. Conjugation keeps
/// `∂∂ = 0` and the filtration, so the components of the result form a
/// multicomplex whose maps are generally nonzero for several `j` at once.
pub fn random_multicomplex<R: Rng>(rng: &mut R, max_total_degree: usize) -> Multicomplex {
    let p_len = rng.gen_range(1..=(max_total_degree + 1).min(4));
    let q_len = rng.gen_range(1..=(max_total_degree + 2 - p_len).min(4));
    let mut gens: Vec<(usize, usize)> = Vec::new();
    let mut arrows: Vec<(usize, usize)> = Vec::new();
    for _ in 0..rng.gen_range(1..=6) {
        let p = rng.gen_range(0..p_len);
        let q = rng.gen_range(0..q_len);
        let j = rng.gen_range(0..=p);
        let (tp, tq) = (p - j, q + j);
        if rng.gen_bool(0.7) && tq >= 1 && tq - 1 < q_len {
            gens.push((p, q));
            gens.push((tp, tq - 1));
            arrows.push((gens.len() - 2, gens.len() - 1));
        } else {
            gens.push((p, q));
        }
    }

    let mut ranks = vec![vec![0usize; q_len]; p_len];
    // Position of each generator inside its (p, q) group.
    let mut slot = Vec::with_capacity(gens.len());
    for &(p, q) in &gens {
        slot.push(ranks[p][q]);
        ranks[p][q] += 1;
    }
    let skeleton = Multicomplex::zero(ranks.clone()).expect("ranks are rectangular");
    let assembled = super::algebra::assemble(&skeleton).expect("zero maps verify");
    let offset_of = |g: usize| {
        let (p, q) = gens[g];
        let block = assembled.layout.blocks[p + q]
            .iter()
            .find(|b| b.p == p)
            .expect("block exists");
        block.offset + slot[g]
    };

    let degrees = assembled.layout.blocks.len();
    let mut boundary: BTreeMap<usize, IntegerMatrix> =
        (1..degrees).map(|k| (k, assembled.complex.boundary(k))).collect();
    for &(src, dst) in &arrows {
        let k = gens[src].0 + gens[src].1;
        let m = boundary.get_mut(&k).expect("degree in range");
        m.set(offset_of(dst), offset_of(src), BigInt::from(1));
    }

    let change: Vec<IntegerMatrix> = (0..degrees)
        .map(|k| random_filtered_unimodular(rng, &assembled.layout.filtration(k)))
        .collect();
    let conjugated: BTreeMap<usize, IntegerMatrix> = boundary
        .into_iter()
        .map(|(k, d)| {
            let inv = inverse_unimodular(&change[k]);
            (k, &(&change[k - 1] * &d) * &inv)
        })
        .collect();
    let total = GradedChainComplex::new((0..degrees).map(|k| assembled.layout.size(k)).collect(), conjugated)
        .expect("conjugation keeps shapes");
    Multicomplex::from_assembled(ranks, &total).expect("conjugation preserves the filtration")
}

/// Unimodular matrix `A` with `A[r][c] = 0` whenever `filtration[r] > filtration[c]`.
fn random_filtered_unimodular<R: Rng>(rng: &mut R, filtration: &[usize]) -> IntegerMatrix {
    let n = filtration.len();
    let mut a = IntegerMatrix::identity(n);
    if n == 0 {
        return a;
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let r = rng.gen_range(0..n);
        let c = rng.gen_range(0..n);
        if r == c || filtration[r] > filtration[c] {
            continue;
        }
        // Row operation r += k·c keeps the block-triangular shape when
        // filtration[r] <= filtration[c] and is always unimodular.
        let k = BigInt::from(rng.gen_range(-2i64..=2));
        a.add_row_multiple(r, c, &k);
    }
    a
}

fn inverse_unimodular(a: &IntegerMatrix) -> IntegerMatrix {
    let s = smith_normal_form(a);
    debug_assert!(s.diagonal.iter().all(|d| *d == BigInt::from(1)));
    &s.v * &s.u
}
