//! Perturbation of a Morse–Bott function to a nearby Morse function
//! `h = f + ε Σ ρ_j f_j`, the index relation and chain-group decomposition
//! for `h`, and the polynomial Morse–Bott inequalities computed end to end.

mod perturbed;
mod pipeline;

pub use perturbed::{
    build_h, match_expected, predicted_critical_points, Auxiliary, AuxiliaryOnCircle, ExpectedCritical,
    PerturbationTerm, PerturbedLandscape, TubularNeighborhood,
};
pub use pipeline::{
    auxiliary_data, calibrate_epsilon_max, chain_group_decomposition, mb_inequalities_pipeline, perturbed_complex,
    stability_sweep, verify_index_relation, AuxiliaryData, Decomposition, IndexMatch, IndexRelation,
    PerturbationReport, PerturbedRun, SweepRow,
};

use crate::flow_engine::CriticalSet;

/// The default auxiliary `1 + cos u` on every critical circle.
pub fn default_auxiliaries(set: &CriticalSet) -> Vec<Auxiliary> {
    vec![Auxiliary::default(); set.circles.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::flow_engine::{detect_critical_set, DetectOptions, Tolerances};
    use crate::landscape::{lookup, Landscape, Manifold, SmoothFunction};
    use crate::poly_lab::IntPoly;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(name: &str) -> (Landscape, CriticalSet, Tolerances, DetectOptions) {
        let l = lookup(name).unwrap();
        let tol = Tolerances::default();
        let opts = DetectOptions::default();
        let set = detect_critical_set(&l, &tol, &opts).unwrap();
        (l, set, tol, opts)
    }

    fn random_point(m: Manifold, rng: &mut impl Rng) -> Vector3<f64> {
        match m {
            Manifold::Sphere => {
                let z: f64 = rng.gen_range(-0.99..0.99);
                let a: f64 = rng.gen_range(0.0..6.28);
                let r = (1.0 - z * z).sqrt();
                Vector3::new(r * a.cos(), r * a.sin(), z)
            }
            _ => Vector3::new(rng.gen_range(0.0..6.28), rng.gen_range(0.0..6.28), 0.0),
        }
    }

    #[test]
    fn zero_epsilon_is_the_base_function() {
        let (l, set, tol, opts) = setup("sphere_zsq");
        let h = build_h(&l, &set, &default_auxiliaries(&set), 0.0, &tol, &opts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = random_point(Manifold::Sphere, &mut rng);
            assert!((h.gradient(&x) - l.gradient(&x)).norm() < 1e-12);
        }
    }

    #[test]
    fn perturbation_vanishes_outside_tubes() {
        for name in ["sphere_zsq", "torus_cosphi"] {
            let (l, set, tol, opts) = setup(name);
            let h = build_h(&l, &set, &default_auxiliaries(&set), 0.01, &tol, &opts).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let mut checked = 0;
            while checked < 200 {
                let x = random_point(l.manifold, &mut rng);
                if set.circles.iter().all(|c| c.chart.r(&x).abs() >= 0.4) {
                    assert!(h.difference(&x).abs() < 1e-14);
                    assert_eq!(h.coord_grad(&x), l.coord_grad(&x));
                    checked += 1;
                }
            }
        }
    }

    /// Derivatives of `h` against central differences along geodesics,
    /// concentrated in the tubes where the correction lives.
    #[test]
    fn derivatives_match_finite_differences() {
        for name in ["sphere_zsq", "torus_cosphi"] {
            let (l, set, tol, opts) = setup(name);
            let h = build_h(&l, &set, &default_auxiliaries(&set), 0.3, &tol, &opts);
            // Large ε is only for derivative checks; spurious points are expected.
            assert!(matches!(h, Err(Error::EpsilonTooLarge { .. })));
            let h = PerturbedLandscape {
                epsilon: 0.3,
                ..build_h(&l, &set, &default_auxiliaries(&set), 0.0, &tol, &opts).unwrap()
            };
            let m = l.manifold;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut checked = 0;
            while checked < 100 {
                let x = random_point(m, &mut rng);
                if set.circles.iter().all(|c| c.chart.r(&x).abs() > 0.45) {
                    continue;
                }
                checked += 1;
                let g = h.gradient(&x);
                let (basis, hess) = h.tangent_hessian(&x);
                for (i, e) in basis.iter().enumerate() {
                    let s = 1e-5;
                    let fd = (h.value(&m.exp(&x, &(e * s))) - h.value(&m.exp(&x, &(e * -s)))) / (2.0 * s);
                    assert!((fd - g.dot(e)).abs() < 1e-7, "{name} grad {fd} vs {}", g.dot(e));
                    let s = 1e-4;
                    let f0 = h.value(&x);
                    let fd2 = (h.value(&m.exp(&x, &(e * s))) - 2.0 * f0 + h.value(&m.exp(&x, &(e * -s)))) / (s * s);
                    assert!(
                        (fd2 - hess[(i, i)]).abs() < 1e-5 * hess[(i, i)].abs().max(10.0),
                        "{name} hess {fd2} vs {}",
                        hess[(i, i)]
                    );
                }
            }
        }
    }

    #[test]
    fn zsq_critical_table() {
        let (l, set, tol, opts) = setup("sphere_zsq");
        let h = build_h(&l, &set, &default_auxiliaries(&set), 0.01, &tol, &opts).unwrap();
        let hset = detect_critical_set(&h, &tol, &opts).unwrap();
        assert_eq!(hset.counts_by_index(), vec![1, 1, 2]);
        let rel = verify_index_relation(&h, &hset, &tol).unwrap();
        assert!(rel.holds());
        let eq_max = rel
            .matches
            .iter()
            .find(|m| m.circle.is_some() && m.auxiliary_index == 1)
            .unwrap();
        assert_eq!(eq_max.index, 1);
        let d = chain_group_decomposition(&h, &hset);
        assert_eq!((d.h_ranks.clone(), d.failing_degree), (vec![1, 1, 2], None));
    }

    #[test]
    fn cosphi_critical_table() {
        let (l, set, tol, opts) = setup("torus_cosphi");
        let h = build_h(&l, &set, &default_auxiliaries(&set), 0.01, &tol, &opts).unwrap();
        let hset = detect_critical_set(&h, &tol, &opts).unwrap();
        assert_eq!(hset.counts_by_index(), vec![1, 2, 1]);
        assert!(verify_index_relation(&h, &hset, &tol).unwrap().holds());
        assert_eq!(chain_group_decomposition(&h, &hset).sum_ranks, vec![1, 2, 1]);
    }

    #[test]
    fn unmatched_points_are_reported() {
        let (l, set, tol, opts) = setup("sphere_zsq");
        let mut h = build_h(&l, &set, &default_auxiliaries(&set), 0.01, &tol, &opts).unwrap();
        let hset = detect_critical_set(&h, &tol, &opts).unwrap();
        h.expected.pop();
        assert!(matches!(
            verify_index_relation(&h, &hset, &tol),
            Err(Error::UnmatchedCritical { .. })
        ));
    }

    #[test]
    fn pipelines() {
        let tol = Tolerances::default();
        let opts = DetectOptions::default();
        let zsq = lookup("sphere_zsq").unwrap();
        let r = mb_inequalities_pipeline(&zsq, &[Auxiliary::default()], 0.01, &tol, &opts).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.mb_t, IntPoly::new(vec![1, 1, 2]));
        assert_eq!(r.p_t, IntPoly::new(vec![1, 0, 1]));
        assert_eq!(r.r_solved, IntPoly::monomial(1));

        let torus = lookup("torus_cosphi").unwrap();
        let aux = [Auxiliary::default(); 2];
        let r = mb_inequalities_pipeline(&torus, &aux, 0.01, &tol, &opts).unwrap();
        assert!(r.passed());
        assert_eq!(r.mb_t, IntPoly::new(vec![1, 2, 1]));
        assert_eq!(r.p_t, r.mb_t);
        assert!(r.r_solved.is_zero());

        // Morse input reduces to the Morse inequalities.
        let dented = lookup("sphere_dented").unwrap();
        let r = mb_inequalities_pipeline(&dented, &[], 0.01, &tol, &opts).unwrap();
        assert!(r.passed());
        assert_eq!(r.mb_t, r.m_h);
        assert_eq!(r.r_solved, IntPoly::monomial(1));
    }

    #[test]
    fn sweeps_are_stable_and_calibration_reproduces_catalog() {
        let tol = Tolerances::default();
        let opts = DetectOptions::default();
        for name in ["sphere_zsq", "torus_cosphi"] {
            let l = lookup(name).unwrap();
            let set = detect_critical_set(&l, &tol, &opts).unwrap();
            let aux = default_auxiliaries(&set);
            let emax = l.epsilon_max.unwrap();
            let rows = stability_sweep(&l, &aux, &[emax, emax / 2.0, emax / 4.0], &tol, &opts).unwrap();
            assert!(rows.iter().all(|r| r.stable), "{name}");
            assert_eq!(
                calibrate_epsilon_max(&l, &aux, 0.02, 4, &tol, &opts).unwrap(),
                Some(emax),
                "{name}"
            );
        }
    }

    #[test]
    fn bad_inputs() {
        let (l, set, tol, opts) = setup("torus_cosphi");
        assert!(matches!(
            build_h(&l, &set, &[Auxiliary::default()], 0.01, &tol, &opts),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_h(&l, &set, &default_auxiliaries(&set), -1.0, &tol, &opts),
            Err(Error::Config(_))
        ));
        let aux = [Auxiliary { scale: 0.0, phase: 0.0 }; 2];
        assert!(matches!(
            build_h(&l, &set, &aux, 0.01, &tol, &opts),
            Err(Error::Config(_))
        ));
    }
}
