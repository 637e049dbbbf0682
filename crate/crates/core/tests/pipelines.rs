//! Public-API checks against hand-derived values and invariants that hold for
//! every input.

use morsebott::chains_cubical::cubical_homology;
use morsebott::exact_algebra::{betti_numbers, homology, verify_complex, Coefficients};
use morsebott::landscape::Manifold;
use morsebott::multicomplex::{assemble, manifold_model, random_multicomplex, verify_multicomplex};
use morsebott::poly_lab::{one_plus_t, solve_R, IntPoly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn cubical_models_have_known_betti_numbers() {
    // Counted by hand: a circle (4 vertices, 4 edges), a product of two
    // circles, and the surface of a cube (8 vertices, 12 edges, 6 squares).
    let cases = [(Manifold::Circle, vec![1, 1]), (Manifold::Torus, vec![1, 2, 1]), (Manifold::Sphere, vec![1, 0, 1])];
    for (m, betti) in cases {
        let k = manifold_model(m);
        let h = cubical_homology(&k, Coefficients::Integers).unwrap();
        assert_eq!(betti_numbers(&h), betti, "{m:?}");
        assert!(h.iter().all(|r| r.torsion.is_empty()));
    }
}

fn poly_strategy() -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(0i64..4, 0..5).prop_map(IntPoly::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_multicomplexes_assemble_to_filtered_complexes(seed in any::<u64>(), degree in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_multicomplex(&mut rng, degree);
        prop_assert!(verify_multicomplex(&x).is_ok());
        let a = assemble(&x).unwrap();
        prop_assert!(verify_complex(&a.complex).is_ok());
        prop_assert!(a.filtration_preserved());
        // Universal coefficients: mod-2 Betti numbers bound the free ranks.
        let hz = betti_numbers(&homology(&a.complex, Coefficients::Integers).unwrap());
        let h2 = betti_numbers(&homology(&a.complex, Coefficients::Mod2).unwrap());
        prop_assert_eq!(hz.len(), h2.len());
        for (z, t) in hz.iter().zip(&h2) {
            prop_assert!(t >= z);
        }
    }

    #[test]
    fn solve_r_recovers_a_constructed_remainder(p in poly_strategy(), r in poly_strategy()) {
        let m = &p + &(&one_plus_t() * &r);
        prop_assert_eq!(solve_R(&m, &p).unwrap(), r);
    }
}
