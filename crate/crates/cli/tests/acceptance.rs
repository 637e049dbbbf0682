//! Acceptance criteria, one test and one printed PASS/FAIL line each.
//!
//! Run with `cargo test -p morsebott-cli --test acceptance -- --nocapture`
//! to see the lines.

use morsebott::cascades::{correspondence_check, epsilon_sweep, CascadeSetup};
use morsebott::chains_cubical::{
    cube_boundary, cube_chain_boundary, exhaustive_moduli_cases, fibered_boundary, moduli_boundary_squared,
    random_word, Association, CubeFace, FiberedSign, ModuliSign, SignConventions,
};
use morsebott::exact_algebra::{homology, kernel_ranks, verify_complex, Coefficients, HomologyResult};
use morsebott::flow_engine::{detect_critical_set, DetectOptions, Tolerances};
use morsebott::landscape::{lookup, Landscape};
use morsebott::msw_complex::{build_msw, morse_poly_of};
use morsebott::multicomplex::{
    assemble, build_morse_bott_multicomplex, interpolation_checks, random_multicomplex, verify_multicomplex, BuildMode,
};
use morsebott::perturbation::{default_auxiliaries, mb_inequalities_pipeline, perturbed_complex, stability_sweep};
use morsebott::poly_lab::{poincare_poly, solve_R, IntPoly};
use morsebott_cli::{run, Command, RunConfig, RunOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MORSE_BOTT: [&str; 2] = ["sphere_zsq", "torus_cosphi"];

/// Hausdorff tolerance for the final row of an ε-sweep.
const SWEEP_DISTANCE: f64 = 0.05;

type Outcome = Result<String, String>;

fn criterion(n: usize, name: &str, body: impl FnOnce() -> Outcome) {
    match body() {
        Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
        Err(why) => {
            println!("criterion {n:>2} {name}: FAIL ({why})");
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn land(name: &str) -> Result<Landscape, String> {
    lookup(name).map_err(|e| e.to_string())
}

fn setup() -> (Tolerances, DetectOptions) {
    (Tolerances::default(), DetectOptions::default())
}

fn eps_max(l: &Landscape) -> Result<f64, String> {
    l.epsilon_max.ok_or_else(|| format!("{} has no ε_max", l.name))
}

fn free(betti: &[usize]) -> Vec<HomologyResult> {
    betti.iter().map(|&b| HomologyResult::free(b)).collect()
}

fn poly(c: &[i64]) -> IntPoly {
    IntPoly::new(c.to_vec())
}

#[test]
fn c01_morse_pipeline_exactness() {
    criterion(1, "morse pipeline exactness", || {
        let (tol, opts) = setup();
        let expected: [(&str, &[usize]); 4] = [
            ("circle_cos", &[1, 1]),
            ("torus_tilted", &[1, 2, 1]),
            ("sphere_height", &[1, 0, 1]),
            ("sphere_dented", &[1, 0, 1]),
        ];
        for (name, betti) in expected {
            let l = land(name)?;
            let set = detect_critical_set(&l, &tol, &opts).map_err(|e| format!("{name}: {e}"))?;
            let c = build_msw(&l, &set, Coefficients::Integers, &tol).map_err(|e| format!("{name}: {e}"))?;
            let h = c.homology().map_err(|e| format!("{name}: {e}"))?;
            ensure(h == free(betti), || format!("{name}: got {h:?}"))?;
        }
        Ok("4 landscapes, zero torsion".into())
    });
}

#[test]
fn c02_polynomial_inequalities() {
    criterion(2, "polynomial inequalities", || {
        let (tol, opts) = setup();
        let expected: [(&str, &[i64]); 4] = [
            ("circle_cos", &[]),
            ("torus_tilted", &[]),
            ("sphere_height", &[]),
            ("sphere_dented", &[0, 1]),
        ];
        for (name, r) in expected {
            let l = land(name)?;
            let set = detect_critical_set(&l, &tol, &opts).map_err(|e| e.to_string())?;
            let c = build_msw(&l, &set, Coefficients::Integers, &tol).map_err(|e| e.to_string())?;
            let p_t = poincare_poly(&c.homology().map_err(|e| e.to_string())?);
            let got = solve_R(&morse_poly_of(&c), &p_t).map_err(|e| format!("{name}: {e}"))?;
            ensure(got == poly(r), || format!("{name}: R = {got}"))?;
        }
        let cases: [(&str, &[i64], &[i64], &[i64]); 2] = [
            ("sphere_zsq", &[1, 1, 2], &[1, 0, 1], &[0, 1]),
            ("torus_cosphi", &[1, 2, 1], &[1, 2, 1], &[]),
        ];
        for (name, mb, p, r) in cases {
            let l = land(name)?;
            let set = detect_critical_set(&l, &tol, &opts).map_err(|e| e.to_string())?;
            let eps = eps_max(&l)? / 2.0;
            let rep = mb_inequalities_pipeline(&l, &default_auxiliaries(&set), eps, &tol, &opts)
                .map_err(|e| format!("{name}: {e}"))?;
            ensure(
                rep.mb_t == poly(mb) && rep.p_t == poly(p) && rep.r_solved == poly(r),
                || format!("{name}: MB = {}, P = {}, R = {}", rep.mb_t, rep.p_t, rep.r_solved),
            )?;
        }
        Ok("R exact on Morse entries, MB and R exact on Morse–Bott entries".into())
    });
}

#[test]
fn c03_perturbation_structure() {
    criterion(3, "perturbation structure", || {
        let (tol, opts) = setup();
        for name in MORSE_BOTT {
            let l = land(name)?;
            let set = detect_critical_set(&l, &tol, &opts).map_err(|e| e.to_string())?;
            let aux = default_auxiliaries(&set);
            let e = eps_max(&l)?;
            let sweep = [e, e / 2.0, e / 4.0];
            let rep = mb_inequalities_pipeline(&l, &aux, e / 2.0, &tol, &opts).map_err(|e| format!("{name}: {e}"))?;
            ensure(rep.index_relation.holds(), || format!("{name}: index relation fails"))?;
            ensure(rep.decomposition.failing_degree.is_none(), || {
                format!(
                    "{name}: decomposition fails in degree {:?}",
                    rep.decomposition.failing_degree
                )
            })?;
            let reference = free(&l.manifold.reference_betti());
            let mut tables = Vec::new();
            for &eps in &sweep {
                let run = perturbed_complex(&l, &set, &aux, eps, Coefficients::Integers, &tol, &opts)
                    .map_err(|e| format!("{name} at ε = {eps}: {e}"))?;
                let h = run.complex.homology().map_err(|e| e.to_string())?;
                ensure(h == reference, || format!("{name} at ε = {eps}: {h:?}"))?;
                tables.push(run.hset.counts_by_index());
            }
            ensure(tables.windows(2).all(|w| w[0] == w[1]), || {
                format!("{name}: tables {tables:?}")
            })?;
            let rows = stability_sweep(&l, &aux, &sweep, &tol, &opts).map_err(|e| e.to_string())?;
            ensure(rows.iter().all(|r| r.stable), || {
                format!("{name}: matched critical points move")
            })?;
        }
        Ok("both entries, ε ∈ {ε_max, ε_max/2, ε_max/4}".into())
    });
}

#[test]
fn c04_kernel_inequality() {
    criterion(4, "kernel inequality", || {
        let (tol, opts) = setup();
        for name in MORSE_BOTT {
            let l = land(name)?;
            let set = detect_critical_set(&l, &tol, &opts).map_err(|e| e.to_string())?;
            let rep = mb_inequalities_pipeline(&l, &default_auxiliaries(&set), eps_max(&l)? / 2.0, &tol, &opts)
                .map_err(|e| format!("{name}: {e}"))?;
            let z_h = kernel_ranks(&rep.h_complex.complex);
            for (n, &zh) in z_h.iter().enumerate() {
                let lhs: usize = rep
                    .auxiliaries
                    .iter()
                    .filter_map(|a| n.checked_sub(a.bott_index).and_then(|k| a.z.get(k)))
                    .sum();
                ensure(lhs >= zh, || format!("{name}: n = {n}, Σ z = {lhs} < z^h = {zh}"))?;
            }
            ensure(rep.kernel_check_failure.is_none(), || {
                format!("{name}: library check disagrees")
            })?;
        }
        Ok("every degree on both entries".into())
    });
}

#[test]
fn c05_correspondence() {
    criterion(5, "correspondence", || {
        let (tol, opts) = setup();
        let mut pairs = 0;
        for name in MORSE_BOTT {
            let l = land(name)?;
            let set = detect_critical_set(&l, &tol, &opts).map_err(|e| e.to_string())?;
            let aux = default_auxiliaries(&set);
            let s = CascadeSetup::from_set(&l, set, &aux, &tol).map_err(|e| e.to_string())?;
            let r = correspondence_check(&s, eps_max(&l)? / 2.0, &opts).map_err(|e| format!("{name}: {e}"))?;
            for p in &r.pairs {
                ensure(p.cascades == p.flow_lines, || {
                    format!("{name} {}->{}: counts differ", p.from, p.to)
                })?;
                ensure(p.boundary_cascade == -p.boundary_h, || {
                    format!("{name} {}->{}: signs", p.from, p.to)
                })?;
                let mut seen: Vec<usize> = p.matches.iter().map(|m| m.cascade).collect();
                seen.sort_unstable();
                seen.dedup();
                ensure(seen.len() == p.matches.len() && p.matches.len() == p.flow_lines, || {
                    format!("{name} {}->{}: matching not injective", p.from, p.to)
                })?;
                for m in &p.matches {
                    ensure(
                        m.nearest < tol.haus_tol && m.second.is_none_or(|s| s >= 2.0 * m.nearest),
                        || {
                            format!(
                                "{name} {}->{}: line {} nearest {} second {:?}",
                                p.from, p.to, m.line, m.nearest, m.second
                            )
                        },
                    )?;
                }
            }
            pairs += r.pairs.len();
            ensure(r.boundary_relation_holds, || format!("{name}: ∂^c ≠ −∂^h"))?;
            let h = homology(&r.cascade_complex, Coefficients::Integers).map_err(|e| e.to_string())?;
            ensure(h == free(&l.manifold.reference_betti()), || {
                format!("{name}: cascade homology {h:?}")
            })?;
        }
        Ok(format!("{pairs} adjacent pairs at ε_max/2"))
    });
}

#[test]
fn c06_degeneration() {
    criterion(6, "degeneration", || {
        let (tol, opts) = setup();
        let l = land("sphere_zsq")?;
        let set = detect_critical_set(&l, &tol, &opts).map_err(|e| e.to_string())?;
        let aux = default_auxiliaries(&set);
        let s = CascadeSetup::from_set(&l, set, &aux, &tol).map_err(|e| e.to_string())?;
        let e = eps_max(&l)?;
        let sweep = [e, e / 2.0, e / 4.0];
        let mut worst: f64 = 0.0;
        let pairs = s.adjacent_pairs();
        ensure(!pairs.is_empty(), || "no adjacent pairs".into())?;
        for (q, p) in pairs {
            let r = epsilon_sweep(&s, q, p, &sweep, &opts).map_err(|e| format!("{q}->{p}: {e}"))?;
            ensure(r.rows.iter().all(|row| row.count == r.cascades), || {
                format!("{q}->{p}: counts drift")
            })?;
            ensure(r.final_distance < SWEEP_DISTANCE, || {
                format!("{q}->{p}: final distance {}", r.final_distance)
            })?;
            worst = worst.max(r.final_distance);
        }
        Ok(format!("worst final distance {worst:.2e}"))
    });
}

#[test]
fn c07_chain_algebra() {
    criterion(7, "chain algebra", || {
        for n in 0..=6 {
            for face in CubeFace::all_faces(n) {
                if face.free_positions().next().is_none() {
                    continue;
                }
                let d = cube_boundary(&face).map_err(|e| e.to_string())?;
                ensure(cube_chain_boundary(&d).is_zero(), || format!("∂∂ ≠ 0 on {face:?}"))?;
            }
        }
        let standard = SignConventions::default();
        let cases = exhaustive_moduli_cases(6);
        for (i, j, b) in &cases {
            ensure(moduli_boundary_squared(*i, *j, b, &standard).is_zero(), || {
                format!("moduli ({i}, {j}, {b:?})")
            })?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let k = rand::Rng::gen_range(&mut rng, 1..=4);
            let (w, b) = random_word(&mut rng, k);
            let d = fibered_boundary(&w, &b, &standard, Association::Left);
            let dd = morsebott::chains_cubical::fibered_chain_boundary(&d, &b, &standard, Association::Left);
            ensure(dd.is_zero(), || format!("∂∂ ≠ 0 on {w:?}"))?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2025);
        for _ in 0..1000 {
            let (w, b) = random_word(&mut rng, 3);
            let l = fibered_boundary(&w, &b, &standard, Association::Left);
            let r = fibered_boundary(&w, &b, &standard, Association::Right);
            ensure(l == r, || format!("association changes ∂ of {w:?}"))?;
        }
        for signs in [
            SignConventions {
                moduli: ModuliSign::FlippedOnOddBase,
                ..Default::default()
            },
            SignConventions {
                fibered: FiberedSign::Flipped,
                ..Default::default()
            },
        ] {
            let broken = cases
                .iter()
                .any(|(i, j, b)| !moduli_boundary_squared(*i, *j, b, &signs).is_zero());
            ensure(broken, || format!("{signs:?} breaks nothing"))?;
        }
        Ok(format!(
            "{} moduli cases, 2000 random words, both mutations detected",
            cases.len()
        ))
    });
}

#[test]
fn c08_multicomplex_algebra() {
    criterion(8, "multicomplex algebra", || {
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        for k in 0..500 {
            let x = random_multicomplex(&mut rng, 6);
            verify_multicomplex(&x).map_err(|f| format!("sample {k}: {} relation failures", f.len()))?;
            let a = assemble(&x).map_err(|e| format!("sample {k}: {e}"))?;
            ensure(verify_complex(&a.complex).is_ok(), || format!("sample {k}: ∂∂ ≠ 0"))?;
            ensure(a.filtration_preserved(), || {
                format!("sample {k}: filtration not preserved")
            })?;
        }
        let (tol, opts) = setup();
        let interp = interpolation_checks(&tol, &opts);
        for row in &interp.morse {
            ensure(
                row.matrices_equal && row.concentrated_in_row_zero && row.error.is_none(),
                || format!("Morse case {}: {row:?}", row.landscape),
            )?;
        }
        let manifolds: Vec<&str> = interp.constant.iter().map(|r| r.landscape.as_str()).collect();
        for want in ["torus_constant", "sphere_constant"] {
            ensure(manifolds.contains(&want), || format!("{want} missing"))?;
        }
        for row in &interp.constant {
            ensure(row.passed && row.homology == row.cubical, || {
                format!("constant case {}: {row:?}", row.landscape)
            })?;
        }
        Ok(format!(
            "500 random samples, {} Morse rows, {} constant rows",
            interp.morse.len(),
            interp.constant.len()
        ))
    });
}

#[test]
fn c09_morse_bott_multicomplex() {
    criterion(9, "Morse–Bott multicomplex", || {
        let (tol, opts) = setup();
        let expected: [(&str, &[usize]); 2] = [("sphere_zsq", &[1, 0, 1]), ("torus_cosphi", &[1, 2, 1])];
        for (name, betti) in expected {
            let l = land(name)?;
            let b = build_morse_bott_multicomplex(&l, BuildMode::Numeric, &tol, &opts)
                .map_err(|e| format!("{name}: {e}"))?;
            verify_multicomplex(&b.multicomplex).map_err(|f| format!("{name}: {} relation failures", f.len()))?;
            let h = b.homology(Coefficients::Integers).map_err(|e| e.to_string())?;
            ensure(h == free(betti), || format!("{name}: {h:?}"))?;
        }
        Ok("relations exact, homology (Z,0,Z) and (Z,Z²,Z)".into())
    });
}

#[test]
fn c10_grand_crosscheck() {
    criterion(10, "grand cross-check", || {
        for name in MORSE_BOTT {
            let out = run(
                Command::Crosscheck,
                Some(&RunConfig::for_landscape(name)),
                &RunOptions::default(),
            )
            .map_err(|e| format!("{name}: {e}"))?;
            let failed = out.report.failed_checks();
            ensure(out.report.passed && failed.is_empty(), || {
                format!("{name}: failed {failed:?}")
            })?;
            let h = &out.report.sections["homology"];
            let tables: Vec<&serde_json::Value> = ["perturbation", "cascade", "multicomplex", "constant_model"]
                .iter()
                .map(|k| &h[*k])
                .collect();
            ensure(tables.windows(2).all(|w| w[0] == w[1]), || {
                format!("{name}: tables differ")
            })?;
        }
        Ok("perturbation = cascade = multicomplex = constant model".into())
    });
}
