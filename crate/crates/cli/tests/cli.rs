use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn morsebott(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morsebott"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout")
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn betti(h: &Value) -> Vec<u64> {
    h.as_array()
        .unwrap()
        .iter()
        .map(|r| r["betti"].as_u64().unwrap())
        .collect()
}

#[test]
fn catalog_lists_every_entry() {
    let out = morsebott(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "morsebott-report/1");
    assert_eq!(r["sections"]["entries"].as_array().unwrap().len(), 9);
}

#[test]
fn unknown_landscape_is_a_config_error() {
    let out = morsebott(&["analyze", "--landscape", "klein_bottle"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown landscape"));
}

#[test]
fn crosscheck_zsq_agrees_everywhere() {
    let out = morsebott(&["crosscheck", "--landscape", "sphere_zsq"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let h = &r["sections"]["homology"];
    for pipeline in ["perturbation", "cascade", "multicomplex", "constant_model"] {
        assert_eq!(betti(&h[pipeline]), vec![1, 0, 1], "{pipeline}");
    }
    for name in [
        "agreement:perturbation=cascade",
        "agreement:perturbation=multicomplex",
        "agreement:cascade=multicomplex",
        "constant_model",
        "reference_betti",
    ] {
        assert_eq!(check(&r, name)["passed"], true, "{name}");
    }
}

#[test]
fn algebra_verify_fixture_and_failures() {
    let out = morsebott(&["algebra-verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["passed"], true);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"ranks": [[1, 1], [1, 1]], "differentials": [
            {"j": 0, "p": 0, "q": 1, "matrix": [[1]]},
            {"j": 0, "p": 1, "q": 1, "matrix": [[1]]},
            {"j": 1, "p": 1, "q": 0, "matrix": [[1]]},
            {"j": 1, "p": 1, "q": 1, "matrix": [[1]]}]}"#,
    )
    .unwrap();
    let out = morsebott(&["algebra-verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(check(&report(&out), "multicomplex_relations")["passed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed checks: multicomplex_relations"));

    let malformed = dir.path().join("malformed.json");
    fs::write(
        &malformed,
        r#"{"ranks": [[1]], "differentials": [{"j": 0, "p": 0, "q": 0, "matrix": [[1]]}]}"#,
    )
    .unwrap();
    assert_eq!(
        morsebott(&["algebra-verify", malformed.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"landscape": "circle_cos", "speed": 3}"#).unwrap();
    assert_eq!(
        morsebott(&["msw", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        morsebott(&["msw", "--landscape", "circle_cos", "--coeff", "q"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(morsebott(&["msw"]).status.code(), Some(2));
    assert_eq!(morsebott(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        morsebott(&["msw", "--landscape", "circle_cos", "--dump-trajectories"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        morsebott(&["msw", "--config", "/nonexistent/c.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn pipeline_failure_names_the_check() {
    // The MSW complex needs isolated critical points.
    let out = morsebott(&["msw", "--landscape", "sphere_zsq"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(check(&report(&out), "msw")["passed"], false);
}

#[test]
fn reports_are_deterministic() {
    let a = morsebott(&["msw", "--landscape", "torus_tilted", "--seed", "7"]);
    let b = morsebott(&["msw", "--landscape", "torus_tilted", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(betti(&r["sections"]["homology"]), vec![1, 2, 1]);
}

#[test]
fn mod2_coefficients() {
    let out = morsebott(&["msw", "--landscape", "sphere_dented", "--coeff", "z2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["coefficients"], "z2");
    assert_eq!(r["sections"]["complex"]["coefficients"], "z2");
}

#[test]
fn trajectory_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = morsebott(&[
        "msw",
        "--landscape",
        "circle_cos",
        "--out",
        out_dir.to_str().unwrap(),
        "--dump-trajectories",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("msw.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    let csv = fs::read_to_string(out_dir.join("msw-trajectories.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("group,line,piece,t,f,x0,x1,x2"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r.len() == 8));
    // Two lines from the maximum to the minimum of cos θ.
    let mut groups: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    groups.dedup();
    assert_eq!(groups.len(), 2);
}
