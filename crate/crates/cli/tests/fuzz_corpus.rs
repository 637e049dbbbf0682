//! Replays the checked-in fuzz corpus with the same assertions as the fuzz
//! targets, so regressions show up in an ordinary test run.

use std::fs;
use std::path::PathBuf;

use morsebott::exact_algebra::verify_complex;
use morsebott::multicomplex::{assemble, verify_multicomplex, MulticomplexDoc};
use morsebott_cli::{CoeffFlag, RunConfig};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.expect("corpus entry").path();
            let bytes = fs::read(&path).expect("corpus file");
            (path, String::from_utf8_lossy(&bytes).into_owned())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn run_config_corpus() {
    let mut accepted = 0;
    for (path, text) in corpus("run_config") {
        if let Ok(c) = RunConfig::parse(&text) {
            let again = serde_json::to_string(&c).expect("config serializes");
            RunConfig::parse(&again).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let _ = c.landscape();
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

#[test]
fn multicomplex_doc_corpus() {
    let mut verified = 0;
    for (path, text) in corpus("multicomplex_doc") {
        let Ok(doc) = MulticomplexDoc::parse(&text) else {
            continue;
        };
        let Ok(x) = doc.to_multicomplex() else { continue };
        if verify_multicomplex(&x).is_ok() {
            let a = assemble(&x).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(verify_complex(&a.complex).is_ok(), "{}", path.display());
            assert!(a.filtration_preserved(), "{}", path.display());
            verified += 1;
        }
    }
    assert!(verified > 0);
}

#[test]
fn coeff_flag_corpus() {
    for (_, text) in corpus("coeff_flag") {
        if let Ok(flag) = text.parse::<CoeffFlag>() {
            assert_eq!(flag.to_string().parse::<CoeffFlag>().ok(), Some(flag));
        }
    }
}
