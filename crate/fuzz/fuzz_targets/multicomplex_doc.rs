#![no_main]

use libfuzzer_sys::fuzz_target;
use morsebott::exact_algebra::verify_complex;
use morsebott::multicomplex::{assemble, verify_multicomplex, MulticomplexDoc};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = MulticomplexDoc::parse(text) else { return };
    let Ok(x) = doc.to_multicomplex() else { return };
    if verify_multicomplex(&x).is_ok() {
        let a = assemble(&x).expect("a verified multicomplex assembles");
        assert!(verify_complex(&a.complex).is_ok());
        assert!(a.filtration_preserved());
    }
});
