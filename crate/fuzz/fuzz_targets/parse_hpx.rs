#![no_main]

use hpsig::hpcomplex::verify_duality;
use hpsig::io::{parse_hpx, write_cwb, write_hpx, HpxInstance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_hpx(text) {
        Ok(HpxInstance::Closed(hp)) => {
            let again = parse_hpx(&write_hpx(&hp)).expect("written documents parse");
            assert!(matches!(again, HpxInstance::Closed(_)));
            if hp.grading().total() <= 24 {
                let _ = verify_duality(&hp, 1e-9);
            }
        }
        Ok(HpxInstance::WithBoundary(cwb)) => {
            let _ = parse_hpx(&write_cwb(&cwb)).expect("written documents parse");
        }
        Err(_) => {}
    }
});
