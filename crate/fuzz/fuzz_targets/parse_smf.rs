#![no_main]

use hpsig::io::{parse_smf, write_smf};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = parse_smf(text) {
        let back = parse_smf(&write_smf(&inst.manifold, inst.action.as_ref())).expect("written documents parse");
        assert_eq!(back.manifold, inst.manifold);
    }
});
