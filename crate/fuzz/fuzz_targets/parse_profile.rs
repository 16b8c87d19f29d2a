#![no_main]

use hpsig::io::parse_profile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(profile) = parse_profile(text) {
        assert_eq!(parse_profile(&profile.to_string()).unwrap(), profile);
    }
});
