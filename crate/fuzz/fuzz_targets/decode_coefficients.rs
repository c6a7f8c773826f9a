#![no_main]

use libfuzzer_sys::fuzz_target;
use qml::io::{decode_coefficients, encode_coefficients};

fuzz_target!(|data: &[u8]| {
    if let Ok(x) = decode_coefficients(data) {
        let again = decode_coefficients(&encode_coefficients(&x)).expect("re-encoded coefficients decode");
        assert_eq!(again.slices.len(), x.slices.len());
    }
});
