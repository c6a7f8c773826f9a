#![no_main]

use libfuzzer_sys::fuzz_target;
use qml::io::{decode_field, encode_field};

fuzz_target!(|data: &[u8]| {
    if let Ok(u) = decode_field(data) {
        assert_eq!(encode_field(&u), data);
    }
});
