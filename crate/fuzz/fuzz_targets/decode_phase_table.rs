#![no_main]

use libfuzzer_sys::fuzz_target;
use qml::io::{decode_phase_table, encode_phase_table};

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = decode_phase_table(data) {
        let again = decode_phase_table(&encode_phase_table(&t)).expect("re-encoded table decodes");
        assert_eq!(again.times.len(), t.times.len());
    }
});
