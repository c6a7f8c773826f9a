#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(c) = qml_cli::parse_config(text) {
            assert!(!c.h_list.is_empty());
            assert!(c.h_list.iter().all(|&h| h > 0.0 && h <= 1.0));
            let _ = c.experiment();
        }
    }
});
