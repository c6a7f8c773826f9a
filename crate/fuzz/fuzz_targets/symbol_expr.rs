#![no_main]

use libfuzzer_sys::fuzz_target;
use qml::symbols::{parse_call, parse_graph_fn, parse_symbol_expr};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_call(text);
        let _ = parse_graph_fn(text);
        if let Ok(s) = parse_symbol_expr(text) {
            let _ = s.label();
        }
    }
});
