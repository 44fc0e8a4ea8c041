#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(configs) = ndof_core::scenario::parse_scenarios(text) {
            // Anything the parser accepts must be self-consistent.
            for c in &configs {
                c.validate().expect("parsed config validates");
                let _ = c.points();
            }
        }
    }
});
