#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = ndof_core::output::parse_spectrum_csv(text) {
            for (i, r) in rows.iter().enumerate() {
                assert_eq!(r.n, i + 1);
            }
        }
    }
});
