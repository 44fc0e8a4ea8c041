#![no_main]

use libfuzzer_sys::fuzz_target;
use ndof_core::RegionSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<RegionSpec>(data) {
        // Whatever deserializes must serialize back into something accepted.
        let text = serde_json::to_string(&spec).expect("serializes");
        serde_json::from_str::<RegionSpec>(&text).expect("round trip");
        let _ = spec.measure();
        let _ = spec.diameter();
        let _ = ndof_core::geometry::estimate_samples(&spec, 0.5, 5.0);
    }
});
