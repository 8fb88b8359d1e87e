#![no_main]

use fbgforce::io::{read_components, ComponentsSidecar};
use libfuzzer_sys::fuzz_target;

// Input layout: sidecar JSON, a NUL byte, the first table, a NUL byte,
// the second table.
fuzz_target!(|data: &[u8]| {
    let mut parts = data.splitn(3, |b| *b == 0);
    let (Some(json), Some(first), Some(second)) = (parts.next(), parts.next(), parts.next()) else {
        return;
    };
    let Ok(sidecar) = serde_json::from_slice::<ComponentsSidecar>(json) else { return };
    if let Ok(c) = read_components(first, second, sidecar) {
        assert_eq!(c.pairs[0].components[0].len(), c.len());
    }
});
