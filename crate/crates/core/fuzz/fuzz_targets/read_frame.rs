#![no_main]

use fbgforce::io::{read_frame, write_frame};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(frame) = read_frame(data) else { return };
    // anything accepted must survive a write/read cycle unchanged
    let mut buf = Vec::new();
    write_frame(&mut buf, &frame).unwrap();
    let again = read_frame(buf.as_slice()).unwrap();
    assert_eq!(frame.channels(), again.channels());
    let (a, b) = (frame.sample_rate(), again.sample_rate());
    assert!((a - b).abs() <= 1e-9 * a, "sample rate drifted from {a} to {b}");
});
