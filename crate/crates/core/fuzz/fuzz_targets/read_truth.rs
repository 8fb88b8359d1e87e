#![no_main]

use fbgforce::io::read_truth;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cols) = read_truth(data) {
        assert!(cols.windows(2).all(|w| w[0].len() == w[1].len()));
    }
});
