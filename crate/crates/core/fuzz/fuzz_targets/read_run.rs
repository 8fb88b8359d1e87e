#![no_main]

use fbgforce::calibration::{fit_axis, LoadAxis};
use fbgforce::io::{read_run, RunSidecar};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let sidecar = RunSidecar { loaded_axis: LoadAxis::X1 };
    if let Ok(run) = read_run(data, &sidecar) {
        let _ = fit_axis(&run);
    }
});
