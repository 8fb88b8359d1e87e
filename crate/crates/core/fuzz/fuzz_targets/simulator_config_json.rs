#![no_main]

use fbgforce::io::SimulatorConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<SimulatorConfig>(data) {
        let _ = cfg.validate();
        let _ = cfg.calibration.into_model();
    }
});
