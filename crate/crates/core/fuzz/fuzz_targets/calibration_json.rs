#![no_main]

use fbgforce::calibration::{CalibrationFile, CalibrationModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(file) = serde_json::from_slice::<CalibrationFile>(data) else { return };
    let Ok(model) = CalibrationModel::try_from(file) else { return };
    // a validated model always re-serialises to something loadable
    let text = serde_json::to_vec(&model.to_file()).unwrap();
    let back: CalibrationFile = serde_json::from_slice(&text).unwrap();
    back.into_model().unwrap();
});
