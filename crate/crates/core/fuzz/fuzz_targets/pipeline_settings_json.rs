#![no_main]

use fbgforce::pipeline::PipelineSettings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = serde_json::from_slice::<PipelineSettings>(data) {
        let _ = s.filter.validate();
        let _ = s.classifier.validate();
        let _ = s.ica.validate();
        let _ = s.analysis.validate();
    }
});
