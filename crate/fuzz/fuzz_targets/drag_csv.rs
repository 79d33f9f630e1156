#![no_main]

use libfuzzer_sys::fuzz_target;

use aerostat_core::identification::{fit_drag, DragSampleSet};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(samples) = DragSampleSet::read_csv(data) {
        let _ = fit_drag(&samples);
    }
});
