#![no_main]

use libfuzzer_sys::fuzz_target;

use aerostat_core::identification::{solve_allocation, AllocationTrialSet};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(trials) = AllocationTrialSet::read_csv(data) {
        // Keep the least-squares solve bounded.
        if trials.trials.len() <= 256 && trials.rotor_count() <= 16 {
            let _ = solve_allocation(&trials);
        }
    }
});
