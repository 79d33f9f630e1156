#![no_main]

use libfuzzer_sys::fuzz_target;

use aerostat_core::energy::{pareto_frontier, read_solar_cells};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(cells) = read_solar_cells(data) {
        if cells.len() <= 512 {
            let _ = pareto_frontier(&cells);
        }
    }
});
