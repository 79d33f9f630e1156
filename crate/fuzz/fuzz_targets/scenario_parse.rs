#![no_main]

use libfuzzer_sys::fuzz_target;

// Scenario files come from users in JSON or TOML; parsing and validation
// must never panic on arbitrary input.
fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = aerostat_core::scenario::parse_scenario_str(text) {
            let _ = config.validate();
        }
    }
});
