//! Scenario parsing never panics, and accepted scenarios survive a
//! serialize and reparse unchanged.

#![no_main]

use cloakcheck::harness::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ScenarioConfig::from_toml_str(text) {
        let again = config.to_toml_string().expect("valid scenarios serialize");
        let back = ScenarioConfig::from_toml_str(&again).expect("serialized scenarios reparse");
        assert_eq!(back, config);
    }
});
