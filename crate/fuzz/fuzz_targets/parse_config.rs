#![no_main]

use libfuzzer_sys::fuzz_target;
use svwe_channel::cli::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(config) = parse_config(text) else { return };
    // anything accepted must survive a round trip unchanged
    let again = parse_config(&config.to_toml().expect("serializes")).expect("reparses");
    assert_eq!(config.to_toml().unwrap(), again.to_toml().unwrap());
});
