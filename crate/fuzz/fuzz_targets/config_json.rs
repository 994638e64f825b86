#![no_main]

use libfuzzer_sys::fuzz_target;
use lpw::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(s) {
        let _ = cfg.validate();
        let text = serde_json::to_string(&cfg).expect("configs serialize");
        RunConfig::from_json(&text).expect("serialized config parses");
    }
});
