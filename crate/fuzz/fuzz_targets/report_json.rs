#![no_main]

use libfuzzer_sys::fuzz_target;
use lpw::report::{suite_csv, Report};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Report::from_json(s) {
        let _ = r.table();
        for suite in &r.suites {
            suite_csv(suite).expect("csv of a parsed suite");
        }
        Report::from_json(&r.to_json().expect("reports serialize")).expect("written report parses");
    }
});
