#![no_main]

use libfuzzer_sys::fuzz_target;
use lpw::weights::{WeightSequence, WeightSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = WeightSpec::parse(s) {
        let again = WeightSpec::parse(&w.to_string()).expect("printed weight parses");
        assert_eq!(again.to_string(), w.to_string());
        assert!(!w.eval(1.0, 0).is_nan(), "{w}");
    }
    let _ = WeightSequence::parse(s);
});
