#![no_main]

use libfuzzer_sys::fuzz_target;
use lpw::grid::GridFunction;

// Input: JSON sidecar, a NUL byte, then the raw sample bytes.
fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else { return };
    let Ok(sidecar) = std::str::from_utf8(&data[..split]) else { return };
    if let Ok(f) = GridFunction::decode(sidecar, &data[split + 1..]) {
        let (s, bytes) = f.encode();
        let again = GridFunction::decode(&s, &bytes).expect("encoded grid decodes");
        assert_eq!(again.spec(), f.spec());
    }
});
