#![no_main]

use libfuzzer_sys::fuzz_target;
use lpw::lpaley::CoefficientSet;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    if let Ok(set) = CoefficientSet::read_jsonl(usize::from(n % 3), rest) {
        let mut out = Vec::new();
        set.write_jsonl(&mut out).expect("writes to memory");
        let again = CoefficientSet::read_jsonl(usize::from(n % 3), out.as_slice()).expect("written lines parse");
        assert_eq!(again.len(), set.len());
    }
});
