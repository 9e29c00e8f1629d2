#![no_main]

use epistasis_core::{tables, Thresholds};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let th = Thresholds::default();
    if let Ok(pairs) = tables::parse_scored_pairs_bytes(data, &th) {
        let mut first = Vec::new();
        tables::write_scored_pairs(&mut first, &pairs).unwrap();
        let again = tables::parse_scored_pairs_bytes(&first, &th).unwrap();
        let mut second = Vec::new();
        tables::write_scored_pairs(&mut second, &again).unwrap();
        assert_eq!(first, second);
    }
});
