#![no_main]

use epistasis_core::ingest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((records, report)) = ingest::parse_sga_bytes(data) {
        assert_eq!(report.rows_read, report.rows_kept + report.dropped());
        assert_eq!(records.len() as u64, report.rows_kept);
        let mut out = Vec::new();
        ingest::write_canonical(&mut out, &ingest::aggregate_gene_pairs(records)).unwrap();
    }
});
