#![no_main]

use epistasis_core::{network, tables};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(counts) = tables::read_gene_counts(data) {
        let _ = network::exclusive_hubs(&counts, 0.1);
        let _ = network::shared_hubs(&counts, 100, 0.05);
        let _ = network::symmetric_exclusive_hubs(&counts, 10, 0.1);
    }
});
