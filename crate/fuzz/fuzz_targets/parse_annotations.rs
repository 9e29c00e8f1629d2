#![no_main]

use epistasis_core::annotate::{parse_annotations_bytes, AnnotationKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((catalog, report)) = parse_annotations_bytes(data, AnnotationKind::Complex) {
        assert!(report.memberships + report.duplicates + report.malformed <= report.lines);
        let total: usize = catalog.categories().map(|(_, g)| g.len()).sum();
        assert_eq!(total as u64, report.memberships);
    }
});
