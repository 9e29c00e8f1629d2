#![no_main]

use epistasis_core::ObservableTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = ObservableTable::from_json_slice(data) {
        let _ = table.is_neutral(1e-12);
        if let Ok(d) = table.loglinear_decompose() {
            for a in 0..table.levels_a().len() {
                for b in 0..table.levels_b().len() {
                    let s = table.survival_at(a, b);
                    assert!((d.reconstruct(a, b) - s).abs() <= 1e-9 * s.max(1.0));
                }
            }
        }
    }
});
