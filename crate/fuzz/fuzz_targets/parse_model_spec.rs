#![no_main]

use epistasis_core::TwoFactorEffectModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = TwoFactorEffectModel::from_json_slice(data) {
        let table = model.observables();
        if let Ok(check) = table.is_neutral(1e-9) {
            assert!(check.neutral, "factorised model failed neutrality: {check:?}");
        }
        let _ = model.digest();
    }
});
