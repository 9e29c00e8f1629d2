#![no_main]

use epistasis_core::probmodel::JointDistribution;
use epistasis_core::simgen::{self, InteractionPerturbation};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let model = simgen::binary_model(0.8, 0.5, 0.9, JointDistribution::uniform(2, 2)).unwrap();
    if let Ok(p) = InteractionPerturbation::from_json_slice(&model, data) {
        let _ = simgen::perturbed_observables(&model, Some(&p));
    }
});
