//! Audit cross-check against a massage plan.

use std::collections::BTreeSet;

use rand::Rng;
use repairlab::audit::{Auditor, Probe};
use repairlab::classifiers::TrainerConfig;
use repairlab::data::generate_synthetic;
use repairlab::massage::massage;
use repairlab::rng::keyed_rng;
use repairlab::GeneratorConfig;

/// Audits `n_probes` random rows of the standard dataset against its
/// massage repair. Returns, per probe, (flipped ids reported, plan ∩ neighbours).
pub fn massage_crosscheck(n_probes: usize, seed: u64) -> Vec<(BTreeSet<u64>, BTreeSet<u64>)> {
    let original = generate_synthetic(&GeneratorConfig::standard()).unwrap();
    let outcome = massage(&original).unwrap();
    let plan: BTreeSet<u64> = outcome.plan.promotions.iter().chain(&outcome.plan.demotions).copied().collect();
    assert!(!plan.is_empty());
    let auditor = Auditor::new(&original, &outcome.data, 5, &TrainerConfig::default()).unwrap();
    let mut rng = keyed_rng(seed, 0, 0);
    (0..n_probes)
        .map(|_| {
            let probe = Probe::from_row(&original, rng.gen_range(0..original.len()));
            let finding = auditor.audit(&probe).unwrap();
            let flipped: BTreeSet<u64> = finding.flipped_ids().into_iter().collect();
            let expected = finding.neighbors.iter().map(|n| n.row_id).filter(|id| plan.contains(id)).collect();
            (flipped, expected)
        })
        .collect()
}
