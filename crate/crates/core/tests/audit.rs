mod common;

use repairlab::audit::{audit_probe, audit_sweep, AuditError, Auditor, Probe};
use repairlab::classifiers::{LogisticConfig, TrainerConfig};
use repairlab::data::{generate_synthetic, Schema, Value};
use repairlab::massage::massage;
use repairlab::{Dataset, GeneratorConfig};

fn knn(k: usize) -> TrainerConfig {
    TrainerConfig::Knn { k }
}

#[test]
fn identity_repair_changes_nothing() {
    let d = common::fixtures::ten_rows();
    let (findings, summary) = audit_sweep(&d, &d, &Probe::all_rows(&d), 3, &TrainerConfig::default()).unwrap();
    assert_eq!(findings.len(), 10);
    for f in &findings {
        assert_eq!(f.flip_rate, 0.0);
        assert_eq!(f.mean_distortion, 0.0);
        assert_eq!(f.score_original, f.score_repaired);
        assert!(!f.decision_changed);
        assert_eq!(f.neighbors.len(), 3);
        assert!(!f.neighbors.iter().any(|n| Some(n.row_id) == f.probe_row_id));
    }
    assert_eq!(summary.decision_change_rate, 0.0);
    assert!(!summary.empty);
}

#[test]
fn flipped_neighbours_match_the_massage_plan() {
    for (reported, expected) in common::audit::massage_crosscheck(20, 11) {
        assert_eq!(reported, expected);
    }
}

fn line_data(labels: &[&str]) -> Dataset {
    let schema = Schema::parse("a numeric feature\nz categorical protected\ny categorical label\nfavorable 1\nprivileged p\n").unwrap();
    let xs = [0.1, 0.2, 0.3, 5.0, 6.0, 7.0, 8.0, 9.0];
    let zs = ["p", "u", "p", "u", "p", "u", "p", "u"];
    let rows = xs
        .iter()
        .zip(zs)
        .zip(labels)
        .map(|((&a, z), &y)| vec![Value::Num(a), Value::cat(z), Value::cat(y)])
        .collect();
    Dataset::new(schema, rows).unwrap()
}

#[test]
fn flipping_two_neighbours_changes_a_majority_vote() {
    let original = line_data(&["1", "1", "0", "0", "1", "0", "1", "0"]);
    let repaired = line_data(&["0", "0", "0", "0", "1", "0", "1", "1"]);
    let probe = Probe { row_id: None, record: vec![Value::Num(0.0), Value::cat("u"), Value::cat("0")] };
    let f = audit_probe(&original, &repaired, &probe, 3, &knn(3)).unwrap();
    assert_eq!(f.neighbors.iter().map(|n| n.row_id).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert_eq!(f.flipped_ids(), vec![0, 1]);
    assert!((f.flip_rate - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(f.mean_distortion, 0.0);
    assert!(f.decision_original);
    assert!(!f.decision_repaired);
    assert!(f.decision_changed);
}

#[test]
fn distortion_counts_changed_features() {
    let original = common::fixtures::ten_rows();
    let mut rows = original.rows().to_vec();
    for r in &mut rows {
        r[0] = Value::Num(r[0].as_num().unwrap() + 1.0);
        r[2] = Value::cat("x");
    }
    let repaired = original.with_rows(rows).unwrap();
    let f = audit_probe(&original, &repaired, &Probe::from_row(&original, 0), 4, &knn(3)).unwrap();
    assert!(f.neighbors.iter().all(|n| n.distortion == 2 && !n.flipped));
    assert_eq!(f.mean_distortion, 2.0);
    assert_eq!(f.flip_rate, 0.0);
}

#[test]
fn neighbours_ignore_the_repaired_data() {
    let original = generate_synthetic(&GeneratorConfig { n_rows: 200, ..GeneratorConfig::standard() }).unwrap();
    let repaired = massage(&original).unwrap().data;
    let perm: Vec<usize> = (0..repaired.len()).rev().collect();
    let decoy = repaired.subset(&perm).with_labels(&[(0, true), (1, false)]);
    let cfg = TrainerConfig::Logistic(LogisticConfig { epochs: 20, ..Default::default() });
    let a = Auditor::new(&original, &repaired, 5, &cfg).unwrap();
    let b = Auditor::new(&original, &decoy, 5, &cfg).unwrap();
    for p in Probe::all_rows(&original).iter().step_by(7) {
        assert_eq!(a.neighbors(p).unwrap(), b.neighbors(p).unwrap());
    }
}

#[test]
fn errors() {
    let d = common::fixtures::ten_rows();
    let cfg = knn(3);
    let p = Probe::from_row(&d, 0);
    assert!(matches!(audit_probe(&d, &d, &p, 10, &cfg), Err(AuditError::KTooLarge { k: 10, n: 10 })));
    assert!(matches!(audit_probe(&d, &d, &p, 0, &cfg), Err(AuditError::KTooLarge { .. })));
    let partial = d.subset(&[0, 1, 2, 3, 4, 5, 6, 7, 8]);
    assert!(matches!(audit_probe(&d, &partial, &p, 3, &cfg), Err(AuditError::RowIdMismatch(9))));
    let short = Probe { row_id: None, record: vec![Value::Num(0.0)] };
    assert!(matches!(audit_probe(&d, &d, &short, 3, &cfg), Err(AuditError::ProbeSchema(_))));
}

#[test]
fn empty_sweep() {
    let d = common::fixtures::ten_rows();
    let (f, s) = audit_sweep(&d, &d, &[], 3, &knn(3)).unwrap();
    assert!(f.is_empty());
    assert!(s.empty);
    assert_eq!((s.count, s.mean_flip_rate, s.decision_change_rate), (0, 0.0, 0.0));
}

#[test]
fn massage_changes_some_decisions_on_standard_data() {
    let original = generate_synthetic(&GeneratorConfig::standard()).unwrap();
    let repaired = massage(&original).unwrap().data;
    let (_, s) = audit_sweep(&original, &repaired, &Probe::all_rows(&original), 5, &TrainerConfig::default()).unwrap();
    println!("massage decision-change rate {:.4}, mean flip rate {:.4}", s.decision_change_rate, s.mean_flip_rate);
    assert!(s.mean_flip_rate > 0.0);
    assert!((0.0..=1.0).contains(&s.decision_change_rate));
}

#[test]
fn findings_serialize_one_per_line() {
    let d = common::fixtures::ten_rows();
    let (f, _) = audit_sweep(&d, &d, &Probe::all_rows(&d)[..3], 3, &knn(3)).unwrap();
    let text = repairlab::audit::findings_jsonl(&f);
    assert_eq!(text.lines().count(), 3);
    for (line, finding) in text.lines().zip(&f) {
        let back: repairlab::audit::AuditFinding = serde_json::from_str(line).unwrap();
        assert_eq!(&back, finding);
    }
}
