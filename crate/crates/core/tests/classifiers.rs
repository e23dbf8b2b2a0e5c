mod common;

use common::fd;
use common::fixtures::{ten_row_arrays, ten_rows};
use proptest::prelude::*;
use repairlab::classifiers::{
    fit_adversarial, fit_logistic, fit_prejudice_remover, logistic_objective, prejudice_index, prejudice_objective,
    sigmoid, train, AdversarialConfig, ClassifierError, EncodedColumn, Encoder, LogisticConfig, LogisticModel, Model,
    Network, PrejudiceConfig, TrainerConfig,
};
use repairlab::data::{generate_synthetic, Schema, Value};
use repairlab::{Dataset, GeneratorConfig};

fn separable() -> Dataset {
    let schema = Schema::parse("u numeric feature\nv numeric feature\nz categorical protected\ny categorical label\nfavorable 1\nprivileged p\n").unwrap();
    let mut rows = Vec::new();
    for i in 0..40 {
        let t = i as f64 / 40.0;
        let (u, v) = ((t * 7.0).sin() * 2.0, (t * 5.0).cos() * 2.0);
        let y = u + v > 0.0;
        let shift = if y { 0.5 } else { -0.5 };
        rows.push(vec![
            Value::Num(u + shift),
            Value::Num(v + shift),
            Value::cat(if i % 2 == 0 { "p" } else { "q" }),
            Value::cat(if y { "1" } else { "0" }),
        ]);
    }
    Dataset::new(schema, rows).unwrap()
}

#[test]
fn separable_data_is_fit_exactly() {
    let d = separable();
    let m = fit_logistic(&d, &LogisticConfig { epochs: 2000, l2: 0.0, learning_rate: 1.0, ..Default::default() }).unwrap();
    assert_eq!(m.train_accuracy, 1.0);
}

#[test]
fn zero_epochs_predict_one_half() {
    let d = ten_rows();
    let m = train(&TrainerConfig::Logistic(LogisticConfig { epochs: 0, ..Default::default() }), &d).unwrap();
    assert!(m.predict(&d).unwrap().scores.iter().all(|&s| s == 0.5));
}

#[test]
fn training_loss_never_rises() {
    let d = generate_synthetic(&GeneratorConfig::standard()).unwrap();
    let m = fit_logistic(&d, &LogisticConfig { learning_rate: 50.0, epochs: 100, ..Default::default() }).unwrap();
    for w in m.losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let (x, y, _) = ten_row_arrays();
    let theta: Vec<f64> = (0..x[0].len() + 1).map(|j| 0.3 * (j as f64 - 2.0)).collect();
    let (_, g) = logistic_objective(&x, &y, &theta, 0.1);
    let num = fd::gradient(|t| logistic_objective(&x, &y, t, 0.1).0, &theta);
    assert!(fd::max_relative_error(&g, &num) < 1e-5);
}

#[test]
fn prejudice_gradient_matches_finite_differences() {
    let (x, y, z) = ten_row_arrays();
    let theta: Vec<f64> = (0..x[0].len() + 1).map(|j| 0.25 * ((j * 7 % 5) as f64 - 2.0)).collect();
    let (_, g) = prejudice_objective(&x, &y, &z, &theta, 0.1, 3.0, 1e-9);
    let num = fd::gradient(|t| prejudice_objective(&x, &y, &z, t, 0.1, 3.0, 1e-9).0, &theta);
    assert!(fd::max_relative_error(&g, &num) < 1e-4);
}

#[test]
fn adversarial_gradient_matches_finite_differences() {
    let (x, y, z) = ten_row_arrays();
    let (x, y) = (&x[..8], &y[..8]);
    let z: Vec<f64> = z[..8].iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
    let mut net = Network::init(x[0].len(), 3, 1.5, 42);
    net.bb = 0.2;
    let theta = net.main_params();
    let (_, g) = net.main_objective(x, y, &z, 0.7);
    let num = fd::gradient(
        |t| {
            let mut n = net.clone();
            n.set_main_params(t);
            n.main_objective(x, y, &z, 0.7).0
        },
        &theta,
    );
    assert!(fd::max_relative_error(&g, &num) < 1e-4);
}

#[test]
fn eta_zero_matches_plain_logistic() {
    let d = generate_synthetic(&GeneratorConfig::standard()).unwrap();
    let cfg = LogisticConfig::default();
    let plain = fit_logistic(&d, &cfg).unwrap();
    let pr = fit_prejudice_remover(&d, &PrejudiceConfig { eta: 0.0, ..Default::default() }, &cfg).unwrap();
    assert_eq!(plain.weights, pr.weights);
    assert_eq!(plain.intercept, pr.intercept);
    assert_eq!(plain.losses, pr.losses);
}

#[test]
fn group_blind_features_give_zero_prejudice() {
    // The only feature is independent of z by construction.
    let schema = Schema::parse("f categorical feature\nz categorical protected\ny categorical label\nfavorable 1\nprivileged p\n").unwrap();
    let rows = (0..40)
        .map(|i| {
            vec![
                Value::cat(if i % 2 == 0 { "a" } else { "b" }),
                Value::cat(if (i / 2) % 2 == 0 { "p" } else { "q" }),
                Value::cat(if i % 4 < 3 && i % 2 == 0 { "1" } else { "0" }),
            ]
        })
        .collect();
    let d = Dataset::new(schema, rows).unwrap();
    let m = train(&TrainerConfig::Logistic(LogisticConfig::default()), &d).unwrap();
    let s = m.predict(&d).unwrap().scores;
    assert!(prejudice_index(&s, &d.groups(), 1e-9) < 1e-6);
}

#[test]
fn prejudice_index_hand_value() {
    // m_priv = 0.8, m_unpriv = 0.2, P(z) = 1/2 -> m = 0.5.
    let pi = prejudice_index(&[0.8, 0.8, 0.2, 0.2], &[true, true, false, false], 1e-9);
    let expect = 0.8 * (1.6f64).ln() + 0.2 * (0.4f64).ln();
    assert!((pi - expect).abs() < 1e-12);
}

#[test]
fn prejudice_index_falls_with_eta() {
    let d = generate_synthetic(&GeneratorConfig::standard()).unwrap();
    let cfg = LogisticConfig::default();
    let pis: Vec<f64> = [0.0, 1.0, 10.0]
        .iter()
        .map(|&eta| {
            let m = fit_prejudice_remover(&d, &PrejudiceConfig { eta, ..Default::default() }, &cfg).unwrap();
            let s = Model::Logistic(m).predict(&d).unwrap().scores;
            prejudice_index(&s, &d.groups(), 1e-9)
        })
        .collect();
    println!("PI by eta: {pis:?}");
    assert!(pis[1] <= pis[0] + 1e-6 && pis[2] <= pis[1] + 1e-6);
}

fn proxy_data() -> Dataset {
    generate_synthetic(&GeneratorConfig { proxy_correlation: 1.0, ..GeneratorConfig::standard() }).unwrap()
}

fn majority_rate(d: &Dataset) -> f64 {
    let p = d.groups().iter().filter(|&&g| g).count() as f64 / d.len() as f64;
    p.max(1.0 - p)
}

#[test]
fn adversary_is_blinded_by_lambda() {
    let d = proxy_data();
    let base = majority_rate(&d);
    let open = fit_adversarial(&d, &AdversarialConfig { lambda: 0.0, ..Default::default() }).unwrap();
    let blind = fit_adversarial(&d, &AdversarialConfig { lambda: 1.0, ..Default::default() }).unwrap();
    println!("baseline {base:.3} open {:.3} blind {:.3}", open.adversary_accuracy, blind.adversary_accuracy);
    assert!(open.adversary_accuracy >= base + 0.20);
    assert!((blind.adversary_accuracy - base).abs() <= 0.05);
}

#[test]
fn lambda_zero_predictor_ignores_the_adversary() {
    let d = proxy_data();
    let cfg = AdversarialConfig { lambda: 0.0, epochs: 50, ..Default::default() };
    let with = fit_adversarial(&d, &cfg).unwrap();
    let frozen = fit_adversarial(&d, &AdversarialConfig { adversary_learning_rate: 0.0, ..cfg }).unwrap();
    assert_eq!(with.network.main_params(), frozen.network.main_params());
    assert_ne!(with.network.wb, frozen.network.wb);
}

#[test]
fn training_is_bitwise_deterministic() {
    let d = ten_rows();
    let a = fit_adversarial(&d, &AdversarialConfig { epochs: 30, ..Default::default() }).unwrap();
    let b = fit_adversarial(&d, &AdversarialConfig { epochs: 30, ..Default::default() }).unwrap();
    assert_eq!(a, b);
    let c = fit_adversarial(&d, &AdversarialConfig { epochs: 30, seed: 1, ..Default::default() }).unwrap();
    assert_ne!(a.network.w1, c.network.w1);
    let pr = |d: &Dataset| fit_prejudice_remover(d, &PrejudiceConfig::default(), &LogisticConfig::default()).unwrap();
    assert_eq!(pr(&d).losses, pr(&d).losses);
}

#[test]
fn predictions_are_pure() {
    let d = ten_rows();
    for cfg in [
        TrainerConfig::Logistic(LogisticConfig::default()),
        TrainerConfig::Adversarial(AdversarialConfig { epochs: 20, ..Default::default() }),
        TrainerConfig::NaiveBayes,
        TrainerConfig::Knn { k: 3 },
    ] {
        let m = train(&cfg, &d).unwrap();
        let a = m.predict(&d).unwrap().scores;
        assert_eq!(a, m.predict(&d).unwrap().scores);
        let dup = Dataset::new(d.schema().clone(), vec![d.row(4).clone(), d.row(4).clone()]).unwrap();
        let s = m.predict(&dup).unwrap().scores;
        assert_eq!(s[0], s[1]);
        assert_eq!(s[0], a[4]);
        let json = serde_json::to_string(&m).unwrap();
        let back: Model = serde_json::from_str(&json).unwrap();
        assert_eq!(back.predict(&d).unwrap().scores, a, "{}", cfg.name());
    }
}

#[test]
fn final_epoch_scores_reproduce() {
    let d = ten_rows();
    let m = fit_logistic(&d, &LogisticConfig::default()).unwrap();
    let (x, _) = m.encoder.encode(&d).unwrap();
    let y: Vec<f64> = d.labels().into_iter().map(|v| if v { 1.0 } else { 0.0 }).collect();
    let (loss, _) = logistic_objective(&x, &y, &m.theta(), m.config.l2);
    assert_eq!(loss, *m.losses.last().unwrap());
}

#[test]
fn hand_set_weights_score_the_intercept() {
    let schema = Schema::parse("a numeric feature\nz categorical protected\ny categorical label\nfavorable 1\nprivileged p\n").unwrap();
    let d = Dataset::new(schema, vec![vec![Value::Num(0.0), Value::cat("p"), Value::cat("1")], vec![Value::Num(0.0), Value::cat("q"), Value::cat("0")]]).unwrap();
    let m = Model::Logistic(LogisticModel {
        encoder: Encoder { columns: vec![EncodedColumn::Numeric { name: "a".into(), mean: 0.0, std: 1.0 }] },
        weights: vec![2.0],
        intercept: -0.7,
        config: LogisticConfig::default(),
        losses: vec![],
        eta: 0.0,
        train_accuracy: 0.0,
    });
    assert_eq!(m.predict(&d).unwrap().scores, vec![sigmoid(-0.7); 2]);
}

#[test]
fn unseen_level_warns_and_encodes_zero() {
    let d = ten_rows();
    let m = train(&TrainerConfig::Logistic(LogisticConfig::default()), &d).unwrap();
    let mut rows = d.rows().to_vec();
    rows[0][2] = Value::cat("violet");
    let other = d.with_rows(rows).unwrap();
    let p = m.predict(&other).unwrap();
    assert_eq!(p.warnings.len(), 1);
    assert!(p.warnings[0].contains("`c`"));
}

#[test]
fn trainers_reject_degenerate_data() {
    let d = ten_rows();
    let one_class = d.subset(&[0, 2, 3]);
    assert!(matches!(fit_logistic(&one_class, &LogisticConfig::default()), Err(ClassifierError::SingleClassDataset)));
    let one_group = d.subset(&[0, 4, 7]);
    assert!(matches!(
        fit_adversarial(&one_group, &AdversarialConfig::default()),
        Err(ClassifierError::SingleGroupDataset)
    ));
    let missing = Schema::parse("q numeric feature\nz categorical protected\ny categorical label\nfavorable 1\nprivileged p\n").unwrap();
    let other = Dataset::new(missing, vec![vec![Value::Num(1.0), Value::cat("p"), Value::cat("1")], vec![Value::Num(1.0), Value::cat("u"), Value::cat("0")]]).unwrap();
    let m = train(&TrainerConfig::Logistic(LogisticConfig::default()), &d).unwrap();
    assert!(matches!(m.predict(&other), Err(ClassifierError::EncodingMismatch(_))));
}

#[test]
fn trainer_config_parses_from_toml() {
    let c: TrainerConfig = toml::from_str("kind = \"prejudice_remover\"\n[prejudice]\neta = 10.0\n").unwrap();
    assert!(matches!(c, TrainerConfig::PrejudiceRemover { ref prejudice, .. } if prejudice.eta == 10.0));
    let c: TrainerConfig = toml::from_str("kind = \"logistic\"\nepochs = 5\n").unwrap();
    assert!(matches!(c, TrainerConfig::Logistic(LogisticConfig { epochs: 5, .. })));
    assert!(toml::from_str::<TrainerConfig>("kind = \"logistic\"\nepoch = 5\n").is_err());
}

proptest! {
    #[test]
    fn prejudice_index_is_non_negative(
        s in prop::collection::vec(0.0f64..=1.0, 2..30),
        g in prop::collection::vec(any::<bool>(), 30),
    ) {
        let g = &g[..s.len()];
        prop_assert!(prejudice_index(&s, g, 1e-9) >= -1e-8);
    }

    #[test]
    fn logistic_loss_is_convex(
        a in prop::collection::vec(-3.0f64..3.0, 9),
        b in prop::collection::vec(-3.0f64..3.0, 9),
    ) {
        let (x, y, _) = ten_row_arrays();
        let d = x[0].len() + 1;
        let (a, b) = (&a[..d], &b[..d]);
        let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
        let f = |t: &[f64]| logistic_objective(&x, &y, t, 0.01).0;
        prop_assert!(f(&mid) <= 0.5 * (f(a) + f(b)) + 1e-12);
    }
}
