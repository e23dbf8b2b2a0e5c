use proptest::prelude::*;
use repairlab::postprocess::{ensemble_disagreement, reject_option, Decisions, RejectOptionConfig};

#[test]
fn ensemble_truth_table() {
    for bits in 0u8..8 {
        let votes: Vec<bool> = (0..3).map(|i| bits >> i & 1 == 1).collect();
        for privileged in [false, true] {
            let sets: Vec<Vec<bool>> = votes.iter().map(|&v| vec![v]).collect();
            let d = ensemble_disagreement(&sets, &[privileged]).unwrap();
            let unanimous = votes.iter().all(|&v| v == votes[0]);
            let expected = if unanimous { votes[0] } else { !privileged };
            assert_eq!(d.decisions[0], expected, "votes {votes:?} privileged {privileged}");
            assert_eq!(d.intervened[0], !unanimous);
        }
    }
}

proptest! {
    #[test]
    fn theta_zero_is_thresholding(s in prop::collection::vec(0.0f64..=1.0, 0..50), g in prop::collection::vec(any::<bool>(), 50)) {
        let g = &g[..s.len()];
        let d = reject_option(&s, g, &RejectOptionConfig { theta: 0.0 }).unwrap();
        prop_assert_eq!(d, Decisions::thresholded(&s));
    }

    #[test]
    fn flags_only_inside_the_band(
        s in prop::collection::vec(0.0f64..=1.0, 1..50),
        g in prop::collection::vec(any::<bool>(), 50),
        theta in 0.0f64..=0.5,
    ) {
        let g = &g[..s.len()];
        let d = reject_option(&s, g, &RejectOptionConfig { theta }).unwrap();
        for i in 0..s.len() {
            if d.intervened[i] {
                prop_assert!((s[i] - 0.5).abs() < theta);
            }
        }
    }

    #[test]
    fn row_permutation_commutes(
        s in prop::collection::vec(0.0f64..=1.0, 1..40),
        g in prop::collection::vec(any::<bool>(), 40),
        theta in 0.0f64..=0.5,
        seed in any::<u64>(),
    ) {
        let g = &g[..s.len()];
        let n = s.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + seed as usize % n) % n).collect();
        prop_assume!({ let mut p = perm.clone(); p.sort(); p.dedup(); p.len() == n });
        let cfg = RejectOptionConfig { theta };
        let d = reject_option(&s, g, &cfg).unwrap();
        let ps: Vec<f64> = perm.iter().map(|&i| s[i]).collect();
        let pg: Vec<bool> = perm.iter().map(|&i| g[i]).collect();
        let pd = reject_option(&ps, &pg, &cfg).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(pd.decisions[k], d.decisions[i]);
            prop_assert_eq!(pd.intervened[k], d.intervened[i]);
        }
    }

    #[test]
    fn ensemble_flags_exactly_disagreements(votes in prop::collection::vec(prop::collection::vec(any::<bool>(), 20), 2..5), g in prop::collection::vec(any::<bool>(), 20)) {
        let d = ensemble_disagreement(&votes, &g).unwrap();
        for i in 0..20 {
            let unanimous = votes.iter().all(|v| v[i] == votes[0][i]);
            prop_assert_eq!(d.intervened[i], !unanimous);
        }
    }
}
