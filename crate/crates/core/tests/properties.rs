use proptest::prelude::*;

use hubs_core::attachment::{AttachmentFunction, PhiTable};
use hubs_core::ctbp::{run_ctbp, CtbpOptions, StopRule};
use hubs_core::graphsim::{grow, leader_of, race, GrowOptions};
use hubs_core::pointproc::{hypoexp_cdf, DuplicatePolicy, HypoexpSpec};
use hubs_core::rng::derive_stream;
use hubs_core::sampling::WeightIndex;
use hubs_core::stats::{histogram, total_variation, wilson_interval, Z95};
use hubs_core::{AttachmentSequence, ReplicateSeed};
use rand::Rng;

fn attachment() -> impl Strategy<Value = AttachmentFunction> {
    prop_oneof![
        (0.05f64..1.0).prop_map(|a| AttachmentFunction::power(a).unwrap()),
        (0.1f64..3.0).prop_map(|a| AttachmentFunction::affine(a).unwrap()),
        (0.2f64..5.0).prop_map(|c| AttachmentFunction::constant(c).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_columns_are_prefix_sums(f in attachment(), h in 8usize..512) {
        let t = PhiTable::build(&f, h).unwrap();
        for l in 0..h {
            let r = 1.0 / f.eval_f(l as u64).unwrap();
            let d1 = t.at(1, l + 1).unwrap() - t.at(1, l).unwrap();
            let d2 = t.at(2, l + 1).unwrap() - t.at(2, l).unwrap();
            prop_assert!((d1 - r).abs() <= 1e-12 * t.at(1, l + 1).unwrap().max(1.0));
            prop_assert!((d2 - r * r).abs() <= 1e-12 * t.at(2, l + 1).unwrap().max(1.0));
            prop_assert!(d1 > 0.0);
        }
    }

    #[test]
    fn k_is_phi2_at_integer_points_and_inverts(f in attachment(), j in 1usize..200) {
        let t = PhiTable::build(&f, 256).unwrap();
        let p1 = t.at(1, j).unwrap();
        let k = t.k_of(p1).unwrap();
        prop_assert!((k - t.at(2, j).unwrap()).abs() <= 1e-12 * k.max(1.0));
        prop_assert!((t.phi1_inverse(p1).unwrap() - j as f64).abs() < 1e-9);
        let back = t.k_inverse(k).unwrap();
        prop_assert!((back - p1).abs() <= 1e-9 * p1.max(1.0));
    }

    #[test]
    fn k_is_non_decreasing(f in attachment(), a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let t = PhiTable::covering(&f, 5.0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(t.k_of(lo).unwrap() <= t.k_of(hi).unwrap());
    }

    #[test]
    fn weight_index_prefix_sums_match_naive(ops in proptest::collection::vec((0usize..64, 0.0f64..10.0), 1..300), u in 0.0f64..1.0) {
        let mut idx = WeightIndex::with_capacity(2);
        let mut naive: Vec<f64> = Vec::new();
        for (i, w) in ops {
            if naive.is_empty() || i >= naive.len() {
                idx.push(w);
                naive.push(w);
            } else {
                idx.set(i, w);
                naive[i] = w;
            }
        }
        prop_assert_eq!(idx.values(), &naive[..]);
        prop_assert!(idx.drift() < 1e-12);
        let total: f64 = naive.iter().sum();
        prop_assert!((idx.total() - total).abs() <= 1e-9 * total.max(1.0));
        for i in 0..naive.len() {
            let p: f64 = naive[..i].iter().sum();
            prop_assert!((idx.prefix(i) - p).abs() <= 1e-9 * total.max(1.0));
        }
        if total > 0.0 {
            let s = idx.sample(u);
            prop_assert!(naive[s] > 0.0);
            let target = u * total;
            prop_assert!(idx.prefix(s) <= target + 1e-9 * total);
            prop_assert!(idx.prefix(s) + naive[s] >= target - 1e-9 * total);
        }
    }

    #[test]
    fn hypoexp_cdf_is_a_cdf(rates in proptest::collection::vec(0.1f64..5.0, 1..8), t1 in 0.0f64..5.0, dt in 0.0f64..5.0) {
        let spec = HypoexpSpec::new(rates, DuplicatePolicy::Perturb).unwrap();
        let a = hypoexp_cdf(&spec, t1).unwrap().p;
        let b = hypoexp_cdf(&spec, t1 + dt).unwrap().p;
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&a));
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn closed_form_and_grid_agree(rates in proptest::collection::vec(0.2f64..4.0, 1..6), t in 0.1f64..6.0) {
        prop_assume!(rates.iter().enumerate().all(|(i, a)| rates[..i].iter().all(|b| (a - b).abs() > 0.05)));
        let exact = hypoexp_cdf(&HypoexpSpec::new(rates.clone(), DuplicatePolicy::ExactDistinct).unwrap(), t).unwrap().p;
        let grid = hypoexp_cdf(&HypoexpSpec::new(rates, DuplicatePolicy::ConvolveGrid).unwrap(), t).unwrap().p;
        prop_assert!((exact - grid).abs() < 1e-3, "{exact} vs {grid}");
    }

    #[test]
    fn growth_invariants(f in attachment(), n in 1u64..400, seed in any::<u64>()) {
        let cps: Vec<u64> = (1..=n).filter(|c| c % 37 == 0 || *c == n).collect();
        let opts = GrowOptions { keep_degrees: true, ..Default::default() };
        let rec = grow(&f, &AttachmentSequence::Constant { m: 1 }, n, &cps, ReplicateSeed::new(seed, 0), &opts).unwrap();
        let deg = rec.final_degrees.as_ref().unwrap();
        prop_assert_eq!(deg.len() as u64, n + 1);
        prop_assert_eq!(deg.iter().map(|&d| d as u64).sum::<u64>(), 2 * n);
        prop_assert!(deg.iter().all(|&d| d >= 1));
        let last = rec.checkpoints.last().unwrap();
        prop_assert_eq!(last.k, n);
        prop_assert_eq!(last.leader_index as usize, leader_of(deg));
        prop_assert_eq!(last.d_max, *deg.iter().max().unwrap());
        prop_assert!(rec.checkpoints.windows(2).all(|w| w[0].leader_changes <= w[1].leader_changes && w[0].d_max <= w[1].d_max));
    }

    #[test]
    fn race_paths_move_one_coordinate(f in attachment(), a in 1u32..5, b in 1u32..5, steps in 0usize..200, seed in any::<u64>()) {
        let r = race(&f, (a, b), steps, &mut derive_stream(seed, 0, "race")).unwrap();
        prop_assert_eq!(r.path.len(), steps + 1);
        for w in r.path.windows(2) {
            prop_assert_eq!((w[1].0 - w[0].0) + (w[1].1 - w[0].1), 1);
        }
        // a strict lead can only switch sides through a tie
        prop_assert!(r.lead_changes <= r.tie_visits);
    }

    #[test]
    fn branching_trajectory_is_a_tree(f in attachment(), n in 1usize..300, seed in any::<u64>()) {
        let bp = run_ctbp(&f, StopRule::Size { n }, ReplicateSeed::new(seed, 0), &CtbpOptions::default()).unwrap();
        prop_assert_eq!(bp.births.len(), n + 1);
        prop_assert!(bp.births.windows(2).all(|w| w[0].time <= w[1].time));
        for (i, b) in bp.births.iter().enumerate().skip(1) {
            prop_assert!((b.parent as usize) < i);
            prop_assert!(bp.births[b.parent as usize].time <= b.time);
        }
        let children = bp.child_counts(bp.end_time);
        prop_assert_eq!(children.iter().map(|&c| c as usize).sum::<usize>(), n);
        let mid = 0.5 * bp.end_time;
        prop_assert!(bp.size_at(mid) <= bp.size_at(bp.end_time));
    }

    #[test]
    fn total_variation_is_a_metric_value(a in proptest::collection::vec(0u8..6, 1..200), b in proptest::collection::vec(0u8..6, 1..200)) {
        let (ha, hb) = (histogram(a), histogram(b));
        let d = total_variation(&ha, &hb);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - total_variation(&hb, &ha)).abs() < 1e-12);
        prop_assert_eq!(total_variation(&ha, &ha), 0.0);
    }

    #[test]
    fn wilson_interval_contains_the_estimate(n in 1u64..10_000, frac in 0.0f64..=1.0) {
        let k = (frac * n as f64).round() as u64;
        let (lo, hi) = wilson_interval(k, n, Z95);
        let p = k as f64 / n as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn streams_are_reproducible(master in any::<u64>(), rep in any::<u64>()) {
        let x: [u64; 4] = derive_stream(master, rep, "p").random();
        let y: [u64; 4] = derive_stream(master, rep, "p").random();
        let z: [u64; 4] = derive_stream(master, rep, "q").random();
        prop_assert_eq!(x, y);
        prop_assert_ne!(x, z);
    }
}
