use proptest::prelude::*;
use sumset_core::interval::coverage_at_least;
use sumset_core::{Interval, IntervalSet};

fn intervals() -> impl Strategy<Value = Vec<Interval>> {
    prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0), 0..20)
        .prop_map(|v| v.into_iter().map(|(lo, len)| Interval::new(lo, lo + len)).collect())
}

proptest! {
    #[test]
    fn union_matches_membership(ivs in intervals(), probes in prop::collection::vec(-12.0f64..12.0, 50)) {
        let set = IntervalSet::from_intervals(ivs.iter().copied());
        for x in probes {
            prop_assert_eq!(set.contains(x), ivs.iter().any(|iv| iv.contains(x)));
        }
        prop_assert!(set.measure() <= ivs.iter().map(|i| i.length()).sum::<f64>() + 1e-12);
        for w in set.intervals().windows(2) {
            prop_assert!(w[0].hi < w[1].lo);
        }
    }

    #[test]
    fn coverage_counts_by_brute_force(ivs in intervals(), k in 1usize..4, probes in prop::collection::vec(-12.0f64..12.0, 50)) {
        let set = coverage_at_least(&ivs, k);
        for x in probes {
            let count = ivs.iter().filter(|iv| iv.contains(x)).count();
            prop_assert_eq!(set.contains(x), count >= k, "x = {}, count = {}", x, count);
        }
    }

    #[test]
    fn coverage_is_nested(ivs in intervals(), k in 1usize..4) {
        let deeper = coverage_at_least(&ivs, k + 1);
        let shallower = coverage_at_least(&ivs, k);
        prop_assert!(deeper.measure() <= shallower.measure() + 1e-12);
        for iv in deeper.intervals() {
            prop_assert!(shallower.contains(iv.center()));
        }
    }
}
