use cflab::cfspace::{act, CompactOpen};
use cflab::groups::{GroupDescriptor, GroupElement};
use cflab::io::parse_scheme;
use cflab::scheme::CFScheme;
use cflab::suspension::{
    count, poisson_entropy, poisson_entropy_closed_form, refine_sample, sample, transport,
};
use proptest::prelude::*;

fn s1() -> CFScheme {
    parse_scheme(
        r#"{"group": {"kind": "integer-lattice", "params": {"dim": 1}},
            "F": [[[0]], {"box": {"lo": [-1], "hi": [8]}}, {"box": {"lo": [-20], "hi": [120]}}],
            "C": [[[0], [3]], [[0], [30]]]}"#,
    )
    .unwrap()
    .scheme
}

fn cyl(s: &CFScheme, level: usize, x: i64) -> CompactOpen {
    CompactOpen::cylinder(s, level, GroupElement::lattice([x])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_are_additive_over_children(seed: u64, x in -1i64..=8) {
        let s = s1();
        let region = CompactOpen::level_set(&s, 1).unwrap();
        let sample1 = sample(&s, &region, 1, seed).unwrap();
        let parent = count(&s, &sample1, &cyl(&s, 1, x)).unwrap();
        let children: u64 = [x, x + 30].iter().map(|y| count(&s, &sample1, &cyl(&s, 2, *y)).unwrap()).sum();
        prop_assert_eq!(parent, children);
        prop_assert_eq!(sample1.total(), refine_sample(&s, &sample1, 2).unwrap().total());
    }

    #[test]
    fn sampling_is_deterministic(seed: u64) {
        let s = s1();
        let region = CompactOpen::level_set(&s, 1).unwrap();
        prop_assert_eq!(sample(&s, &region, 2, seed).unwrap(), sample(&s, &region, 2, seed).unwrap());
    }

    #[test]
    fn transport_moves_counts(seed: u64, g in -3i64..=3, y in -1i64..=8) {
        let s = s1();
        let region = CompactOpen::level_set(&s, 1).unwrap();
        let x = sample(&s, &region, 1, seed).unwrap();
        let g = GroupElement::lattice([g]);
        let moved = transport(&s, &x, &g, 2).unwrap();
        let k = cyl(&s, 2, y);
        let pulled = act(&s, &s.group().inv(&g), &k, 2).unwrap();
        prop_assume!(pulled.residual.is_empty());
        // skip sets that leave the sampled region
        let Ok(expected) = count(&s, &x, &pulled.image) else { return Ok(()) };
        prop_assert_eq!(count(&s, &moved, &k).unwrap(), expected);
    }

    #[test]
    fn entropy_routines_agree(t in 1e-6f64..1.0) {
        let a = poisson_entropy(t).unwrap();
        let b = poisson_entropy_closed_form(t).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(a > 0.0);
    }
}

#[test]
fn entropy_is_increasing_on_the_unit_interval() {
    let values: Vec<f64> = (1..=100).map(|k| poisson_entropy(k as f64 / 100.0).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert!(poisson_entropy(0.0).unwrap().abs() < 1e-300);
    assert!(poisson_entropy(-1.0).is_err());
}

#[test]
fn other_groups_sample() {
    let g = GroupDescriptor::lattice(2);
    let s = cflab::scheme::build_scheme(&g, 2, &Default::default()).unwrap();
    let region = CompactOpen::level_set(&s, 1).unwrap();
    let x = sample(&s, &region, 2, 11).unwrap();
    assert_eq!(x.total(), count(&s, &x, &region).unwrap());
}
