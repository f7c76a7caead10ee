use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use cflab::groups::{folner_defect, set_inverse, set_product, FiniteSubset, GroupDescriptor, GroupElement};
use num_rational::BigRational;
use proptest::prelude::*;

fn groups() -> Vec<GroupDescriptor> {
    vec![
        GroupDescriptor::integers(),
        GroupDescriptor::lattice(3),
        GroupDescriptor::direct_sum(vec![2, 3]).unwrap(),
        GroupDescriptor::heisenberg(),
    ]
}

fn element(kind: usize) -> BoxedStrategy<GroupElement> {
    match kind {
        0 => (-50i64..50).prop_map(|a| GroupElement::lattice([a])).boxed(),
        1 => prop::array::uniform3(-20i64..20).prop_map(GroupElement::lattice).boxed(),
        2 => prop::collection::vec((0i64..6, 1u32..9), 0..4)
            .prop_map(|pairs| {
                let g = GroupDescriptor::direct_sum(vec![2, 3]).unwrap();
                let pairs: Vec<(u32, i64)> = pairs.into_iter().map(|(r, i)| (i, r)).collect();
                g.direct_sum_element(&pairs).unwrap()
            })
            .boxed(),
        _ => prop::array::uniform3(-30i64..30).prop_map(|[a, b, c]| GroupElement::heisenberg(a, b, c)).boxed(),
    }
}

fn triple() -> impl Strategy<Value = (usize, GroupElement, GroupElement, GroupElement)> {
    (0usize..4).prop_flat_map(|k| (Just(k), element(k), element(k), element(k)))
}

proptest! {
    #[test]
    fn group_axioms((k, a, b, c) in triple()) {
        let g = &groups()[k];
        let e = g.identity();
        let ab_c = g.mul(&g.mul(&a, &b).unwrap(), &c).unwrap();
        let a_bc = g.mul(&a, &g.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(&g.mul(e, &a).unwrap(), &a);
        prop_assert_eq!(&g.mul(&a, e).unwrap(), &a);
        prop_assert_eq!(&g.mul(&a, &g.inv(&a)).unwrap(), e);
        prop_assert_eq!(&g.mul(&g.inv(&a), &a).unwrap(), e);
        prop_assert!(g.validate(&a).is_ok());
    }

    #[test]
    fn norm_is_symmetric_and_subadditive((k, a, b) in (0usize..3).prop_flat_map(|k| (Just(k), element(k), element(k)))) {
        let g = &groups()[k];
        prop_assert_eq!(g.norm(&a), g.norm(&g.inv(&a)));
        prop_assert!(g.norm(&g.mul(&a, &b).unwrap()) <= g.norm(&a) + g.norm(&b));
    }

    #[test]
    fn heisenberg_norm_is_symmetric_and_subadditive(x in prop::array::uniform3(-4i64..4), y in prop::array::uniform3(-4i64..4)) {
        let g = GroupDescriptor::heisenberg();
        let (a, b) = (GroupElement::heisenberg(x[0], x[1], x[2]), GroupElement::heisenberg(y[0], y[1], y[2]));
        prop_assert_eq!(g.norm(&a), g.norm(&g.inv(&a)));
        prop_assert!(g.norm(&g.mul(&a, &b).unwrap()) <= g.norm(&a) + g.norm(&b));
    }

    #[test]
    fn powers_add((k, a, _b, _c) in triple(), m in -6i64..6, n in -6i64..6) {
        let g = &groups()[k];
        let lhs = g.mul(&g.pow(&a, m).unwrap(), &g.pow(&a, n).unwrap()).unwrap();
        prop_assert_eq!(lhs, g.pow(&a, m + n).unwrap());
    }

    #[test]
    fn set_product_is_associative(
        (k, x) in (0usize..4).prop_flat_map(|k| (Just(k), prop::collection::vec(element(k), 1..12))),
    ) {
        let g = &groups()[k];
        let third = x.len() / 3;
        let a = FiniteSubset::from_elements(x[..third.max(1)].iter().cloned());
        let b = FiniteSubset::from_elements(x[third.max(1)..].iter().take(4).cloned());
        let c = FiniteSubset::from_elements(x.iter().rev().take(3).cloned());
        let left = set_product(g, &set_product(g, &a, &b).unwrap(), &c).unwrap();
        let right = set_product(g, &a, &set_product(g, &b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.to_explicit(), right.to_explicit());
        let inv = set_inverse(g, &set_product(g, &a, &b).unwrap());
        let swapped = set_product(g, &set_inverse(g, &b), &set_inverse(g, &a)).unwrap();
        prop_assert_eq!(inv.to_explicit(), swapped.to_explicit());
    }

    #[test]
    fn shapes_agree_with_enumeration(lo in -8i64..8, w in 0i64..10, lo2 in -8i64..8, w2 in 0i64..10, t in -20i64..20) {
        let g = GroupDescriptor::integers();
        let a = FiniteSubset::interval(lo, lo + w);
        let b = FiniteSubset::interval(lo2, lo2 + w2);
        let structural = set_product(&g, &a, &b).unwrap();
        let enumerated = set_product(&g, &a.explicit(), &b.explicit()).unwrap();
        prop_assert_eq!(structural.to_explicit(), enumerated.to_explicit());
        let moved = a.translate(&g, &GroupElement::lattice([t]), g.identity()).unwrap();
        prop_assert_eq!(moved.intersection(&b).0, moved.explicit().intersection(&b.explicit()).0);
        prop_assert_eq!(moved.is_subset(&b), moved.explicit().is_subset(&b.explicit()));
    }

    #[test]
    fn folner_defect_is_the_maximum(lo in -10i64..0, w in 1i64..20, ks in prop::collection::vec(-12i64..12, 1..6)) {
        let g = GroupDescriptor::integers();
        let f = FiniteSubset::interval(lo, lo + w);
        let k = FiniteSubset::from_elements(ks.iter().map(|x| GroupElement::lattice([*x])));
        let (worst, arg) = folner_defect(&g, &f, &k).unwrap();
        let one = |x: i64| folner_defect(&g, &f, &FiniteSubset::singleton(GroupElement::lattice([x]))).unwrap().0;
        for x in &ks {
            prop_assert!(one(*x) <= worst);
        }
        let arg = arg.unwrap();
        prop_assert_eq!(one(arg.coords().unwrap()[0]), worst.clone());
        let size = w + 1;
        let expected = ks.iter().map(|x| 2 * x.abs().min(size)).max().unwrap();
        prop_assert_eq!(worst, BigRational::new(expected.into(), size.into()));
    }
}

/// Shortest-path distances from the identity, using generators and their
/// inverses weighted by their norm.
fn dijkstra(g: &GroupDescriptor, gens: &[GroupElement], radius: u64) -> BTreeMap<GroupElement, u64> {
    let mut dist = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, g.identity().clone())));
    let steps: Vec<(GroupElement, u64)> =
        gens.iter().flat_map(|s| [(s.clone(), g.norm(s)), (g.inv(s), g.norm(s))]).collect();
    while let Some(Reverse((d, x))) = heap.pop() {
        if dist.contains_key(&x) {
            continue;
        }
        dist.insert(x.clone(), d);
        for (s, w) in &steps {
            if d + w <= radius {
                let y = g.mul(&x, s).unwrap();
                if !dist.contains_key(&y) {
                    heap.push(Reverse((d + w, y)));
                }
            }
        }
    }
    dist
}

#[test]
fn shells_match_shortest_paths() {
    let sum = GroupDescriptor::direct_sum(vec![2, 3]).unwrap();
    let sum_gens: Vec<GroupElement> = (1..=7).map(|i| sum.basis(i).unwrap()).collect();
    let cases = [
        (GroupDescriptor::integers(), GroupDescriptor::integers().generators().to_vec(), 9),
        (GroupDescriptor::lattice(2), GroupDescriptor::lattice(2).generators().to_vec(), 7),
        (sum.clone(), sum_gens, 7),
        (GroupDescriptor::heisenberg(), GroupDescriptor::heisenberg().generators().to_vec(), 6),
    ];
    for (g, gens, radius) in cases {
        let dist = dijkstra(&g, &gens, radius);
        for r in 0..=radius {
            let expected: BTreeSet<GroupElement> =
                dist.iter().filter(|(_, d)| **d == r).map(|(x, _)| x.clone()).collect();
            let shell: BTreeSet<GroupElement> = g.shell(r).into_iter().collect();
            assert_eq!(shell, expected, "{:?} radius {r}", g.kind());
            for x in &shell {
                assert_eq!(g.norm(x), r);
            }
        }
    }
}
