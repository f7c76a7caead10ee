//! Exact arithmetic in the supported countable amenable groups: integer
//! lattices, countable direct sums of cyclic groups, and the integer
//! Heisenberg group. Finite subsets, word-norm shells and Følner defects.

mod descriptor;
mod element;
mod subset;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use descriptor::{GroupDescriptor, GroupKind};
pub use element::{Coords, GroupElement, Support};
pub use subset::{
    set_inverse, set_product, FiniteSubset, HeisenbergPara, LatticeBox, SpanCoset, ENUMERATION_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("elements belong to different group kinds")]
    KindMismatch,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("set of {0} elements is too large to enumerate")]
    TooLarge(u128),
}

/// `max_{g ∈ K} #(gF △ F) / #F` together with a maximizing `g`.
///
/// Zero means `F` is invariant under every element of `K`; the value lies in
/// `[0, 2]`.
pub fn folner_defect(
    group: &GroupDescriptor,
    f: &FiniteSubset,
    k: &FiniteSubset,
) -> Result<(BigRational, Option<GroupElement>), GroupError> {
    let size = f.len();
    if size == 0 {
        return Err(GroupError::Domain("Følner defect of the empty set".into()));
    }
    let mut worst = BigRational::from_integer(BigInt::from(0));
    let mut arg = None;
    for g in k.iter() {
        let moved = f.translate(group, &g, group.identity())?;
        let (common, _) = moved.intersection(f);
        let d = BigRational::new(BigInt::from(2 * (size - common)), BigInt::from(size));
        if arg.is_none() || d > worst {
            worst = d;
            arg = Some(g);
        }
    }
    Ok((worst, arg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn interval_defect() {
        let z = GroupDescriptor::integers();
        let one = FiniteSubset::singleton(GroupElement::lattice([1]));
        let (d, g) = folner_defect(&z, &FiniteSubset::interval(0, 9), &one).unwrap();
        assert_eq!(d, r(1, 5));
        assert_eq!(g, Some(GroupElement::lattice([1])));
        let id = FiniteSubset::singleton(z.identity().clone());
        assert_eq!(folner_defect(&z, &FiniteSubset::interval(0, 9), &id).unwrap().0, r(0, 1));
        for h in [10i64, 100, 1000] {
            assert_eq!(folner_defect(&z, &FiniteSubset::interval(0, h - 1), &one).unwrap().0, r(2, h));
        }
    }

    #[test]
    fn empty_set_is_a_domain_error() {
        let z = GroupDescriptor::integers();
        let one = FiniteSubset::singleton(GroupElement::lattice([1]));
        assert!(matches!(folner_defect(&z, &FiniteSubset::default(), &one), Err(GroupError::Domain(_))));
    }
}
