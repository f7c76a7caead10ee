use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use super::{correlation, CompactOpen, MeasureValue, SpaceError};
use crate::groups::{GroupElement, GroupError};
use crate::scheme::{check_square, check_triangle, classify, CFScheme};

/// Orbits of `⟨g⟩` acting on the level-`n` names by left multiplication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub level: usize,
    pub orbit_size: u64,
    pub orbit_count: u128,
    /// The orbits themselves when the level is small enough to list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbits: Option<Vec<Vec<GroupElement>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisplacementLevel {
    pub level: usize,
    pub power: u64,
    /// `μ(T_{g^l} X_n ∩ X_n)`, always zero in a witness.
    #[serde(serialize_with = "crate::cfspace::witness::ser_ratio")]
    pub correlation: MeasureValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreenessWitness {
    InfiniteOrder { g: GroupElement, levels: Vec<DisplacementLevel> },
    Torsion { g: GroupElement, order: u64, invariant_levels: Vec<usize>, partitions: Vec<OrbitPartition> },
}

pub(crate) fn ser_ratio<S: serde::Serializer>(v: &MeasureValue, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

const ORBIT_LIST_LIMIT: u128 = 4096;

/// Operational content of freeness for one element.
///
/// For infinite order `g`, every level `n < budget` where a displacing power
/// `g^l` exists (with `l ≤ l_max`) and `X_n` is small enough to enumerate is
/// recorded along with the exactly computed correlation. For torsion `g`,
/// the invariant levels and the orbit partition of their names are recorded.
pub fn freeness_witness(
    s: &CFScheme,
    g: &GroupElement,
    l_max: u64,
    budget: usize,
) -> Result<FreenessWitness, SpaceError> {
    let group = s.group();
    group.validate(g)?;
    if g == group.identity() {
        return Err(SpaceError::Precondition("g must not be the identity".into()));
    }
    if budget > s.depth() {
        return Err(SpaceError::DepthExceeded { requested: budget, depth: s.depth() });
    }
    match classify(group, g) {
        None => {
            let mut levels = Vec::new();
            for n in 0..budget {
                let Some(l) = check_triangle(s, g, n, l_max)? else { continue };
                let x = CompactOpen::level_set(s, n)?;
                let h = group.pow(g, l as i64)?;
                match correlation(s, &h, &x, &x, n + 1) {
                    Ok(c) if c.is_zero() => levels.push(DisplacementLevel { level: n, power: l, correlation: c }),
                    Ok(_) => {}
                    Err(SpaceError::Group(GroupError::TooLarge(_))) => {}
                    Err(e) => return Err(e),
                }
            }
            if levels.is_empty() {
                return Err(SpaceError::WitnessNotFound(format!(
                    "no level below {budget} has a displacing power of {g} up to {l_max}"
                )));
            }
            Ok(FreenessWitness::InfiniteOrder { g: g.clone(), levels })
        }
        Some(order) => {
            let report = check_square(&s.truncate(budget), g)?;
            let invariant_levels: Vec<usize> =
                report.levels.iter().filter(|l| l.passed()).map(|l| l.level).collect();
            if invariant_levels.is_empty() {
                return Err(SpaceError::WitnessNotFound(format!("no level up to {budget} is invariant under {g}")));
            }
            let mut partitions = Vec::new();
            for &n in &invariant_levels {
                let f = s.f(n);
                let orbits = if f.len() <= ORBIT_LIST_LIMIT { Some(orbit_list(s, g, n)?) } else { None };
                partitions.push(OrbitPartition {
                    level: n,
                    orbit_size: order,
                    orbit_count: f.len() / order as u128,
                    orbits,
                });
            }
            Ok(FreenessWitness::Torsion { g: g.clone(), order, invariant_levels, partitions })
        }
    }
}

fn orbit_list(s: &CFScheme, g: &GroupElement, n: usize) -> Result<Vec<Vec<GroupElement>>, SpaceError> {
    let group = s.group();
    let mut left: BTreeSet<GroupElement> = s.f(n).to_explicit();
    let mut out = Vec::new();
    while let Some(start) = left.pop_first() {
        let mut orbit = vec![start.clone()];
        let mut x = group.mul(g, &start)?;
        while x != start {
            left.remove(&x);
            orbit.push(x.clone());
            x = group.mul(g, &x)?;
        }
        out.push(orbit);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteSubset, GroupDescriptor};
    use crate::scheme::fixtures::s1;
    use crate::scheme::{build_scheme, BuildParams};

    #[test]
    fn integer_witness_at_level_one() {
        let s = s1();
        let w = freeness_witness(&s, &GroupElement::lattice([1]), 100, 2).unwrap();
        let FreenessWitness::InfiniteOrder { levels, .. } = w else { panic!("wrong kind") };
        let one = levels.iter().find(|l| l.level == 1).expect("level 1");
        assert_eq!(one.power, 10);
        assert!(one.correlation.is_zero());
    }

    #[test]
    fn identity_is_rejected() {
        let s = s1();
        assert!(matches!(
            freeness_witness(&s, &GroupElement::lattice([0]), 10, 2),
            Err(SpaceError::Precondition(_))
        ));
    }

    #[test]
    fn torsion_orbits_partition_the_level() {
        let g = GroupDescriptor::direct_sum(vec![2]).unwrap();
        let e1 = g.basis(1).unwrap();
        let params = BuildParams { torsion: vec![e1.clone()], ..BuildParams::default() };
        let s = build_scheme(&g, 2, &params).unwrap();
        let w = freeness_witness(&s, &e1, 10, 2).unwrap();
        let FreenessWitness::Torsion { order, partitions, .. } = w else { panic!("wrong kind") };
        assert_eq!(order, 2);
        for p in partitions {
            let orbits = p.orbits.expect("small level");
            assert_eq!(orbits.len() as u128, p.orbit_count);
            let all: BTreeSet<GroupElement> = orbits.iter().flatten().cloned().collect();
            assert_eq!(FiniteSubset::Explicit(all), *s.f(p.level));
            assert!(orbits.iter().all(|o| o.len() == 2));
        }
    }
}
