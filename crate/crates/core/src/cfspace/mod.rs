//! The truncated (C,F)-space of a scheme: compact open sets as unions of
//! cylinders `[f]_n`, the invariant measure, the partial action with level
//! promotion, and exact correlations.

mod witness;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::groups::{FiniteSubset, GroupElement, GroupError, GroupKind, ENUMERATION_LIMIT};
use crate::scheme::{CFScheme, SchemeError};

pub use witness::{freeness_witness, FreenessWitness};

/// Exact measure of a compact open set.
pub type MeasureValue = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("level {requested} exceeds scheme depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("action of {g} is undefined at budget {budget}")]
    Undefined { g: GroupElement, budget: usize },
    #[error("name {name} is not in F_{level}")]
    NotAName { name: GroupElement, level: usize },
    #[error("{0}")]
    Precondition(String),
    #[error("no witness found: {0}")]
    WitnessNotFound(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Disjoint union of the cylinders `[f]_level`, `f ∈ names`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactOpen {
    level: usize,
    names: FiniteSubset,
}

impl Serialize for CompactOpen {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let names: Vec<GroupElement> = self.names.to_explicit().into_iter().collect();
        let mut st = s.serialize_struct("CompactOpen", 2)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("names", &names)?;
        st.end()
    }
}

impl CompactOpen {
    pub fn new(s: &CFScheme, level: usize, names: FiniteSubset) -> Result<Self, SpaceError> {
        check_depth(s, level)?;
        if let Some(name) = names.escape(s.f(level)) {
            return Err(SpaceError::NotAName { name, level });
        }
        Ok(CompactOpen { level, names })
    }

    pub fn cylinder(s: &CFScheme, level: usize, name: GroupElement) -> Result<Self, SpaceError> {
        Self::new(s, level, FiniteSubset::singleton(name))
    }

    /// `X_n`, the union of all level-`n` cylinders.
    pub fn level_set(s: &CFScheme, level: usize) -> Result<Self, SpaceError> {
        check_depth(s, level)?;
        Ok(CompactOpen { level, names: s.f(level).clone() })
    }

    pub(crate) fn from_parts_unchecked(level: usize, names: FiniteSubset) -> Self {
        CompactOpen { level, names }
    }

    pub fn empty(level: usize) -> Self {
        CompactOpen { level, names: FiniteSubset::default() }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn names(&self) -> &FiniteSubset {
        &self.names
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn explicit(&self) -> Result<BTreeSet<GroupElement>, SpaceError> {
        if self.names.len() > ENUMERATION_LIMIT {
            return Err(GroupError::TooLarge(self.names.len()).into());
        }
        Ok(self.names.to_explicit())
    }
}

fn check_depth(s: &CFScheme, level: usize) -> Result<(), SpaceError> {
    if level > s.depth() {
        return Err(SpaceError::DepthExceeded { requested: level, depth: s.depth() });
    }
    Ok(())
}

fn children(s: &CFScheme, names: &BTreeSet<GroupElement>, level: usize) -> Result<BTreeSet<GroupElement>, SpaceError> {
    let cs = s.c_elements(level + 1);
    let total = names.len() as u128 * cs.len() as u128;
    if total > ENUMERATION_LIMIT {
        return Err(GroupError::TooLarge(total).into());
    }
    let g = s.group();
    let mut out = BTreeSet::new();
    for f in names {
        for c in &cs {
            out.insert(g.mul(f, c)?);
        }
    }
    Ok(out)
}

/// The same set written with level-`m` cylinders.
pub fn refine(s: &CFScheme, a: &CompactOpen, m: usize) -> Result<CompactOpen, SpaceError> {
    check_depth(s, m)?;
    if m < a.level {
        return Err(SpaceError::Precondition(format!("cannot refine level {} to {m}", a.level)));
    }
    if m == a.level {
        return Ok(a.clone());
    }
    let mut names = a.explicit()?;
    for k in a.level..m {
        names = children(s, &names, k)?;
    }
    Ok(CompactOpen { level: m, names: FiniteSubset::Explicit(names) })
}

/// `#names / (#C_1 ⋯ #C_level)`.
pub fn measure(s: &CFScheme, a: &CompactOpen) -> MeasureValue {
    BigRational::new(BigInt::from(a.names.len()), s.c_product(a.level))
}

/// Image and undefined remainder of a partial action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActResult {
    pub image: CompactOpen,
    pub residual: CompactOpen,
}

/// `T_g A`, promoting cylinders one level at a time until `g·f ∈ F_m` or
/// the budget level is reached.
pub fn act(s: &CFScheme, g: &GroupElement, a: &CompactOpen, budget: usize) -> Result<ActResult, SpaceError> {
    check_depth(s, budget)?;
    check_depth(s, a.level)?;
    s.group().validate(g)?;
    let group = s.group();
    let mut current = a.explicit()?;
    let mut images: Vec<(usize, BTreeSet<GroupElement>)> = Vec::new();
    let mut residual = BTreeSet::new();
    let top = budget.max(a.level);
    for k in a.level..=top {
        let fk = s.f(k);
        let mut mapped = BTreeSet::new();
        let mut pending = BTreeSet::new();
        for f in current {
            let h = group.mul(g, &f)?;
            if fk.contains(&h) {
                mapped.insert(h);
            } else {
                pending.insert(f);
            }
        }
        if !mapped.is_empty() {
            images.push((k, mapped));
        }
        if pending.is_empty() {
            current = BTreeSet::new();
            break;
        }
        if k == top {
            residual = pending;
            current = BTreeSet::new();
            break;
        }
        current = children(s, &pending, k)?;
    }
    debug_assert!(current.is_empty());
    let level = images.last().map_or(if residual.is_empty() { a.level } else { top }, |(k, _)| *k);
    let mut names = BTreeSet::new();
    for (k, set) in images {
        let mut set = set;
        for j in k..level {
            set = children(s, &set, j)?;
        }
        names.extend(set);
    }
    Ok(ActResult {
        image: CompactOpen { level, names: FiniteSubset::Explicit(names) },
        residual: CompactOpen { level: top, names: FiniteSubset::Explicit(residual) },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    Intersect,
    Union,
    Subtract,
}

pub fn boolean(s: &CFScheme, op: BoolOp, a: &CompactOpen, b: &CompactOpen) -> Result<CompactOpen, SpaceError> {
    let level = a.level.max(b.level);
    let x = refine(s, a, level)?.explicit()?;
    let y = refine(s, b, level)?.explicit()?;
    let names: BTreeSet<GroupElement> = match op {
        BoolOp::Intersect => x.intersection(&y).cloned().collect(),
        BoolOp::Union => x.union(&y).cloned().collect(),
        BoolOp::Subtract => x.difference(&y).cloned().collect(),
    };
    Ok(CompactOpen { level, names: FiniteSubset::Explicit(names) })
}

/// Whether two compact opens are the same set.
pub fn same_set(s: &CFScheme, a: &CompactOpen, b: &CompactOpen) -> Result<bool, SpaceError> {
    let level = a.level.max(b.level);
    Ok(refine(s, a, level)?.explicit()? == refine(s, b, level)?.explicit()?)
}

/// `μ(T_g A ∩ B)`.
pub fn correlation(
    s: &CFScheme,
    g: &GroupElement,
    a: &CompactOpen,
    b: &CompactOpen,
    budget: usize,
) -> Result<MeasureValue, SpaceError> {
    let moved = act(s, g, a, budget)?;
    if !moved.residual.is_empty() {
        return Err(SpaceError::Undefined { g: g.clone(), budget });
    }
    Ok(measure(s, &boolean(s, BoolOp::Intersect, &moved.image, b)?))
}

/// `(r, max_{g ∈ shell(r)} μ(T_g A ∩ B))` for each requested radius.
pub fn decay_curve(
    s: &CFScheme,
    a: &CompactOpen,
    b: &CompactOpen,
    radii: &[u64],
    budget: usize,
) -> Result<Vec<(u64, MeasureValue)>, SpaceError> {
    radii
        .iter()
        .map(|&r| {
            let shell = s.group().shell(r);
            let values: Vec<MeasureValue> =
                shell.par_iter().map(|g| correlation(s, g, a, b, budget)).collect::<Result<_, _>>()?;
            Ok((r, values.into_iter().max().unwrap_or_else(BigRational::zero)))
        })
        .collect()
}

/// Largest `R` such that the action of every `g` with norm at most `R` is
/// defined on all of `A` at the budget level.
pub fn resolvable_radius(s: &CFScheme, a: &CompactOpen, budget: usize) -> Result<u64, SpaceError> {
    let level = budget.max(a.level);
    check_depth(s, level)?;
    let group = s.group();
    let undefined = || SpaceError::Undefined { g: group.identity().clone(), budget };
    if a.is_empty() {
        return Ok(u64::MAX);
    }
    let f = s.f(level);
    if let (GroupKind::IntegerLattice { dim }, FiniteSubset::Box(bx)) = (group.kind(), f) {
        // g + x ∈ box for all refined names x  ⟺  g lies in a shrunken box
        let names = a.explicit()?;
        let mut r = i64::MAX;
        for k in 0..*dim {
            let coord = |x: &GroupElement| x.coords().expect("lattice element")[k];
            let mut lo = names.iter().map(coord).min().expect("nonempty");
            let mut hi = names.iter().map(coord).max().expect("nonempty");
            for j in a.level + 1..=level {
                let cs = s.c_elements(j);
                lo += cs.iter().map(coord).min().unwrap_or(0);
                hi += cs.iter().map(coord).max().unwrap_or(0);
            }
            r = r.min(bx.hi[k] - hi).min(lo - bx.lo[k]);
        }
        return u64::try_from(r).map_err(|_| undefined());
    }
    let names = refine(s, a, level)?.explicit()?;
    let mut r = 0u64;
    loop {
        let shell = group.shell(r);
        let ok = shell.par_iter().all(|g| names.iter().all(|x| group.mul(g, x).is_ok_and(|h| f.contains(&h))));
        if !ok {
            return if r == 0 { Err(undefined()) } else { Ok(r - 1) };
        }
        if shell.is_empty() {
            // the whole group has been visited
            return Ok(u64::MAX);
        }
        r += 1;
    }
}

/// Exact correlations over every shell up to the resolvable radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationProfile {
    pub radius_limit: u64,
    /// Nonzero shell maxima; every other radius up to the limit is exactly 0.
    pub peaks: BTreeMap<u64, MeasureValue>,
}

impl CorrelationProfile {
    /// One past the largest radius with nonzero correlation.
    pub fn zero_from(&self) -> u64 {
        self.peaks.keys().next_back().map_or(0, |r| r + 1)
    }

    pub fn at(&self, r: u64) -> MeasureValue {
        self.peaks.get(&r).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Whether the shell maxima are nonincreasing on `from..=radius_limit`.
    ///
    /// Radii without a peak are zero, so a peak after a gap is an increase.
    pub fn nonincreasing_from(&self, from: u64) -> bool {
        self.first_increase_from(from).is_none()
    }

    /// First radius at which the maxima stop being nonincreasing after
    /// `from`, if any.
    pub fn first_increase_from(&self, from: u64) -> Option<u64> {
        let mut expected = from;
        let mut prev: Option<&MeasureValue> = None;
        for (r, v) in self.peaks.range(from..=self.radius_limit) {
            if *r != expected || prev.is_some_and(|p| v > p) {
                return Some(*r);
            }
            prev = Some(v);
            expected = r + 1;
        }
        None
    }
}

/// Every nonzero `μ(T_g A ∩ B)` over norms up to [`resolvable_radius`].
///
/// On resolvable elements the correlation equals
/// `#{(a, b) ∈ A_M × B_M : b·a⁻¹ = g} / (#C_1 ⋯ #C_M)` at the budget level
/// `M`, so only differences of names need to be visited.
pub fn correlation_profile(
    s: &CFScheme,
    a: &CompactOpen,
    b: &CompactOpen,
    budget: usize,
) -> Result<CorrelationProfile, SpaceError> {
    let level = budget.max(a.level).max(b.level);
    let limit = resolvable_radius(s, a, level)?;
    let group = s.group();
    let xa: Vec<GroupElement> = refine(s, a, level)?.explicit()?.into_iter().collect();
    let xb: Vec<GroupElement> = refine(s, b, level)?.explicit()?.into_iter().collect();
    let ball: Option<HashMap<GroupElement, u64>> = match group.kind() {
        GroupKind::Heisenberg => {
            let mut m = HashMap::new();
            for r in 0..=limit.min(64) {
                for g in group.shell(r) {
                    m.insert(g, r);
                }
            }
            Some(m)
        }
        _ => None,
    };
    let counts: HashMap<GroupElement, u64> = xb
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<GroupElement, u64>, y| {
            for x in &xa {
                let d = group.mul(y, &group.inv(x)).expect("same group");
                *acc.entry(d).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut x, y| {
            for (k, v) in y {
                *x.entry(k).or_insert(0) += v;
            }
            x
        });
    let denom = s.c_product(level);
    let mut peaks: BTreeMap<u64, u64> = BTreeMap::new();
    for (g, n) in counts {
        let norm = match &ball {
            Some(m) => match m.get(&g) {
                Some(r) => *r,
                None => continue,
            },
            None => group.norm(&g),
        };
        if norm <= limit {
            let e = peaks.entry(norm).or_insert(0);
            *e = (*e).max(n);
        }
    }
    let peaks = peaks.into_iter().map(|(r, n)| (r, BigRational::new(BigInt::from(n), denom.clone()))).collect();
    Ok(CorrelationProfile { radius_limit: limit, peaks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::fixtures::s1;

    fn z(x: i64) -> GroupElement {
        GroupElement::lattice([x])
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn names(v: &[i64]) -> FiniteSubset {
        FiniteSubset::from_elements(v.iter().map(|x| z(*x)))
    }

    #[test]
    fn refinement_examples() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        assert_eq!(refine(&s, &a, 2).unwrap().names, names(&[0, 30]));
        assert_eq!(refine(&s, &a, 1).unwrap(), a);
        let x0 = CompactOpen::level_set(&s, 0).unwrap();
        assert_eq!(refine(&s, &x0, 2).unwrap().names, names(&[0, 3, 30, 33]));
        assert!(matches!(refine(&s, &a, 3), Err(SpaceError::DepthExceeded { .. })));
    }

    #[test]
    fn measure_examples() {
        let s = s1();
        assert_eq!(measure(&s, &CompactOpen::cylinder(&s, 1, z(0)).unwrap()), r(1, 2));
        assert_eq!(measure(&s, &CompactOpen::level_set(&s, 0).unwrap()), r(1, 1));
        assert_eq!(measure(&s, &CompactOpen::level_set(&s, 2).unwrap()), r(141, 4));
    }

    #[test]
    fn act_examples() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        let out = act(&s, &z(3), &a, 2).unwrap();
        assert_eq!(out.image, CompactOpen::cylinder(&s, 1, z(3)).unwrap());
        assert!(out.residual.is_empty());
        let out = act(&s, &z(-2), &a, 2).unwrap();
        assert_eq!((out.image.level, out.image.names.clone()), (2, names(&[-2, 28])));
        assert!(out.residual.is_empty());
        assert_eq!(measure(&s, &out.image), r(1, 2));
        let out = act(&s, &z(0), &a, 2).unwrap();
        assert_eq!(out.image, a);
        let far = act(&s, &z(500), &a, 2).unwrap();
        assert!(far.image.is_empty());
        assert_eq!(measure(&s, &far.residual), r(1, 2));
    }

    #[test]
    fn boolean_examples() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        let b = CompactOpen::cylinder(&s, 1, z(3)).unwrap();
        assert!(same_set(&s, &boolean(&s, BoolOp::Intersect, &a, &a).unwrap(), &a).unwrap());
        assert!(boolean(&s, BoolOp::Intersect, &a, &b).unwrap().is_empty());
        let c = CompactOpen::cylinder(&s, 2, z(0)).unwrap();
        assert_eq!(boolean(&s, BoolOp::Intersect, &a, &c).unwrap(), c);
    }

    #[test]
    fn correlation_examples() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        assert_eq!(correlation(&s, &z(0), &a, &a, 2).unwrap(), r(1, 2));
        assert_eq!(correlation(&s, &z(3), &a, &a, 2).unwrap(), r(0, 1));
        let c = CompactOpen::cylinder(&s, 2, z(0)).unwrap();
        assert_eq!(correlation(&s, &z(-2), &a, &c, 2).unwrap(), r(0, 1));
        assert!(matches!(correlation(&s, &z(500), &a, &a, 2), Err(SpaceError::Undefined { .. })));
    }

    #[test]
    fn decay_curve_matches_profile() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        let profile = correlation_profile(&s, &a, &a, 2).unwrap();
        let radii: Vec<u64> = (0..=profile.radius_limit).collect();
        let curve = decay_curve(&s, &a, &a, &radii, 2).unwrap();
        for (rad, v) in curve {
            assert_eq!(v, profile.at(rad), "radius {rad}");
        }
        assert_eq!(profile.at(0), r(1, 2));
        assert!(decay_curve(&s, &a, &a, &[profile.radius_limit + 1], 2).is_err());
    }

    #[test]
    fn monotone_tail() {
        let p = |v: &[(u64, i64)]| CorrelationProfile {
            radius_limit: 10,
            peaks: v.iter().map(|(k, n)| (*k, r(*n, 8))).collect(),
        };
        assert!(p(&[(0, 4), (1, 3), (2, 3)]).nonincreasing_from(0));
        assert_eq!(p(&[(0, 4), (1, 3), (2, 3)]).zero_from(), 3);
        assert_eq!(p(&[(0, 4), (2, 1)]).first_increase_from(0), Some(2));
        assert_eq!(p(&[(0, 4), (1, 5)]).first_increase_from(0), Some(1));
        assert!(p(&[(0, 4), (6, 1)]).nonincreasing_from(6));
        assert!(p(&[]).nonincreasing_from(0));
    }

    #[test]
    fn rejects_foreign_names() {
        let s = s1();
        assert!(matches!(CompactOpen::cylinder(&s, 1, z(9)), Err(SpaceError::NotAName { .. })));
    }
}
