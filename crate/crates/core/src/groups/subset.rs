use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::element::{Coords, GroupElement, Support};
use super::{GroupDescriptor, GroupError};

/// Largest set that generic code will enumerate element by element.
pub const ENUMERATION_LIMIT: u128 = 20_000_000;

/// Axis-aligned box `lo ≤ x ≤ hi` in `Z^d` (never empty).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: Coords,
    pub hi: Coords,
}

/// Sheared box in Heisenberg coordinates:
/// `a ∈ [a.0, a.1]`, `b ∈ [b.0, b.1]`, `c - p·a - q·b ∈ [c.0, c.1]`.
///
/// Boxes are the case `p = q = 0`. The family is closed under left and right
/// translation, which is what makes translates `g·F·h` of a box exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeisenbergPara {
    pub a: (i64, i64),
    pub b: (i64, i64),
    pub c: (i64, i64),
    #[serde(default)]
    pub p: i64,
    #[serde(default)]
    pub q: i64,
}

/// Coset `offset + ⟨e_1, …, e_width⟩` of a direct sum; `offset` is supported
/// on indices above `width` (empty for the subgroup itself).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpanCoset {
    pub width: u32,
    pub offset: Support,
    pub orders: Vec<u32>,
}

/// A finite set of group elements.
///
/// Small or irregular sets are stored explicitly. The level sets of built
/// schemes grow far beyond what can be listed, so boxes, sheared Heisenberg
/// boxes and direct-sum cosets are stored by their parameters; membership
/// and cardinality are exact for every representation.
#[derive(Clone, Debug)]
pub enum FiniteSubset {
    Explicit(BTreeSet<GroupElement>),
    Box(LatticeBox),
    Para(HeisenbergPara),
    Span(SpanCoset),
}

impl Default for FiniteSubset {
    fn default() -> Self {
        FiniteSubset::Explicit(BTreeSet::new())
    }
}

impl LatticeBox {
    pub fn new(lo: Coords, hi: Coords) -> Option<Self> {
        (lo.len() == hi.len() && lo.iter().zip(&hi).all(|(l, h)| l <= h)).then_some(LatticeBox { lo, hi })
    }

    /// Centered box `[-r_i, r_i]` per coordinate.
    pub fn centered(radii: &[i64]) -> Self {
        LatticeBox { lo: radii.iter().map(|r| -r).collect(), hi: radii.iter().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> u128 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as u128).product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.lo.len() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }

    pub fn shift(&self, v: &[i64]) -> Self {
        LatticeBox {
            lo: self.lo.iter().zip(v).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn negate(&self) -> Self {
        LatticeBox { lo: self.hi.iter().map(|x| -x).collect(), hi: self.lo.iter().map(|x| -x).collect() }
    }

    /// Minkowski sum.
    pub fn add(&self, other: &Self) -> Self {
        LatticeBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        LatticeBox::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect(),
        )
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a >= b) && self.hi.iter().zip(&other.hi).all(|(a, b)| a <= b)
    }

    fn points(&self) -> impl Iterator<Item = Coords> + '_ {
        let d = self.dim();
        let mut cur: Option<Coords> = Some(self.lo.clone());
        std::iter::from_fn(move || {
            let out = cur.clone()?;
            let mut next = out.clone();
            let mut k = d;
            loop {
                if k == 0 {
                    cur = None;
                    break;
                }
                k -= 1;
                if next[k] < self.hi[k] {
                    next[k] += 1;
                    for j in k + 1..d {
                        next[j] = self.lo[j];
                    }
                    cur = Some(next);
                    break;
                }
            }
            Some(out)
        })
    }
}

impl HeisenbergPara {
    pub fn boxed(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> Option<Self> {
        let p = HeisenbergPara { a, b, c, p: 0, q: 0 };
        p.is_valid().then_some(p)
    }

    pub fn is_valid(&self) -> bool {
        self.a.0 <= self.a.1 && self.b.0 <= self.b.1 && self.c.0 <= self.c.1
    }

    pub fn is_box(&self) -> bool {
        self.p == 0 && self.q == 0
    }

    pub fn len(&self) -> u128 {
        [self.a, self.b, self.c].iter().map(|(l, h)| (h - l + 1) as u128).product()
    }

    /// `c`-range over the fibre above `(a, b)`.
    pub fn fibre(&self, a: i64, b: i64) -> (i64, i64) {
        let s = self.p * a + self.q * b;
        (self.c.0 + s, self.c.1 + s)
    }

    pub fn contains(&self, t: [i64; 3]) -> bool {
        let [a, b, c] = t;
        if a < self.a.0 || a > self.a.1 || b < self.b.0 || b > self.b.1 {
            return false;
        }
        let (lo, hi) = self.fibre(a, b);
        lo <= c && c <= hi
    }

    /// `{ g·x : x ∈ self }`.
    pub fn left_translate(&self, g: [i64; 3]) -> Self {
        let [x, y, z] = g;
        let shift = z - x * y - self.p * x - self.q * y;
        HeisenbergPara {
            a: (self.a.0 + x, self.a.1 + x),
            b: (self.b.0 + y, self.b.1 + y),
            c: (self.c.0 + shift, self.c.1 + shift),
            p: self.p,
            q: self.q + x,
        }
    }

    /// `{ x·h : x ∈ self }`.
    pub fn right_translate(&self, h: [i64; 3]) -> Self {
        let [u, v, w] = h;
        let shift = w - u * v - self.p * u - self.q * v;
        HeisenbergPara {
            a: (self.a.0 + u, self.a.1 + u),
            b: (self.b.0 + v, self.b.1 + v),
            c: (self.c.0 + shift, self.c.1 + shift),
            p: self.p + v,
            q: self.q,
        }
    }

    /// The eight extreme points `(a, b, t)` with `c = t + p·a + q·b`.
    pub fn vertices(&self) -> [[i64; 3]; 8] {
        let mut out = [[0; 3]; 8];
        let mut k = 0;
        for a in [self.a.0, self.a.1] {
            for b in [self.b.0, self.b.1] {
                for t in [self.c.0, self.c.1] {
                    out[k] = [a, b, t + self.p * a + self.q * b];
                    k += 1;
                }
            }
        }
        out
    }

    /// Bounding box `[min, max]` per coordinate.
    pub fn bounds(&self) -> [(i64, i64); 3] {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for v in self.vertices() {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        [(lo[0], hi[0]), (lo[1], hi[1]), (lo[2], hi[2])]
    }

    /// Number of common points and the least common point (lexicographic).
    pub fn intersection(&self, other: &Self) -> (u128, Option<[i64; 3]>) {
        let a = (self.a.0.max(other.a.0), self.a.1.min(other.a.1));
        let b = (self.b.0.max(other.b.0), self.b.1.min(other.b.1));
        if a.0 > a.1 || b.0 > b.1 {
            return (0, None);
        }
        let overlap = |x: i64, y: i64| -> i64 {
            let (l1, h1) = self.fibre(x, y);
            let (l2, h2) = other.fibre(x, y);
            (h1.min(h2) - l1.max(l2) + 1).max(0)
        };
        let first = |x: i64, y: i64| -> i64 {
            let (l1, _) = self.fibre(x, y);
            let (l2, _) = other.fibre(x, y);
            l1.max(l2)
        };
        let dp = self.p - other.p;
        let dq = self.q - other.q;
        let mut count: u128 = 0;
        let mut witness = None;
        if dp == 0 {
            // fibre overlap depends on b only
            let mut per_a: u128 = 0;
            for y in b.0..=b.1 {
                let o = overlap(a.0, y);
                if o > 0 {
                    per_a += o as u128;
                    if witness.is_none() {
                        witness = Some([a.0, y, first(a.0, y)]);
                    }
                }
            }
            count = per_a * (a.1 - a.0 + 1) as u128;
        } else if dq == 0 {
            let mut per_b: u128 = 0;
            for x in a.0..=a.1 {
                let o = overlap(x, b.0);
                if o > 0 {
                    per_b += o as u128;
                    if witness.is_none() {
                        witness = Some([x, b.0, first(x, b.0)]);
                    }
                }
            }
            count = per_b * (b.1 - b.0 + 1) as u128;
        } else {
            for x in a.0..=a.1 {
                for y in b.0..=b.1 {
                    let o = overlap(x, y);
                    if o > 0 {
                        count += o as u128;
                        if witness.is_none() {
                            witness = Some([x, y, first(x, y)]);
                        }
                    }
                }
            }
        }
        (count, witness)
    }

    /// Least point (lexicographic) of `self` outside the box `target`, if any.
    pub fn escape_from_box(&self, target: &HeisenbergPara) -> Option<[i64; 3]> {
        debug_assert!(target.is_box());
        let [a, b, c] = self.bounds();
        if target.a.0 <= a.0 && a.1 <= target.a.1 && target.b.0 <= b.0 && b.1 <= target.b.1 && target.c.0 <= c.0 && c.1 <= target.c.1
        {
            return None;
        }
        for a in self.a.0..=self.a.1 {
            if a < target.a.0 || a > target.a.1 {
                let (lo, _) = self.fibre(a, self.b.0);
                return Some([a, self.b.0, lo]);
            }
            for b in self.b.0..=self.b.1 {
                let (lo, hi) = self.fibre(a, b);
                if b < target.b.0 || b > target.b.1 || lo < target.c.0 {
                    return Some([a, b, lo]);
                }
                if hi > target.c.1 {
                    return Some([a, b, lo.max(target.c.1 + 1)]);
                }
            }
        }
        None
    }

    fn points(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        (self.a.0..=self.a.1).flat_map(move |a| {
            (self.b.0..=self.b.1).flat_map(move |b| {
                let (lo, hi) = self.fibre(a, b);
                (lo..=hi).map(move |c| [a, b, c])
            })
        })
    }
}

impl SpanCoset {
    fn order(&self, index: u32) -> u32 {
        self.orders[(index as usize - 1) % self.orders.len()]
    }

    pub fn len(&self) -> u128 {
        (1..=self.width).map(|i| u128::from(self.order(i))).product()
    }

    pub fn is_subgroup(&self) -> bool {
        self.offset.is_empty()
    }

    pub fn contains(&self, s: &[(u32, u32)]) -> bool {
        s.iter().filter(|(i, _)| *i > self.width).eq(self.offset.iter())
    }

    /// Part of an element supported above `width`.
    pub fn high_part(&self, s: &[(u32, u32)]) -> Support {
        s.iter().filter(|(i, _)| *i > self.width).copied().collect()
    }

    fn points(&self) -> Vec<GroupElement> {
        let mut out = Vec::new();
        let mut digits = vec![0u32; self.width as usize];
        loop {
            let mut s: Support = digits
                .iter()
                .enumerate()
                .filter(|(_, r)| **r != 0)
                .map(|(k, r)| (k as u32 + 1, *r))
                .collect();
            s.extend(self.offset.iter().copied());
            out.push(GroupElement::DirectSum(s));
            let mut k = 0;
            loop {
                if k == digits.len() {
                    return out;
                }
                digits[k] += 1;
                if digits[k] < self.order(k as u32 + 1) {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    }
}

impl FiniteSubset {
    pub fn from_elements(elements: impl IntoIterator<Item = GroupElement>) -> Self {
        FiniteSubset::Explicit(elements.into_iter().collect())
    }

    pub fn singleton(g: GroupElement) -> Self {
        FiniteSubset::Explicit(BTreeSet::from([g]))
    }

    /// Integer interval `[lo, hi]` in `Z`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        match LatticeBox::new(Coords::from_slice(&[lo]), Coords::from_slice(&[hi])) {
            Some(b) => FiniteSubset::Box(b),
            None => FiniteSubset::default(),
        }
    }

    /// Subgroup `⟨e_1, …, e_width⟩` of a direct sum.
    pub fn span(group: &GroupDescriptor, width: u32) -> Result<Self, GroupError> {
        match group.kind() {
            super::GroupKind::DirectSum { orders } => {
                Ok(FiniteSubset::Span(SpanCoset { width, offset: Support::new(), orders: orders.clone() }))
            }
            _ => Err(GroupError::KindMismatch),
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            FiniteSubset::Explicit(s) => s.len() as u128,
            FiniteSubset::Box(b) => b.len(),
            FiniteSubset::Para(p) => p.len(),
            FiniteSubset::Span(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (FiniteSubset::Explicit(s), _) => s.contains(g),
            (FiniteSubset::Box(b), GroupElement::Lattice(v)) => b.contains(v),
            (FiniteSubset::Para(p), GroupElement::Heisenberg(t)) => p.contains(*t),
            (FiniteSubset::Span(s), GroupElement::DirectSum(x)) => s.contains(x),
            _ => false,
        }
    }

    /// All elements (unordered for shapes). Callers are responsible for size.
    pub fn iter(&self) -> Box<dyn Iterator<Item = GroupElement> + '_> {
        match self {
            FiniteSubset::Explicit(s) => Box::new(s.iter().cloned()),
            FiniteSubset::Box(b) => Box::new(b.points().map(GroupElement::Lattice)),
            FiniteSubset::Para(p) => Box::new(p.points().map(GroupElement::Heisenberg)),
            FiniteSubset::Span(s) => Box::new(s.points().into_iter()),
        }
    }

    /// Sorted explicit copy of the set.
    pub fn to_explicit(&self) -> BTreeSet<GroupElement> {
        match self {
            FiniteSubset::Explicit(s) => s.clone(),
            _ => self.iter().collect(),
        }
    }

    pub fn explicit(&self) -> FiniteSubset {
        FiniteSubset::Explicit(self.to_explicit())
    }

    pub fn is_shape(&self) -> bool {
        !matches!(self, FiniteSubset::Explicit(_))
    }

    /// Same set, stored as a box when the explicit elements fill one exactly.
    pub fn compacted(&self) -> FiniteSubset {
        let FiniteSubset::Explicit(set) = self else { return self.clone() };
        let Some(first) = set.iter().next() else { return self.clone() };
        match first {
            GroupElement::Lattice(v) => {
                let d = v.len();
                let (mut lo, mut hi) = (v.clone(), v.clone());
                for g in set {
                    match g.coords() {
                        Some(c) if c.len() == d => {
                            for k in 0..d {
                                lo[k] = lo[k].min(c[k]);
                                hi[k] = hi[k].max(c[k]);
                            }
                        }
                        _ => return self.clone(),
                    }
                }
                let b = LatticeBox { lo, hi };
                if b.len() == set.len() as u128 {
                    FiniteSubset::Box(b)
                } else {
                    self.clone()
                }
            }
            GroupElement::Heisenberg(t) => {
                let (mut lo, mut hi) = (*t, *t);
                for g in set {
                    let Some(x) = g.triple() else { return self.clone() };
                    for k in 0..3 {
                        lo[k] = lo[k].min(x[k]);
                        hi[k] = hi[k].max(x[k]);
                    }
                }
                let p = HeisenbergPara { a: (lo[0], hi[0]), b: (lo[1], hi[1]), c: (lo[2], hi[2]), p: 0, q: 0 };
                if p.len() == set.len() as u128 {
                    FiniteSubset::Para(p)
                } else {
                    self.clone()
                }
            }
            GroupElement::DirectSum(_) => self.clone(),
        }
    }

    /// Least element in canonical order.
    pub fn first(&self) -> Option<GroupElement> {
        match self {
            FiniteSubset::Explicit(s) => s.iter().next().cloned(),
            FiniteSubset::Box(b) => Some(GroupElement::Lattice(b.lo.clone())),
            FiniteSubset::Para(p) => {
                let (lo, _) = p.fibre(p.a.0, p.b.0);
                Some(GroupElement::heisenberg(p.a.0, p.b.0, lo))
            }
            FiniteSubset::Span(_) => self.iter().min(),
        }
    }

    /// `{ g·x·h : x ∈ self }`, structurally for shapes.
    pub fn translate(
        &self,
        group: &GroupDescriptor,
        left: &GroupElement,
        right: &GroupElement,
    ) -> Result<FiniteSubset, GroupError> {
        Ok(match self {
            FiniteSubset::Box(b) => {
                let (l, r) = (left.coords().ok_or(GroupError::KindMismatch)?, right.coords().ok_or(GroupError::KindMismatch)?);
                if l.len() != b.dim() || r.len() != b.dim() {
                    return Err(GroupError::KindMismatch);
                }
                let v: Coords = l.iter().zip(r).map(|(x, y)| x + y).collect();
                FiniteSubset::Box(b.shift(&v))
            }
            FiniteSubset::Para(p) => {
                let (l, r) = (left.triple().ok_or(GroupError::KindMismatch)?, right.triple().ok_or(GroupError::KindMismatch)?);
                FiniteSubset::Para(p.left_translate(l).right_translate(r))
            }
            FiniteSubset::Span(s) => {
                let shift = group.mul(left, right)?;
                let sum = group.mul(&GroupElement::DirectSum(s.offset.clone()), &shift)?;
                let offset = s.high_part(sum.support().ok_or(GroupError::KindMismatch)?);
                FiniteSubset::Span(SpanCoset { width: s.width, offset, orders: s.orders.clone() })
            }
            FiniteSubset::Explicit(set) => {
                let mut out = BTreeSet::new();
                for x in set {
                    out.insert(group.mul(&group.mul(left, x)?, right)?);
                }
                FiniteSubset::Explicit(out)
            }
        })
    }

    /// Number of common elements and the least common element found.
    pub fn intersection(&self, other: &FiniteSubset) -> (u128, Option<GroupElement>) {
        match (self, other) {
            (FiniteSubset::Box(x), FiniteSubset::Box(y)) => match x.intersect(y) {
                Some(b) => (b.len(), Some(GroupElement::Lattice(b.lo))),
                None => (0, None),
            },
            (FiniteSubset::Para(x), FiniteSubset::Para(y)) => {
                let (n, w) = x.intersection(y);
                (n, w.map(GroupElement::Heisenberg))
            }
            (FiniteSubset::Span(x), FiniteSubset::Span(y)) => {
                // cosets of nested subgroups: either disjoint or the smaller is inside the larger
                let (small, big) = if x.width <= y.width { (x, y) } else { (y, x) };
                let rep: Support = small.offset.clone();
                if big.contains(&rep) {
                    let any = FiniteSubset::Span(small.clone()).first();
                    (small.len(), any)
                } else {
                    (0, None)
                }
            }
            _ => {
                let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
                let mut n = 0u128;
                let mut first: Option<GroupElement> = None;
                for g in small.iter() {
                    if big.contains(&g) {
                        n += 1;
                        if first.as_ref().is_none_or(|f| g < *f) {
                            first = Some(g);
                        }
                    }
                }
                (n, first)
            }
        }
    }

    pub fn is_disjoint(&self, other: &FiniteSubset) -> bool {
        self.intersection(other).0 == 0
    }

    /// `None` when `self ⊆ other`, otherwise an element of `self ∖ other`.
    pub fn escape(&self, other: &FiniteSubset) -> Option<GroupElement> {
        match (self, other) {
            (FiniteSubset::Box(x), FiniteSubset::Box(y)) => {
                if x.is_subset(y) {
                    None
                } else {
                    // a corner of x outside y
                    let c: Coords = x
                        .lo
                        .iter()
                        .zip(&x.hi)
                        .zip(y.lo.iter().zip(&y.hi))
                        .map(|((xl, xh), (yl, yh))| if xl < yl { *xl } else if xh > yh { *xh } else { *xl })
                        .collect();
                    Some(GroupElement::Lattice(c))
                }
            }
            (FiniteSubset::Para(x), FiniteSubset::Para(y)) if y.is_box() => {
                x.escape_from_box(y).map(GroupElement::Heisenberg)
            }
            (FiniteSubset::Span(x), FiniteSubset::Span(y)) => {
                if x.width <= y.width && y.contains(&x.offset) {
                    None
                } else {
                    FiniteSubset::Span(x.clone()).iter().find(|g| !other.contains(g))
                }
            }
            _ => {
                let mut out: Option<GroupElement> = None;
                for g in self.iter() {
                    if !other.contains(&g) && out.as_ref().is_none_or(|o| g < *o) {
                        out = Some(g);
                        if !self.is_shape() {
                            break;
                        }
                    }
                }
                out
            }
        }
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.len() <= other.len() && self.escape(other).is_none()
    }
}

impl PartialEq for FiniteSubset {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (FiniteSubset::Explicit(x), FiniteSubset::Explicit(y)) => x == y,
            (FiniteSubset::Box(x), FiniteSubset::Box(y)) => x == y,
            (FiniteSubset::Span(x), FiniteSubset::Span(y)) if x.width == y.width => x.offset == y.offset,
            _ => self.len() == other.len() && self.escape(other).is_none(),
        }
    }
}

impl Eq for FiniteSubset {}

/// `{a·b : a ∈ A, b ∈ B}`, structurally when one side is a point or both are
/// boxes/cosets, by enumeration otherwise.
pub fn set_product(
    group: &GroupDescriptor,
    a: &FiniteSubset,
    b: &FiniteSubset,
) -> Result<FiniteSubset, GroupError> {
    let id = group.identity();
    match (a, b) {
        (FiniteSubset::Explicit(x), shape) if x.len() == 1 && shape.is_shape() => {
            shape.translate(group, x.iter().next().expect("singleton"), id)
        }
        (shape, FiniteSubset::Explicit(y)) if y.len() == 1 && shape.is_shape() => {
            shape.translate(group, id, y.iter().next().expect("singleton"))
        }
        (FiniteSubset::Box(x), FiniteSubset::Box(y)) if x.dim() == y.dim() => Ok(FiniteSubset::Box(x.add(y))),
        (FiniteSubset::Span(x), FiniteSubset::Span(y)) => {
            let width = x.width.max(y.width);
            let sum = group.mul(&GroupElement::DirectSum(x.offset.clone()), &GroupElement::DirectSum(y.offset.clone()))?;
            let wide = SpanCoset { width, offset: Support::new(), orders: x.orders.clone() };
            let offset = wide.high_part(sum.support().expect("direct sum"));
            Ok(FiniteSubset::Span(SpanCoset { offset, ..wide }))
        }
        _ => {
            if a.len().saturating_mul(b.len()) > ENUMERATION_LIMIT {
                return Err(GroupError::TooLarge(a.len().saturating_mul(b.len())));
            }
            let mut out = BTreeSet::new();
            let right: Vec<GroupElement> = b.iter().collect();
            for x in a.iter() {
                for y in &right {
                    out.insert(group.mul(&x, y)?);
                }
            }
            Ok(FiniteSubset::Explicit(out))
        }
    }
}

/// `{a⁻¹ : a ∈ A}`.
pub fn set_inverse(group: &GroupDescriptor, a: &FiniteSubset) -> FiniteSubset {
    match a {
        FiniteSubset::Box(b) => FiniteSubset::Box(b.negate()),
        FiniteSubset::Span(s) => {
            let inv = group.inv(&GroupElement::DirectSum(s.offset.clone()));
            FiniteSubset::Span(SpanCoset { offset: inv.support().expect("direct sum").into(), ..s.clone() })
        }
        _ => FiniteSubset::Explicit(a.iter().map(|g| group.inv(&g)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: impl IntoIterator<Item = i64>) -> FiniteSubset {
        FiniteSubset::from_elements(v.into_iter().map(|x| GroupElement::lattice([x])))
    }

    #[test]
    fn interval_product() {
        let z = GroupDescriptor::integers();
        let p = set_product(&z, &FiniteSubset::interval(-1, 8), &ints([0, 30])).unwrap();
        let expected = ints((-1..=8).chain(29..=38));
        assert_eq!(p, expected);
        assert_eq!(p.len(), 20);
        let id = FiniteSubset::singleton(z.identity().clone());
        assert_eq!(set_product(&z, &id, &ints([4, 7])).unwrap(), ints([4, 7]));
    }

    #[test]
    fn interval_inverse() {
        let z = GroupDescriptor::integers();
        assert_eq!(set_inverse(&z, &FiniteSubset::interval(-1, 8)), FiniteSubset::interval(-8, 1));
        assert_eq!(set_inverse(&z, &ints(-1..=8)), ints(-8..=1));
    }

    #[test]
    fn para_translates_match_enumeration() {
        let h = GroupDescriptor::heisenberg();
        let para = FiniteSubset::Para(HeisenbergPara::boxed((-2, 1), (0, 2), (-1, 3)).unwrap());
        let explicit = para.explicit();
        for g in [[1, 0, 0], [0, 1, 0], [2, -3, 5], [-1, 4, 2]] {
            for k in [[0, 0, 0], [3, 1, -2], [-2, -2, 7]] {
                let (g, k) = (GroupElement::Heisenberg(g), GroupElement::Heisenberg(k));
                let s = para.translate(&h, &g, &k).unwrap();
                let e = explicit.translate(&h, &g, &k).unwrap();
                assert!(matches!(s, FiniteSubset::Para(_)));
                assert_eq!(s.to_explicit(), e.to_explicit());
                // second translate exercises nonzero shears
                let s2 = s.translate(&h, &k, &g).unwrap();
                let e2 = e.translate(&h, &k, &g).unwrap();
                assert_eq!(s2.to_explicit(), e2.to_explicit());
                assert_eq!(s2.intersection(&para).0, e2.intersection(&explicit).0);
                assert_eq!(s2.intersection(&s).0, e2.intersection(&e).0);
            }
        }
    }

    #[test]
    fn span_cosets() {
        let g = GroupDescriptor::direct_sum(vec![2]).unwrap();
        let span2 = FiniteSubset::span(&g, 2).unwrap();
        assert_eq!(span2.len(), 4);
        let e3 = g.basis(3).unwrap();
        let coset = span2.translate(&g, &e3, g.identity()).unwrap();
        assert_eq!(coset.len(), 4);
        assert!(coset.contains(&g.direct_sum_element(&[(1, 1), (3, 1)]).unwrap()));
        assert!(coset.is_disjoint(&span2));
        assert_eq!(coset.to_explicit(), coset.explicit().to_explicit());
        let span3 = FiniteSubset::span(&g, 3).unwrap();
        assert!(coset.is_subset(&span3));
        assert!(!span3.is_subset(&coset));
    }

    #[test]
    fn box_points_in_order() {
        let b = LatticeBox::new(Coords::from_slice(&[0, -1]), Coords::from_slice(&[1, 1])).unwrap();
        let pts: Vec<_> = FiniteSubset::Box(b.clone()).iter().collect();
        assert_eq!(pts.len(), 6);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
        assert_eq!(FiniteSubset::Box(b).first(), Some(GroupElement::lattice([0, -1])));
    }

    #[test]
    fn compaction_keeps_the_set() {
        let z = ints(-3..=4).compacted();
        assert!(matches!(z, FiniteSubset::Box(_)));
        assert_eq!(z, ints(-3..=4));
        let gap = ints([0, 2]).compacted();
        assert!(!gap.is_shape());
        let h = FiniteSubset::from_elements((0..2).flat_map(|a| (0..3).map(move |c| GroupElement::heisenberg(a, 1, c))));
        let hc = h.compacted();
        assert!(matches!(hc, FiniteSubset::Para(_)));
        assert_eq!(hc.to_explicit(), h.to_explicit());
    }

    #[test]
    fn representation_independent_equality() {
        assert_eq!(FiniteSubset::interval(2, 5), ints(2..=5));
        assert_ne!(FiniteSubset::interval(2, 5), ints(2..=6));
    }
}
