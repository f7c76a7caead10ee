//! Decision procedures for products of level sets.
//!
//! A word is a product `X_1 X_2 ⋯ X_k` of level sets, their inverses and
//! single elements. Lattice and direct-sum words collapse to boxes and
//! cosets exactly. Heisenberg words generally do not, so they are handled
//! through exact coordinate extremes (every coordinate of a product is
//! multilinear in the per-factor box parameters), exact `(a, b)`
//! projections, and an exact fibre description of `F·x·F⁻¹` for boxes `F`.
//! Small sets of any kind fall back to enumeration.

use crate::groups::{
    set_inverse, set_product, FiniteSubset, GroupDescriptor, GroupElement, GroupError, GroupKind, HeisenbergPara,
};

const WORD_ENUMERATION_LIMIT: u128 = 200_000;
const VERTEX_LIMIT: usize = 1 << 20;
const FIBRE_AREA_LIMIT: u128 = 50_000_000;
const FIBRE_INTERVAL_LIMIT: usize = 200_000;
const CELL_LIMIT: u128 = 20_000_000;

#[derive(Clone, Debug)]
pub(crate) enum Factor<'a> {
    Set(&'a FiniteSubset),
    Inv(&'a FiniteSubset),
    Point(GroupElement),
}

pub(crate) type Word<'a> = Vec<Factor<'a>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Inclusion {
    Inside,
    Escapes(GroupElement),
    Undecided(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Overlap {
    Disjoint,
    Meets(GroupElement),
    Undecided(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Cover {
    Uncovered(GroupElement),
    Covered,
    Undecided(String),
}

fn is_heisenberg(group: &GroupDescriptor) -> bool {
    matches!(group.kind(), GroupKind::Heisenberg)
}

/// The product set itself, when it can be represented without blowing up.
pub(crate) fn exact(group: &GroupDescriptor, word: &[Factor<'_>]) -> Result<Option<FiniteSubset>, GroupError> {
    let id = group.identity();
    let mut acc = FiniteSubset::singleton(id.clone());
    for f in word {
        let next = match f {
            Factor::Point(p) => {
                acc = acc.translate(group, id, p)?;
                continue;
            }
            Factor::Set(s) => (*s).clone(),
            Factor::Inv(s) => {
                if matches!(s, FiniteSubset::Para(_)) && s.len() > WORD_ENUMERATION_LIMIT {
                    return Ok(None);
                }
                set_inverse(group, s)
            }
        };
        acc = match combine(group, &acc, &next)? {
            Some(x) => x,
            None => return Ok(None),
        };
    }
    Ok(Some(acc))
}

fn single(s: &FiniteSubset) -> Option<&GroupElement> {
    match s {
        FiniteSubset::Explicit(e) if e.len() == 1 => e.iter().next(),
        _ => None,
    }
}

fn combine(group: &GroupDescriptor, a: &FiniteSubset, b: &FiniteSubset) -> Result<Option<FiniteSubset>, GroupError> {
    let id = group.identity();
    if let Some(x) = single(a) {
        return b.translate(group, x, id).map(Some);
    }
    if let Some(y) = single(b) {
        return a.translate(group, id, y).map(Some);
    }
    let structural = matches!(
        (a, b),
        (FiniteSubset::Box(_), FiniteSubset::Box(_)) | (FiniteSubset::Span(_), FiniteSubset::Span(_))
    );
    if structural || a.len().saturating_mul(b.len()) <= WORD_ENUMERATION_LIMIT {
        return set_product(group, a, b).map(Some);
    }
    Ok(None)
}

fn candidates(group: &GroupDescriptor, f: &Factor<'_>) -> Option<Vec<[i64; 3]>> {
    let inv = |t: [i64; 3]| group.inv(&GroupElement::Heisenberg(t)).triple().expect("heisenberg");
    match f {
        Factor::Point(p) => Some(vec![p.triple()?]),
        Factor::Set(FiniteSubset::Para(p)) => Some(p.vertices().to_vec()),
        Factor::Inv(FiniteSubset::Para(p)) => Some(p.vertices().iter().map(|v| inv(*v)).collect()),
        Factor::Set(s @ FiniteSubset::Explicit(_)) if s.len() <= 64 => s.iter().map(|g| g.triple()).collect(),
        Factor::Inv(s @ FiniteSubset::Explicit(_)) if s.len() <= 64 => s.iter().map(|g| g.triple().map(inv)).collect(),
        _ => None,
    }
}

fn hmul(x: [i64; 3], y: [i64; 3]) -> [i64; 3] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]]
}

/// Per-coordinate `(min, argmin, max, argmax)` of a Heisenberg word; the
/// arg elements belong to the product set.
pub(crate) fn heisenberg_extremes(group: &GroupDescriptor, word: &[Factor<'_>]) -> Option<[(i64, [i64; 3], i64, [i64; 3]); 3]> {
    let lists: Vec<Vec<[i64; 3]>> = word.iter().map(|f| candidates(group, f)).collect::<Option<_>>()?;
    let total = lists.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()))?;
    if total > VERTEX_LIMIT || total == 0 {
        return None;
    }
    let mut out = [(i64::MAX, [0; 3], i64::MIN, [0; 3]); 3];
    fn walk(lists: &[Vec<[i64; 3]>], acc: [i64; 3], out: &mut [(i64, [i64; 3], i64, [i64; 3]); 3]) {
        match lists.split_first() {
            None => {
                for k in 0..3 {
                    if acc[k] < out[k].0 || (acc[k] == out[k].0 && acc < out[k].1) {
                        out[k].0 = acc[k];
                        out[k].1 = acc;
                    }
                    if acc[k] > out[k].2 || (acc[k] == out[k].2 && acc < out[k].3) {
                        out[k].2 = acc[k];
                        out[k].3 = acc;
                    }
                }
            }
            Some((head, rest)) => {
                for v in head {
                    walk(rest, hmul(acc, *v), out);
                }
            }
        }
    }
    walk(&lists, [0; 3], &mut out);
    Some(out)
}

/// Exact `(a, b)`-projection of a word whose set factors are all sheared boxes.
fn heisenberg_projection(word: &[Factor<'_>]) -> Option<[(i64, i64); 2]> {
    let mut a = (0i64, 0i64);
    let mut b = (0i64, 0i64);
    for f in word {
        match f {
            Factor::Point(p) => {
                let t = p.triple()?;
                a = (a.0 + t[0], a.1 + t[0]);
                b = (b.0 + t[1], b.1 + t[1]);
            }
            Factor::Set(FiniteSubset::Para(p)) => {
                a = (a.0 + p.a.0, a.1 + p.a.1);
                b = (b.0 + p.b.0, b.1 + p.b.1);
            }
            Factor::Inv(FiniteSubset::Para(p)) => {
                a = (a.0 - p.a.1, a.1 - p.a.0);
                b = (b.0 - p.b.1, b.1 - p.b.0);
            }
            _ => return None,
        }
    }
    Some([a, b])
}

/// `X ⊆ target`, with an escaping element otherwise.
pub(crate) fn inclusion(group: &GroupDescriptor, word: &[Factor<'_>], target: &FiniteSubset) -> Result<Inclusion, GroupError> {
    if is_heisenberg(group) {
        if let FiniteSubset::Para(t) = target {
            if t.is_box() {
                if let Some(ext) = heisenberg_extremes(group, word) {
                    let bounds = [t.a, t.b, t.c];
                    for k in 0..3 {
                        if ext[k].0 < bounds[k].0 {
                            return Ok(Inclusion::Escapes(GroupElement::Heisenberg(ext[k].1)));
                        }
                        if ext[k].2 > bounds[k].1 {
                            return Ok(Inclusion::Escapes(GroupElement::Heisenberg(ext[k].3)));
                        }
                    }
                    return Ok(Inclusion::Inside);
                }
            }
        }
    }
    match exact(group, word)? {
        Some(x) => Ok(match x.escape(target) {
            None => Inclusion::Inside,
            Some(e) => Inclusion::Escapes(e),
        }),
        None => Ok(Inclusion::Undecided("product set too large to compare".into())),
    }
}

/// `X ∩ Y = ∅`, with a common element otherwise.
pub(crate) fn overlap(group: &GroupDescriptor, x: &[Factor<'_>], y: &[Factor<'_>]) -> Result<Overlap, GroupError> {
    if is_heisenberg(group) {
        if let (Some(p), Some(q)) = (heisenberg_projection(x), heisenberg_projection(y)) {
            if p[0].1 < q[0].0 || q[0].1 < p[0].0 || p[1].1 < q[1].0 || q[1].1 < p[1].0 {
                return Ok(Overlap::Disjoint);
            }
        }
        if let (Some(p), Some(q)) = (heisenberg_extremes(group, x), heisenberg_extremes(group, y)) {
            if (0..3).any(|k| p[k].2 < q[k].0 || q[k].2 < p[k].0) {
                return Ok(Overlap::Disjoint);
            }
        }
        if let (Some(s), Some(t)) = (Sandwich::of(x), Sandwich::of(y)) {
            if s.f == t.f {
                return Ok(sandwich_overlap(&s, &t));
            }
        }
    }
    match (exact(group, x)?, exact(group, y)?) {
        (Some(a), Some(b)) => Ok(match a.intersection(&b) {
            (0, _) => Overlap::Disjoint,
            (_, Some(w)) => Overlap::Meets(w),
            (_, None) => Overlap::Undecided("intersection without witness".into()),
        }),
        _ => Ok(Overlap::Undecided("product sets too large to intersect".into())),
    }
}

/// Whether the union of the words misses some element of `target`.
pub(crate) fn cover(group: &GroupDescriptor, words: &[Word<'_>], target: &FiniteSubset) -> Result<Cover, GroupError> {
    if is_heisenberg(group) {
        if let FiniteSubset::Para(t) = target {
            if t.is_box() {
                let mut boxes = Vec::new();
                for w in words {
                    match heisenberg_extremes(group, w) {
                        Some(e) => boxes.push((vec![e[0].0, e[1].0, e[2].0], vec![e[0].2, e[1].2, e[2].2])),
                        None => {
                            boxes.clear();
                            break;
                        }
                    }
                }
                if boxes.len() == words.len() {
                    match uncovered_cell(&[t.a.0, t.b.0, t.c.0], &[t.a.1, t.b.1, t.c.1], &boxes) {
                        Some(Some(p)) => return Ok(Cover::Uncovered(GroupElement::heisenberg(p[0], p[1], p[2]))),
                        Some(None) if words.is_empty() => return Ok(Cover::Covered),
                        _ => {}
                    }
                }
            }
        }
    }
    let mut pieces = Vec::with_capacity(words.len());
    for w in words {
        match exact(group, w)? {
            Some(p) => pieces.push(p),
            None => return Ok(Cover::Undecided("product set too large to represent".into())),
        }
    }
    if let FiniteSubset::Box(t) = target {
        let boxes: Option<Vec<_>> = pieces
            .iter()
            .map(|p| match p {
                FiniteSubset::Box(b) => Some((b.lo.to_vec(), b.hi.to_vec())),
                _ => None,
            })
            .collect();
        if let Some(boxes) = boxes {
            return Ok(match uncovered_cell(&t.lo, &t.hi, &boxes) {
                Some(Some(p)) => Cover::Uncovered(GroupElement::lattice(p)),
                Some(None) => Cover::Covered,
                None => Cover::Undecided("too many cells".into()),
            });
        }
    }
    if let FiniteSubset::Span(t) = target {
        let offsets: Option<Vec<_>> = pieces
            .iter()
            .map(|p| match p {
                FiniteSubset::Span(s) => Some(s),
                _ => None,
            })
            .collect();
        if let Some(spans) = offsets {
            if let Some(w) = spans.iter().map(|s| s.width).min() {
                if spans.iter().all(|s| s.width == w) && w <= t.width {
                    // walk the cosets of ⟨e_1..e_w⟩ inside the target
                    let used: std::collections::BTreeSet<_> = spans.iter().map(|s| s.offset.clone()).collect();
                    let order = |i: u32| t.orders[(i as usize - 1) % t.orders.len()];
                    let mut digits = vec![0u32; (t.width - w) as usize];
                    loop {
                        let mut rep: crate::groups::Support = digits
                            .iter()
                            .enumerate()
                            .filter(|(_, r)| **r != 0)
                            .map(|(k, r)| (w + 1 + k as u32, *r))
                            .collect();
                        rep.extend(t.offset.iter().copied());
                        if !used.contains(&rep) {
                            return Ok(Cover::Uncovered(GroupElement::DirectSum(rep)));
                        }
                        let mut k = 0;
                        loop {
                            if k == digits.len() {
                                return Ok(Cover::Covered);
                            }
                            digits[k] += 1;
                            if digits[k] < order(w + 1 + k as u32) {
                                break;
                            }
                            digits[k] = 0;
                            k += 1;
                        }
                    }
                }
            }
        }
    }
    if target.len() <= crate::groups::ENUMERATION_LIMIT {
        let mut best: Option<GroupElement> = None;
        for g in target.iter() {
            if !pieces.iter().any(|p| p.contains(&g)) && best.as_ref().is_none_or(|b| g < *b) {
                best = Some(g);
            }
        }
        return Ok(match best {
            Some(g) => Cover::Uncovered(g),
            None => Cover::Covered,
        });
    }
    Ok(Cover::Undecided("target too large to enumerate".into()))
}

/// A point of the box `[lo, hi]` outside every listed box, by coordinate
/// compression. `None` when the cell count is out of reach.
fn uncovered_cell(lo: &[i64], hi: &[i64], boxes: &[(Vec<i64>, Vec<i64>)]) -> Option<Option<Vec<i64>>> {
    let d = lo.len();
    let mut axes: Vec<Vec<i64>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut v = vec![lo[k]];
        for (_, bh) in boxes {
            if bh[k] + 1 > lo[k] && bh[k] < hi[k] {
                v.push(bh[k] + 1);
            }
        }
        v.sort_unstable();
        v.dedup();
        axes.push(v);
    }
    let cells = axes.iter().map(|a| a.len() as u128).product::<u128>();
    if cells > CELL_LIMIT {
        return None;
    }
    let mut idx = vec![0usize; d];
    loop {
        let p: Vec<i64> = (0..d).map(|k| axes[k][idx[k]]).collect();
        let covered = boxes.iter().any(|(bl, bh)| (0..d).all(|k| bl[k] <= p[k] && p[k] <= bh[k]));
        if !covered {
            return Some(Some(p));
        }
        let mut k = d;
        loop {
            if k == 0 {
                return Some(None);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `F·x·F⁻¹` for a Heisenberg box `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Sandwich {
    pub f: HeisenbergPara,
    pub x: [i64; 3],
}

impl Sandwich {
    pub fn of(word: &[Factor<'_>]) -> Option<Self> {
        let mut x = [0i64; 3];
        let mut left: Option<&HeisenbergPara> = None;
        let mut right: Option<&HeisenbergPara> = None;
        for f in word {
            match f {
                Factor::Set(FiniteSubset::Para(p)) if left.is_none() && p.is_box() => left = Some(p),
                Factor::Point(g) if left.is_some() && right.is_none() => x = hmul(x, g.triple()?),
                Factor::Inv(FiniteSubset::Para(p)) if left.is_some() && right.is_none() => right = Some(p),
                _ => return None,
            }
        }
        match (left, right) {
            (Some(l), Some(r)) if l == r => Some(Sandwich { f: l.clone(), x }),
            _ => None,
        }
    }

    fn projection(&self) -> [(i64, i64); 2] {
        let f = &self.f;
        [
            (f.a.0 - f.a.1 + self.x[0], f.a.1 - f.a.0 + self.x[0]),
            (f.b.0 - f.b.1 + self.x[1], f.b.1 - f.b.0 + self.x[1]),
        ]
    }

    /// Ranges of the free parameters `a₁` and `b₂` above `(a, b)`.
    fn ranges(&self, a: i64, b: i64) -> Option<((i64, i64), (i64, i64))> {
        let f = &self.f;
        let [xa, xb, _] = self.x;
        let i = (f.a.0.max(f.a.0 - xa + a), f.a.1.min(f.a.1 - xa + a));
        let j = (f.b.0.max(f.b.0 + xb - b), f.b.1.min(f.b.1 + xb - b));
        (i.0 <= i.1 && j.0 <= j.1).then_some((i, j))
    }

    fn width(&self) -> i64 {
        self.f.c.1 - self.f.c.0
    }

    /// Hull of the `c`-fibre above `(a, b)`: `c = x_c + x_b·i − a·j + [−W, W]`.
    fn hull(&self, a: i64, b: i64) -> Option<(i64, i64)> {
        let (i, j) = self.ranges(a, b)?;
        let xb = self.x[1];
        let vals = [xb * i.0 - a * j.0, xb * i.0 - a * j.1, xb * i.1 - a * j.0, xb * i.1 - a * j.1];
        let lo = *vals.iter().min().expect("nonempty");
        let hi = *vals.iter().max().expect("nonempty");
        let w = self.width();
        Some((self.x[2] + lo - w, self.x[2] + hi + w))
    }

    fn contiguous(&self, a: i64, b: i64) -> bool {
        let Some((i, j)) = self.ranges(a, b) else { return true };
        let (ni, nj) = (i.1 - i.0, j.1 - j.0);
        let span = 2 * self.width() + 1;
        let xb = self.x[1].abs();
        let aa = a.abs();
        let by_rows = (ni == 0 || xb <= span) && (nj == 0 || aa <= xb * ni + span);
        let by_cols = (nj == 0 || aa <= span) && (ni == 0 || xb <= aa * nj + span);
        by_rows || by_cols
    }

    /// The fibre as sorted disjoint intervals.
    fn intervals(&self, a: i64, b: i64) -> Option<Vec<(i64, i64)>> {
        let Some((i, j)) = self.ranges(a, b) else { return Some(Vec::new()) };
        let w = self.width();
        let xb = self.x[1];
        let row_joined = i.0 == i.1 || xb.abs() <= 2 * w + 1;
        let count = (j.1 - j.0 + 1) as usize * if row_joined { 1 } else { (i.1 - i.0 + 1) as usize };
        if count > FIBRE_INTERVAL_LIMIT {
            return None;
        }
        let mut out = Vec::with_capacity(count);
        for jj in j.0..=j.1 {
            let base = self.x[2] - a * jj;
            if row_joined {
                let (u, v) = (xb * i.0, xb * i.1);
                out.push((base + u.min(v) - w, base + u.max(v) + w));
            } else {
                for ii in i.0..=i.1 {
                    out.push((base + xb * ii - w, base + xb * ii + w));
                }
            }
        }
        out.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(out.len());
        for (l, h) in out {
            match merged.last_mut() {
                Some(last) if l <= last.1 + 1 => last.1 = last.1.max(h),
                _ => merged.push((l, h)),
            }
        }
        Some(merged)
    }
}

fn first_common(x: &[(i64, i64)], y: &[(i64, i64)]) -> Option<i64> {
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        let lo = x[i].0.max(y[j].0);
        let hi = x[i].1.min(y[j].1);
        if lo <= hi {
            return Some(lo);
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    None
}

fn sandwich_overlap(s: &Sandwich, t: &Sandwich) -> Overlap {
    let (p, q) = (s.projection(), t.projection());
    let a = (p[0].0.max(q[0].0), p[0].1.min(q[0].1));
    let b = (p[1].0.max(q[1].0), p[1].1.min(q[1].1));
    if a.0 > a.1 || b.0 > b.1 {
        return Overlap::Disjoint;
    }
    let area = (a.1 - a.0 + 1) as u128 * (b.1 - b.0 + 1) as u128;
    if area > FIBRE_AREA_LIMIT {
        return Overlap::Undecided(format!("projection overlap of {area} fibres"));
    }
    for x in a.0..=a.1 {
        for y in b.0..=b.1 {
            let (Some(h1), Some(h2)) = (s.hull(x, y), t.hull(x, y)) else { continue };
            if h1.1 < h2.0 || h2.1 < h1.0 {
                continue;
            }
            if s.contiguous(x, y) && t.contiguous(x, y) {
                return Overlap::Meets(GroupElement::heisenberg(x, y, h1.0.max(h2.0)));
            }
            match (s.intervals(x, y), t.intervals(x, y)) {
                (Some(u), Some(v)) => {
                    if let Some(c) = first_common(&u, &v) {
                        return Overlap::Meets(GroupElement::heisenberg(x, y, c));
                    }
                }
                _ => return Overlap::Undecided(format!("fibre above ({x},{y}) too fragmented")),
            }
        }
    }
    Overlap::Disjoint
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hbox(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> FiniteSubset {
        FiniteSubset::Para(HeisenbergPara::boxed(a, b, c).unwrap())
    }

    #[test]
    fn extremes_match_enumeration() {
        let h = GroupDescriptor::heisenberg();
        let f = hbox((-1, 2), (0, 1), (-1, 1));
        let g = GroupElement::heisenberg(1, -2, 3);
        let words: Vec<Word<'_>> = vec![
            vec![Factor::Inv(&f), Factor::Set(&f), Factor::Set(&f), Factor::Point(g.clone())],
            vec![Factor::Set(&f), Factor::Inv(&f), Factor::Set(&f)],
            vec![Factor::Set(&f), Factor::Point(g.clone()), Factor::Inv(&f)],
        ];
        for w in &words {
            let ext = heisenberg_extremes(&h, w).unwrap();
            let set = exact(&h, w).unwrap().unwrap();
            for k in 0..3 {
                let lo = set.iter().map(|e| e.triple().unwrap()[k]).min().unwrap();
                let hi = set.iter().map(|e| e.triple().unwrap()[k]).max().unwrap();
                assert_eq!((ext[k].0, ext[k].2), (lo, hi));
                assert!(set.contains(&GroupElement::Heisenberg(ext[k].1)));
                assert!(set.contains(&GroupElement::Heisenberg(ext[k].3)));
            }
        }
    }

    #[test]
    fn sandwich_fibres_match_enumeration() {
        let h = GroupDescriptor::heisenberg();
        let f = hbox((-1, 2), (-2, 1), (0, 1));
        for x in [[0, 0, 0], [3, 1, -2], [1, 5, 4], [-4, 2, 9], [0, 7, 0]] {
            let xe = GroupElement::Heisenberg(x);
            let w = vec![Factor::Set(&f), Factor::Point(xe), Factor::Inv(&f)];
            let s = Sandwich::of(&w).unwrap();
            let set = exact(&h, &w).unwrap().unwrap();
            let [pa, pb] = s.projection();
            for a in pa.0 - 1..=pa.1 + 1 {
                for b in pb.0 - 1..=pb.1 + 1 {
                    let mut cs: Vec<i64> =
                        set.iter().filter_map(|e| e.triple()).filter(|t| t[0] == a && t[1] == b).map(|t| t[2]).collect();
                    cs.sort_unstable();
                    let iv = s.intervals(a, b).unwrap();
                    let expanded: Vec<i64> = iv.iter().flat_map(|(l, h)| *l..=*h).collect();
                    assert_eq!(expanded, cs, "x={x:?} a={a} b={b}");
                    if s.contiguous(a, b) && !cs.is_empty() {
                        assert_eq!(iv.len(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn sandwich_overlap_agrees_with_enumeration() {
        let h = GroupDescriptor::heisenberg();
        let f = hbox((-1, 1), (-1, 1), (0, 2));
        let xs = [[0, 0, 0], [3, 0, 0], [0, 3, 1], [2, 2, 5], [5, -1, 0], [1, 1, 20]];
        for x in xs {
            for y in xs {
                let (xe, ye) = (GroupElement::Heisenberg(x), GroupElement::Heisenberg(y));
                let w1 = vec![Factor::Set(&f), Factor::Point(xe), Factor::Inv(&f)];
                let w2 = vec![Factor::Set(&f), Factor::Point(ye), Factor::Inv(&f)];
                let structural = sandwich_overlap(&Sandwich::of(&w1).unwrap(), &Sandwich::of(&w2).unwrap());
                let (s1, s2) = (exact(&h, &w1).unwrap().unwrap(), exact(&h, &w2).unwrap().unwrap());
                let common = s1.intersection(&s2).0;
                match structural {
                    Overlap::Disjoint => assert_eq!(common, 0),
                    Overlap::Meets(e) => assert!(s1.contains(&e) && s2.contains(&e)),
                    Overlap::Undecided(m) => panic!("{m}"),
                }
            }
        }
    }

    #[test]
    fn uncovered_cells() {
        let boxes = vec![(vec![0, 0], vec![4, 1]), (vec![0, 2], vec![2, 4])];
        assert_eq!(uncovered_cell(&[0, 0], &[4, 4], &boxes), Some(Some(vec![3, 2])));
        let full = vec![(vec![0, 0], vec![4, 4])];
        assert_eq!(uncovered_cell(&[0, 0], &[4, 4], &full), Some(None));
    }
}
