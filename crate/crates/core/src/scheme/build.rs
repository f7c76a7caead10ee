use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::check::{check_base, check_folner, check_mixing, check_square, check_triangle, classify, FolnerSchedule};
use super::geometry::{heisenberg_extremes, Factor};
use super::{CFScheme, SchemeError};
use crate::groups::{
    folner_defect, Coords, FiniteSubset, GroupDescriptor, GroupElement, GroupKind, HeisenbergPara, LatticeBox,
    SpanCoset, Support,
};

/// Tunables for [`build_scheme`].
#[derive(Clone, Debug)]
pub struct BuildParams {
    pub eps: FolnerSchedule,
    /// Target `#C_n` for `n = 1, 2, …`; missing entries default to `n + 1`.
    pub c_sizes: Vec<usize>,
    pub l_max: u64,
    /// Finite-order elements that must leave some level invariant.
    pub torsion: Vec<GroupElement>,
    /// Infinite-order elements that must displace some level.
    pub triangle: Vec<GroupElement>,
    /// `F_1` contains the norm ball of this radius.
    pub exhaustion_radius: u64,
    pub mixing: bool,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            eps: FolnerSchedule::Default,
            c_sizes: Vec::new(),
            l_max: 10_000_000,
            torsion: Vec::new(),
            triangle: Vec::new(),
            exhaustion_radius: 1,
            mixing: true,
        }
    }
}

impl BuildParams {
    pub fn target(&self, n: usize) -> usize {
        self.c_sizes.get(n - 1).copied().unwrap_or(n + 1)
    }
}

const SHELL_LIMIT: u64 = 4096;

/// Builds a depth-`depth` scheme and certifies it with the checkers.
pub fn build_scheme(group: &GroupDescriptor, depth: usize, params: &BuildParams) -> Result<CFScheme, SchemeError> {
    if depth == 0 {
        return Err(SchemeError::Precondition("depth must be at least 1".into()));
    }
    for n in 1..=depth {
        let t = params.target(n);
        if t < 2 {
            return Err(SchemeError::Precondition(format!("target #C_{n} = {t} is below 2")));
        }
        if params.mixing && n > 1 && t <= params.target(n - 1) {
            return Err(SchemeError::Precondition(format!(
                "mixing needs strictly increasing #C_n, got {} then {t}",
                params.target(n - 1)
            )));
        }
    }
    if params.l_max == 0 {
        return Err(SchemeError::Precondition("l_max must be at least 1".into()));
    }
    for g in &params.torsion {
        group.validate(g)?;
        if classify(group, g).is_none() {
            return Err(SchemeError::WrongDichotomy(format!("torsion test element {g} has infinite order")));
        }
    }
    for g in &params.triangle {
        group.validate(g)?;
        if let Some(k) = classify(group, g) {
            return Err(SchemeError::WrongDichotomy(format!("triangle test element {g} has finite order {k}")));
        }
    }

    let (f, c) = match group.kind() {
        GroupKind::IntegerLattice { dim } => build_lattice(group, *dim, depth, params)?,
        GroupKind::Heisenberg => build_heisenberg(group, depth, params)?,
        GroupKind::DirectSum { .. } => build_direct_sum(group, depth, params)?,
    };
    let scheme = CFScheme::new(group.clone(), f, c)?;
    certify(&scheme, params)?;
    Ok(scheme)
}

fn certify(s: &CFScheme, params: &BuildParams) -> Result<(), SchemeError> {
    let fail = |level: Option<usize>, condition: &str| SchemeError::SearchExhausted {
        level: level.unwrap_or(s.depth()),
        condition: condition.into(),
    };
    let base = check_base(s)?;
    if let Some((level, clause)) = base.first_failure() {
        return Err(fail(level, &clause.clause));
    }
    let k = FiniteSubset::from_elements(s.group().generators().iter().cloned());
    let folner = check_folner(s, &k, &params.eps)?;
    if let Some((level, clause)) = folner.first_failure() {
        return Err(fail(level, &clause.clause));
    }
    if params.mixing {
        let mixing = check_mixing(s)?;
        if let Some((level, clause)) = mixing.first_failure() {
            return Err(fail(level, &clause.clause));
        }
    }
    for g in &params.triangle {
        let mut found = false;
        for n in 0..s.depth() {
            if check_triangle(s, g, n, params.l_max)?.is_some() {
                found = true;
                break;
            }
        }
        if !found {
            return Err(fail(None, &format!("triangle condition for {g}")));
        }
    }
    for g in &params.torsion {
        if !check_square(s, g)?.pass {
            return Err(fail(None, &format!("square condition for {g}")));
        }
    }
    Ok(())
}

type IBox = (Vec<i64>, Vec<i64>);

fn union_box(acc: &mut Option<IBox>, lo: &[i64], hi: &[i64]) {
    match acc {
        None => *acc = Some((lo.to_vec(), hi.to_vec())),
        Some((l, h)) => {
            for k in 0..lo.len() {
                l[k] = l[k].min(lo[k]);
                h[k] = h[k].max(hi[k]);
            }
        }
    }
}

/// Offsets `c_1 = 0, c_2, …` in `Z^d` such that, for a box of widths `w`,
/// the sets `F + c_i - c_j - F` and `F - F` are pairwise disjoint. Each new
/// offset is the least admissible point in `ℓ1`-then-lexicographic order.
fn choose_offsets(w: &[i64], target: usize) -> Vec<Vec<i64>> {
    let d = w.len();
    let mut acc: Vec<Vec<i64>> = vec![vec![0; d]];
    while acc.len() < target {
        let mut boxes: Vec<IBox> = Vec::new();
        let around = |centre: Vec<i64>| -> IBox {
            let lo = (0..d).map(|k| centre[k] - 2 * w[k]).collect();
            let hi = (0..d).map(|k| centre[k] + 2 * w[k]).collect();
            (lo, hi)
        };
        for ci in &acc {
            boxes.push(around(ci.clone()));
            for cj in &acc {
                for ck in &acc {
                    if cj != ck {
                        boxes.push(around((0..d).map(|k| ci[k] + cj[k] - ck[k]).collect()));
                    }
                }
                // 2c must avoid c_i + c_j + D
                let (lo, hi) = around((0..d).map(|k| ci[k] + cj[k]).collect());
                let lo: Vec<i64> = lo.iter().map(|x| x.div_euclid(2) + i64::from(x.rem_euclid(2) != 0)).collect();
                let hi: Vec<i64> = hi.iter().map(|x| x.div_euclid(2)).collect();
                if (0..d).all(|k| lo[k] <= hi[k]) {
                    boxes.push((lo, hi));
                }
            }
        }
        acc.push(least_outside(&boxes, d));
    }
    acc
}

fn inside(boxes: &[IBox], p: &[i64]) -> bool {
    boxes.iter().any(|(lo, hi)| (0..p.len()).all(|k| lo[k] <= p[k] && p[k] <= hi[k]))
}

fn least_outside(boxes: &[IBox], d: usize) -> Vec<i64> {
    // a norm-minimal admissible point has every coordinate 0 or adjacent to a box face
    let mut axes: Vec<Vec<i64>> = vec![vec![0]; d];
    for (lo, hi) in boxes {
        for k in 0..d {
            axes[k].push(lo[k] - 1);
            axes[k].push(hi[k] + 1);
        }
    }
    for a in &mut axes {
        a.sort_unstable_by_key(|x| (x.unsigned_abs(), *x));
        a.dedup();
    }
    let mut best = u64::MAX;
    let mut idx = vec![0usize; d];
    let mut p = vec![0i64; d];
    'outer: loop {
        let norm: u64 = (0..d).map(|k| axes[k][idx[k]].unsigned_abs()).sum();
        if norm < best {
            for k in 0..d {
                p[k] = axes[k][idx[k]];
            }
            if !inside(boxes, &p) {
                best = norm;
            }
        }
        let mut k = d;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    let mut buf = Vec::with_capacity(d);
    lex_on_sphere(d, best as i64, &mut buf, &|q| !inside(boxes, q)).expect("norm-minimal point exists")
}

/// Lexicographically least point of the `ℓ1` sphere of radius `r` accepted by `ok`.
fn lex_on_sphere(d: usize, r: i64, buf: &mut Vec<i64>, ok: &dyn Fn(&[i64]) -> bool) -> Option<Vec<i64>> {
    if d == 1 {
        for x in [-r, r] {
            buf.push(x);
            let hit = ok(buf);
            let out = hit.then(|| buf.clone());
            buf.pop();
            if out.is_some() {
                return out;
            }
        }
        return None;
    }
    for x in -r..=r {
        buf.push(x);
        let found = lex_on_sphere(d - 1, r - x.abs(), buf, ok);
        buf.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Least `l ≥ 1` with `l·v ∉ (c' − c) + [−w, w]` for all offsets `c, c'`.
fn displacement(v: &[i64], w: &[i64], offsets: &[Vec<i64>], l_max: u64) -> Option<u64> {
    let d = v.len();
    if v.iter().all(|x| *x == 0) {
        return None;
    }
    'l: for l in 1..=l_max {
        let li = l as i64;
        for c in offsets {
            for c2 in offsets {
                if (0..d).all(|k| (li * v[k] - (c2[k] - c[k])).abs() <= w[k]) {
                    continue 'l;
                }
            }
        }
        return Some(l);
    }
    None
}

fn folner_widths(eps: &BigRational) -> i64 {
    // 2/len < eps  ⟺  len > 2/eps
    let bound = BigRational::from_integer(BigInt::from(2)) / eps;
    let floor = bound.floor().to_integer();
    i64::try_from(floor).unwrap_or(i64::MAX / 4) + 1
}

fn build_lattice(
    group: &GroupDescriptor,
    d: usize,
    depth: usize,
    params: &BuildParams,
) -> Result<(Vec<FiniteSubset>, Vec<FiniteSubset>), SchemeError> {
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    let mut f = vec![FiniteSubset::Box(LatticeBox::new(Coords::from_slice(&lo), Coords::from_slice(&hi)).expect("point"))];
    let mut c = Vec::new();
    for n in 0..depth {
        let w: Vec<i64> = (0..d).map(|k| hi[k] - lo[k]).collect();
        let offsets = choose_offsets(&w, params.target(n + 1));
        let mut bb: Option<IBox> = None;
        for o in &offsets {
            // F − F + F + c
            let l: Vec<i64> = (0..d).map(|k| 2 * lo[k] - hi[k] + o[k]).collect();
            let h: Vec<i64> = (0..d).map(|k| 2 * hi[k] - lo[k] + o[k]).collect();
            union_box(&mut bb, &l, &h);
        }
        if n == 0 {
            let r = params.exhaustion_radius as i64;
            union_box(&mut bb, &vec![-r; d], &vec![r; d]);
        }
        for g in &params.triangle {
            let v = g.coords().expect("lattice element");
            if let Some(l) = displacement(v, &w, &offsets, params.l_max) {
                for o in &offsets {
                    let s: Vec<i64> = (0..d).map(|k| l as i64 * v[k] + o[k]).collect();
                    let a: Vec<i64> = (0..d).map(|k| lo[k] + s[k]).collect();
                    let b: Vec<i64> = (0..d).map(|k| hi[k] + s[k]).collect();
                    union_box(&mut bb, &a, &b);
                }
            }
        }
        let (mut nlo, mut nhi) = bb.expect("nonempty");
        let min_len = folner_widths(&params.eps.eps(n + 1));
        for k in 0..d {
            nlo[k] -= 1;
            nhi[k] += 1;
            let short = min_len - (nhi[k] - nlo[k] + 1);
            if short > 0 {
                nlo[k] -= short / 2 + short % 2;
                nhi[k] += short / 2;
            }
        }
        let next = FiniteSubset::Box(LatticeBox::new(Coords::from_slice(&nlo), Coords::from_slice(&nhi)).expect("box"));
        let k = FiniteSubset::from_elements(group.generators().iter().cloned());
        debug_assert!(folner_defect(group, &next, &k)?.0 < params.eps.eps(n + 1));
        c.push(FiniteSubset::from_elements(offsets.into_iter().map(GroupElement::lattice)));
        f.push(next);
        lo = nlo;
        hi = nhi;
    }
    Ok((f, c))
}

fn heisenberg_ball_box(group: &GroupDescriptor, radius: u64) -> ([i64; 3], [i64; 3]) {
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for r in 0..=radius {
        for g in group.shell(r) {
            let t = g.triple().expect("heisenberg");
            for k in 0..3 {
                lo[k] = lo[k].min(t[k]);
                hi[k] = hi[k].max(t[k]);
            }
        }
    }
    (lo, hi)
}

fn para(lo: &[i64], hi: &[i64]) -> HeisenbergPara {
    HeisenbergPara::boxed((lo[0], hi[0]), (lo[1], hi[1]), (lo[2], hi[2])).expect("nonempty box")
}

fn build_heisenberg(
    group: &GroupDescriptor,
    depth: usize,
    params: &BuildParams,
) -> Result<(Vec<FiniteSubset>, Vec<FiniteSubset>), SchemeError> {
    let mut cur = para(&[0; 3], &[0; 3]);
    let mut f = vec![FiniteSubset::Para(cur.clone())];
    let mut c = Vec::new();
    let gens = FiniteSubset::from_elements(group.generators().iter().cloned());
    for n in 0..depth {
        let w = [cur.a.1 - cur.a.0, cur.b.1 - cur.b.0];
        let offsets = choose_offsets(&w, params.target(n + 1));
        let cs: Vec<GroupElement> = offsets.iter().map(|o| GroupElement::heisenberg(o[0], o[1], 0)).collect();
        let fs = FiniteSubset::Para(cur.clone());
        let mut bb: Option<IBox> = None;
        let include = |word: &[Factor<'_>], bb: &mut Option<IBox>| -> Result<(), SchemeError> {
            let e = heisenberg_extremes(group, word)
                .ok_or_else(|| SchemeError::SearchExhausted { level: n + 1, condition: "bounding box".into() })?;
            union_box(bb, &[e[0].0, e[1].0, e[2].0], &[e[0].2, e[1].2, e[2].2]);
            Ok(())
        };
        for x in &cs {
            let p = Factor::Point(x.clone());
            include(&[Factor::Inv(&fs), Factor::Set(&fs), Factor::Set(&fs), p.clone()], &mut bb)?;
            include(&[Factor::Set(&fs), Factor::Inv(&fs), Factor::Set(&fs), p], &mut bb)?;
        }
        if n == 0 {
            let (l, h) = heisenberg_ball_box(group, params.exhaustion_radius);
            union_box(&mut bb, &l, &h);
        }
        for g in &params.triangle {
            let t = g.triple().expect("heisenberg element");
            let l = if t[0] == 0 && t[1] == 0 {
                // central: only the c-fibres can separate
                let width = cur.c.1 - cur.c.0;
                Some((width / t[2].abs() + 1) as u64).filter(|l| *l <= params.l_max)
            } else {
                displacement(&t[..2], &w, &offsets, params.l_max)
            };
            if let Some(l) = l {
                let h = group.pow(g, l as i64)?;
                for x in &cs {
                    include(&[Factor::Point(h.clone()), Factor::Set(&fs), Factor::Point(x.clone())], &mut bb)?;
                }
            }
        }
        let (mut lo, mut hi) = bb.expect("nonempty");
        for k in 0..3 {
            lo[k] -= 1;
            hi[k] += 1;
        }
        let eps = params.eps.eps(n + 1);
        let mut next = para(&lo, &hi);
        loop {
            let (defect, arg) = folner_defect(group, &FiniteSubset::Para(next.clone()), &gens)?;
            if defect < eps {
                break;
            }
            let grow = |r: (i64, i64), by: i64| (r.0 - by, r.1 + by);
            let (wa, wb, wc) = (next.a.1 - next.a.0 + 1, next.b.1 - next.b.0 + 1, next.c.1 - next.c.0 + 1);
            if arg.as_ref().and_then(|g| g.triple()) == Some([0, 1, 0]) {
                next.b = grow(next.b, wb / 4 + 1);
            } else {
                next.a = grow(next.a, wa / 4 + 1);
                next.c = grow(next.c, wc / 2 + 1);
            }
        }
        c.push(FiniteSubset::from_elements(cs));
        f.push(FiniteSubset::Para(next.clone()));
        cur = next;
    }
    Ok((f, c))
}

fn build_direct_sum(
    group: &GroupDescriptor,
    depth: usize,
    params: &BuildParams,
) -> Result<(Vec<FiniteSubset>, Vec<FiniteSubset>), SchemeError> {
    let orders = match group.kind() {
        GroupKind::DirectSum { orders } => orders.clone(),
        _ => unreachable!("direct sum"),
    };
    let span = |width: u32| FiniteSubset::Span(SpanCoset { width, offset: Support::new(), orders: orders.clone() });
    let top = |g: &GroupElement| g.support().and_then(|s| s.last()).map_or(0, |(i, _)| *i);
    let mut width = 0u32;
    let mut f = vec![span(0)];
    let mut c = Vec::new();
    let mut floor = group.generators().len() as u32;
    floor = floor.max(params.exhaustion_radius as u32);
    for g in &params.torsion {
        floor = floor.max(top(g));
    }
    for n in 0..depth {
        let high = |g: &GroupElement| -> Support {
            g.support().expect("direct sum").iter().filter(|(i, _)| *i > width).copied().collect()
        };
        let target = params.target(n + 1);
        let mut accepted: Vec<GroupElement> = vec![group.identity().clone()];
        // coset labels of c_i c_j^{-1}, keyed by ordered pair
        let mut labels: Vec<((usize, usize), Support)> = Vec::new();
        let mut r = 1u64;
        while accepted.len() < target {
            if r > SHELL_LIMIT {
                return Err(SchemeError::SearchExhausted { level: n + 1, condition: format!("#C_{} = {target}", n + 1) });
            }
            for g in group.shell_above(width, r) {
                if accepted.len() >= target {
                    break;
                }
                let m = accepted.len();
                let mut fresh: Vec<((usize, usize), Support)> = Vec::new();
                for (i, ci) in accepted.iter().enumerate() {
                    fresh.push(((m, i), high(&group.mul(&g, &group.inv(ci))?)));
                    fresh.push(((i, m), high(&group.mul(ci, &group.inv(&g))?)));
                }
                let clash = |(p, x): &((usize, usize), Support), (q, y): &((usize, usize), Support)| {
                    x == y && !(p.0 == q.1 && p.1 == q.0)
                };
                let ok = fresh.iter().all(|(_, x)| !x.is_empty())
                    && fresh.iter().all(|a| labels.iter().all(|b| !clash(a, b)))
                    && fresh.iter().enumerate().all(|(k, a)| fresh[k + 1..].iter().all(|b| !clash(a, b)));
                if ok {
                    accepted.push(g);
                    labels.extend(fresh);
                }
            }
            r += 1;
        }
        let need = accepted.iter().map(top).max().unwrap_or(0).max(width).max(floor).max(1);
        let mut next = need;
        let cosets: BTreeSet<Support> = accepted.iter().map(high).collect();
        let used = span(width).len() * cosets.len() as u128;
        if span(next).len() <= used {
            next += 1;
        }
        c.push(FiniteSubset::from_elements(accepted));
        f.push(span(next));
        width = next;
    }
    Ok((f, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn integer_scheme_like_the_small_example() {
        let z = GroupDescriptor::integers();
        let params = BuildParams {
            eps: FolnerSchedule::PerLevel(vec![r(1, 4), r(1, 20)]),
            c_sizes: vec![2, 2],
            mixing: false,
            ..BuildParams::default()
        };
        let s = build_scheme(&z, 2, &params).unwrap();
        assert!(check_base(&s).unwrap().pass);
        assert!(matches!(s.f(1), FiniteSubset::Box(_)));
        assert_eq!(s.c(1).len(), 2);
        assert!(s.c(1).contains(z.identity()));
    }

    #[test]
    fn direct_sum_with_torsion_witness() {
        let g = GroupDescriptor::direct_sum(vec![2]).unwrap();
        let e1 = g.basis(1).unwrap();
        let params = BuildParams { torsion: vec![e1.clone()], c_sizes: vec![2, 3], ..BuildParams::default() };
        let s = build_scheme(&g, 2, &params).unwrap();
        let rep = check_square(&s, &e1).unwrap();
        for n in 1..=2 {
            assert!(rep.level(n).unwrap().passed());
            assert!(matches!(s.f(n), FiniteSubset::Span(_)));
        }
    }

    #[test]
    fn rejects_single_copy() {
        let z = GroupDescriptor::integers();
        let params = BuildParams { c_sizes: vec![1], ..BuildParams::default() };
        assert!(matches!(build_scheme(&z, 1, &params), Err(SchemeError::Precondition(_))));
    }

    #[test]
    fn offsets_respect_separation() {
        let offs = choose_offsets(&[3], 4);
        assert_eq!(offs[0], vec![0]);
        let mut xs: Vec<i64> = vec![0];
        for a in &offs {
            for b in &offs {
                if a != b {
                    xs.push(a[0] - b[0]);
                }
            }
        }
        for (i, x) in xs.iter().enumerate() {
            for y in &xs[i + 1..] {
                assert!((x - y).abs() > 6, "{offs:?}");
            }
        }
    }

    #[test]
    fn heisenberg_small() {
        let h = GroupDescriptor::heisenberg();
        let params = BuildParams {
            triangle: vec![GroupElement::heisenberg(1, 0, 0), GroupElement::heisenberg(0, 0, 1)],
            ..BuildParams::default()
        };
        let s = build_scheme(&h, 2, &params).unwrap();
        assert!(check_mixing(&s).unwrap().pass);
    }
}
