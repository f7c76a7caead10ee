use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::geometry::{cover, inclusion, overlap, Cover, Factor, Inclusion, Overlap, Word};
use super::{CFScheme, ConditionReport, SchemeError, Verdict};
use crate::groups::{folner_defect, FiniteSubset, GroupDescriptor, GroupElement};

/// Følner tolerance per level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FolnerSchedule {
    /// `ε_n = 1/(n+2)`.
    Default,
    Constant(BigRational),
    PerLevel(Vec<BigRational>),
}

impl FolnerSchedule {
    pub fn eps(&self, n: usize) -> BigRational {
        match self {
            FolnerSchedule::Default => BigRational::new(BigInt::from(1), BigInt::from(n + 2)),
            FolnerSchedule::Constant(e) => e.clone(),
            FolnerSchedule::PerLevel(v) => v
                .get(n.saturating_sub(1))
                .or_else(|| v.last())
                .cloned()
                .unwrap_or_else(|| BigRational::new(BigInt::from(1), BigInt::from(n + 2))),
        }
    }

    fn describe(&self) -> String {
        match self {
            FolnerSchedule::Default => "1/(n+2)".into(),
            FolnerSchedule::Constant(e) => e.to_string(),
            FolnerSchedule::PerLevel(v) => v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

const TORSION_BOUND: u64 = 1 << 20;

/// `Some(order)` for elements of finite order, `None` for infinite order.
///
/// Lattices and the Heisenberg group are torsion-free, so only the identity
/// has finite order there; in a direct sum every element is torsion.
pub fn classify(group: &GroupDescriptor, g: &GroupElement) -> Option<u64> {
    if group.is_torsion_free() {
        (g == group.identity()).then_some(1)
    } else {
        group.order_of(g, TORSION_BOUND)
    }
}

fn undecided(msg: String) -> Verdict {
    Verdict::fail(Vec::new(), format!("undecided: {msg}"))
}

fn set_list(s: &FiniteSubset) -> String {
    if s.len() <= 16 {
        let v: Vec<String> = s.to_explicit().iter().map(|g| g.to_string()).collect();
        format!("{{{}}}", v.join(","))
    } else {
        format!("<{} elements>", s.len())
    }
}

/// Verdicts for `⋃ words ⊆ target`, stopping at the first escape.
fn all_inside(
    group: &GroupDescriptor,
    words: &[(GroupElement, Word<'_>)],
    target: &FiniteSubset,
) -> Result<Verdict, SchemeError> {
    for (c, w) in words {
        match inclusion(group, w, target)? {
            Inclusion::Inside => {}
            Inclusion::Escapes(e) => {
                return Ok(Verdict::fail(vec![e.clone(), c.clone()], format!("{e} (from c = {c}) lies outside the target")))
            }
            Inclusion::Undecided(m) => return Ok(undecided(m)),
        }
    }
    Ok(Verdict::Pass)
}

fn base_level(s: &CFScheme, n: usize) -> Result<Vec<(&'static str, Verdict)>, SchemeError> {
    let g = s.group();
    let id = g.identity();
    let (f, next) = (s.f(n), s.f(n + 1));
    let cs = s.c_elements(n + 1);
    let mut out = Vec::new();

    if n == 0 {
        let v = if f.len() == 1 && f.contains(id) {
            Verdict::Pass
        } else {
            Verdict::fail(f.first().into_iter().collect(), format!("F_0 = {} is not {{identity}}", set_list(f)))
        };
        out.push(("F_0 = {1}", v));
    }
    out.push(("1 in F_n", identity_in(f, id)));
    out.push((
        "#C_{n+1} > 1",
        if cs.len() >= 2 {
            Verdict::Pass
        } else {
            Verdict::fail(cs.clone(), format!("#C_{} = {}", n + 1, cs.len()))
        },
    ));

    let triple: Vec<(GroupElement, Word<'_>)> = cs
        .iter()
        .map(|c| (c.clone(), vec![Factor::Inv(f), Factor::Set(f), Factor::Set(f), Factor::Point(c.clone())]))
        .collect();
    let mut v = all_inside(g, &triple, next)?;
    if v.is_pass() {
        let words: Vec<Word<'_>> = triple.iter().map(|(_, w)| w.clone()).collect();
        v = match cover(g, &words, next)? {
            Cover::Uncovered(_) => Verdict::Pass,
            Cover::Covered => Verdict::fail(Vec::new(), format!("F_{} equals F_n^-1 F_n F_n C_{}", n + 1, n + 1)),
            Cover::Undecided(m) => undecided(m),
        };
    }
    out.push(("F_n^-1 F_n F_n C_{n+1} proper subset of F_{n+1}", v));

    let mut v = Verdict::Pass;
    'pairs: for (i, c) in cs.iter().enumerate() {
        for d in &cs[i + 1..] {
            let x = vec![Factor::Set(f), Factor::Point(c.clone())];
            let y = vec![Factor::Set(f), Factor::Point(d.clone())];
            match overlap(g, &x, &y)? {
                Overlap::Disjoint => {}
                Overlap::Meets(e) => {
                    v = Verdict::fail(vec![e.clone(), c.clone(), d.clone()], format!("{e} lies in F_n·{c} and F_n·{d}"));
                    break 'pairs;
                }
                Overlap::Undecided(m) => {
                    v = undecided(m);
                    break 'pairs;
                }
            }
        }
    }
    out.push(("F_n c disjoint from F_n c'", v));
    Ok(out)
}

fn identity_in(f: &FiniteSubset, id: &GroupElement) -> Verdict {
    if f.contains(id) {
        Verdict::Pass
    } else {
        Verdict::fail(vec![id.clone()], "identity missing")
    }
}

/// Step-1 conditions at every level `0 ≤ n < N`, plus the growth sequence.
pub fn check_base(s: &CFScheme) -> Result<ConditionReport, SchemeError> {
    let depth = s.depth();
    if depth == 0 {
        return Err(SchemeError::NothingToCheck);
    }
    let levels: Vec<_> = (0..depth).into_par_iter().map(|n| base_level(s, n)).collect::<Result<_, _>>()?;
    let mut report = ConditionReport::new("base").with_param("depth", depth);
    for (n, clauses) in levels.into_iter().enumerate() {
        for (name, v) in clauses {
            report.push(n, name, v);
        }
    }
    report.push(depth, "1 in F_n", identity_in(s.f(depth), s.group().identity()));
    report.growth = (0..=depth).map(|n| s.growth(n)).collect();
    let mut v = Verdict::Pass;
    for n in 0..depth {
        if report.growth[n] >= report.growth[n + 1] {
            v = Verdict::fail(
                Vec::new(),
                format!("r_{} = {} is not below r_{} = {}", n, report.growth[n], n + 1, report.growth[n + 1]),
            );
            break;
        }
    }
    report.push_global("growth strictly increasing", v);
    Ok(report.finish())
}

/// `max_{g∈K} #(gF_n △ F_n)/#F_n < ε_n` at every constructed level `n ≥ 1`.
///
/// `F_0 = {1}` is fixed rather than chosen, so it is not held to a tolerance.
pub fn check_folner(s: &CFScheme, k: &FiniteSubset, eps: &FolnerSchedule) -> Result<ConditionReport, SchemeError> {
    let depth = s.depth();
    let rows: Vec<_> = (1..=depth)
        .into_par_iter()
        .map(|n| folner_defect(s.group(), s.f(n), k).map(|d| (n, d)))
        .collect::<Result<_, _>>()?;
    let mut report = ConditionReport::new("folner").with_param("K", set_list(k)).with_param("eps", eps.describe());
    for (n, (defect, arg)) in rows {
        let e = eps.eps(n);
        let v = if defect < e {
            Verdict::Pass
        } else {
            Verdict::fail(arg.into_iter().collect(), format!("defect {defect} is not below {e}"))
        };
        report.push(n, "folner defect below eps", v);
    }
    Ok(report.finish())
}

/// Smallest `l ≤ l_max` with `g^l F_n C_{n+1} ⊆ F_{n+1} ∖ F_n C_{n+1}`.
pub fn check_triangle(s: &CFScheme, g: &GroupElement, n: usize, l_max: u64) -> Result<Option<u64>, SchemeError> {
    let group = s.group();
    group.validate(g)?;
    if let Some(order) = classify(group, g) {
        return Err(SchemeError::WrongDichotomy(format!("{g} has finite order {order}")));
    }
    if n >= s.depth() {
        return Err(SchemeError::Precondition(format!("level {n} is not below depth {}", s.depth())));
    }
    let (f, next) = (s.f(n), s.f(n + 1));
    let cs = s.c_elements(n + 1);
    let id = group.identity();
    // the pieces F_n c are shapes whenever F_n is, so translates stay cheap
    let pieces: Vec<FiniteSubset> = cs.iter().map(|c| f.translate(group, id, c)).collect::<Result<_, _>>()?;
    let structural = f.is_shape() && next.is_shape();
    let mut h = id.clone();
    'search: for l in 1..=l_max {
        h = group.mul(g, &h)?;
        if structural {
            for p in &pieces {
                let moved = p.translate(group, &h, id)?;
                if moved.escape(next).is_some() || pieces.iter().any(|q| !moved.is_disjoint(q)) {
                    continue 'search;
                }
            }
            return Ok(Some(l));
        }
        for c in &cs {
            let moved = vec![Factor::Point(h.clone()), Factor::Set(f), Factor::Point(c.clone())];
            if inclusion(group, &moved, next)? != Inclusion::Inside {
                continue 'search;
            }
            for d in &cs {
                let fixed = vec![Factor::Set(f), Factor::Point(d.clone())];
                if overlap(group, &moved, &fixed)? != Overlap::Disjoint {
                    continue 'search;
                }
            }
        }
        return Ok(Some(l));
    }
    Ok(None)
}

/// Levels with `gF_n = F_n` for a finite-order `g`; passes when there is one.
pub fn check_square(s: &CFScheme, g: &GroupElement) -> Result<ConditionReport, SchemeError> {
    let group = s.group();
    group.validate(g)?;
    if classify(group, g).is_none() {
        return Err(SchemeError::WrongDichotomy(format!("{g} has infinite order")));
    }
    let id = group.identity();
    let mut report = ConditionReport::new("square").with_param("g", g);
    let mut any = false;
    for n in 0..=s.depth() {
        let f = s.f(n);
        let escape = match f {
            FiniteSubset::Explicit(set) => {
                let mut out = None;
                for x in set {
                    let y = group.mul(g, x)?;
                    if !f.contains(&y) {
                        out = Some(y);
                        break;
                    }
                }
                out
            }
            _ => f.translate(group, g, id)?.escape(f),
        };
        let v = match escape {
            None => {
                any = true;
                Verdict::Pass
            }
            Some(y) => Verdict::fail(vec![y.clone()], format!("{y} lies in gF_{n} but not in F_{n}")),
        };
        report.push(n, "gF_n = F_n", v);
    }
    let v = if any { Verdict::Pass } else { Verdict::fail(vec![g.clone()], "no level is g-invariant") };
    report.push_global("some level invariant", v);
    report.pass = any;
    Ok(report)
}

fn mixing_level(s: &CFScheme, n: usize) -> Result<Vec<(&'static str, Verdict)>, SchemeError> {
    let group = s.group();
    let (f, next) = (s.f(n), s.f(n + 1));
    let cs = s.c_elements(n + 1);
    let words: Vec<(GroupElement, Word<'_>)> = cs
        .iter()
        .map(|c| (c.clone(), vec![Factor::Set(f), Factor::Inv(f), Factor::Set(f), Factor::Point(c.clone())]))
        .collect();
    let first = all_inside(group, &words, next)?;

    // F_n F_n⁻¹, then F_n c_i c_j⁻¹ F_n⁻¹ for i > j, then for i < j
    let mut family: Vec<(Option<(usize, usize)>, GroupElement)> = vec![(None, group.identity().clone())];
    for upper in [true, false] {
        for (i, c1) in cs.iter().enumerate() {
            for (j, c2) in cs.iter().enumerate() {
                if (upper && i > j) || (!upper && i < j) {
                    family.push((Some((i, j)), group.mul(c1, &group.inv(c2))?));
                }
            }
        }
    }
    let word = |x: &GroupElement| vec![Factor::Set(f), Factor::Point(x.clone()), Factor::Inv(f)];
    let label = |p: &Option<(usize, usize)>| match p {
        Some((i, j)) => format!("F_n·{}·{}^-1·F_n^-1", cs[*i], cs[*j]),
        None => "F_n·F_n^-1".to_string(),
    };
    let pairs: Vec<(usize, usize)> =
        (0..family.len()).flat_map(|a| (a + 1..family.len()).map(move |b| (a, b))).collect();
    let results: Vec<Option<Verdict>> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<Option<Verdict>, SchemeError> {
            let ((pa, xa), (pb, xb)) = (&family[a], &family[b]);
            let reversed = matches!((pa, pb), (Some((i, j)), Some((k, l))) if i == l && j == k);
            if reversed && xa == xb {
                return Ok(None);
            }
            Ok(match overlap(group, &word(xa), &word(xb))? {
                Overlap::Disjoint => None,
                Overlap::Meets(e) => Some(Verdict::fail(
                    vec![e.clone(), xa.clone(), xb.clone()],
                    format!("{e} lies in {} and {}", label(pa), label(pb)),
                )),
                Overlap::Undecided(m) => Some(undecided(m)),
            })
        })
        .collect::<Result<_, _>>()?;
    let second = results.into_iter().flatten().next().unwrap_or(Verdict::Pass);
    Ok(vec![("(i) F_n F_n^-1 F_n C_{n+1} subset of F_{n+1}", first), ("(ii) pairwise disjoint", second)])
}

/// Mixing conditions (i) and (ii) per level and (iii) over the sequence.
pub fn check_mixing(s: &CFScheme) -> Result<ConditionReport, SchemeError> {
    let depth = s.depth();
    if depth == 0 {
        return Err(SchemeError::NothingToCheck);
    }
    let levels: Vec<_> = (0..depth).into_par_iter().map(|n| mixing_level(s, n)).collect::<Result<_, _>>()?;
    let mut report = ConditionReport::new("mixing").with_param("depth", depth);
    for (n, clauses) in levels.into_iter().enumerate() {
        for (name, v) in clauses {
            report.push(n, name, v);
        }
    }
    let sizes: Vec<u128> = (1..=depth).map(|n| s.c(n).len()).collect();
    let mut v = Verdict::Pass;
    for k in 1..sizes.len() {
        if sizes[k] <= sizes[k - 1] {
            v = Verdict::fail(Vec::new(), format!("#C_{} = {} is not above #C_{} = {}", k + 1, sizes[k], k, sizes[k - 1]));
            break;
        }
    }
    report.push_global("(iii) #C_n strictly increasing", v);
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn z(x: i64) -> GroupElement {
        GroupElement::lattice([x])
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn s1_base_passes_with_growth() {
        for s in [s1(), s1_explicit()] {
            let rep = check_base(&s).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert_eq!(rep.growth, vec![r(1, 1), r(5, 1), r(141, 4)]);
        }
    }

    #[test]
    fn duplicate_c_collapses() {
        let z = GroupDescriptor::integers();
        let s = CFScheme::new(z, vec![ints([0]), ints(-1..=8), ints(-20..=120)], vec![ints([0, 0]), ints([0, 30])]).unwrap();
        let rep = check_base(&s).unwrap();
        assert!(!rep.level(0).unwrap().clause("#C_{n+1} > 1").unwrap().is_pass());
    }

    #[test]
    fn equality_is_not_proper() {
        let z = GroupDescriptor::integers();
        let exact = ints((-10..=17).chain(20..=47));
        let s = CFScheme::new(z, vec![ints([0]), ints(-1..=8), exact], vec![ints([0, 3]), ints([0, 30])]).unwrap();
        let rep = check_base(&s).unwrap();
        let v = rep.level(1).unwrap().clause("F_n^-1 F_n F_n C_{n+1} proper subset of F_{n+1}").unwrap();
        assert!(!v.is_pass());
        assert!(rep.level(0).unwrap().passed());
    }

    #[test]
    fn removing_a_product_element_is_caught() {
        let zg = GroupDescriptor::integers();
        for removed in [-10, 0, 17, 20, 33, 47] {
            let f2 = ints((-20..=120).filter(|x| *x != removed));
            let s = CFScheme::new(zg.clone(), vec![ints([0]), ints(-1..=8), f2], vec![ints([0, 3]), ints([0, 30])])
                .unwrap();
            let rep = check_base(&s).unwrap();
            let v = rep.level(1).unwrap().clause("F_n^-1 F_n F_n C_{n+1} proper subset of F_{n+1}").unwrap();
            assert_eq!(v.witness().unwrap().elements[0], z(removed));
        }
    }

    #[test]
    fn folner_examples() {
        let s = s1();
        let one = FiniteSubset::singleton(z(1));
        let rep = check_folner(&s, &one, &FolnerSchedule::Constant(r(1, 4))).unwrap();
        assert!(rep.level(1).unwrap().passed());
        let rep = check_folner(&s, &one, &FolnerSchedule::Constant(r(1, 10))).unwrap();
        let v = rep.level(1).unwrap().clause("folner defect below eps").unwrap();
        assert_eq!(v.witness().unwrap().elements, vec![z(1)]);
        let id = FiniteSubset::singleton(z(0));
        assert!(check_folner(&s, &id, &FolnerSchedule::Constant(r(1, 1000))).unwrap().pass);
    }

    #[test]
    fn triangle_examples() {
        for s in [s1(), s1_explicit()] {
            assert_eq!(check_triangle(&s, &z(1), 1, 100).unwrap(), Some(10));
            assert_eq!(check_triangle(&s, &z(1), 1, 5).unwrap(), None);
        }
        assert!(matches!(check_triangle(&s1(), &z(0), 0, 5), Err(SchemeError::WrongDichotomy(_))));
    }

    #[test]
    fn square_examples() {
        let g = GroupDescriptor::direct_sum(vec![2]).unwrap();
        let e = |i| g.basis(i).unwrap();
        let f1 = FiniteSubset::from_elements([g.identity().clone(), e(1)]);
        let s = CFScheme::new(
            g.clone(),
            vec![FiniteSubset::singleton(g.identity().clone()), f1.clone()],
            vec![f1.clone()],
        )
        .unwrap();
        let rep = check_square(&s, &e(1)).unwrap();
        assert!(rep.pass && rep.level(1).unwrap().passed());
        let rep = check_square(&s, &e(3)).unwrap();
        assert_eq!(rep.level(1).unwrap().clauses[0].verdict.witness().unwrap().elements, vec![e(3)]);
        assert!(!rep.pass);

        let g3 = GroupDescriptor::direct_sum(vec![3]).unwrap();
        let e1 = g3.basis(1).unwrap();
        let f = FiniteSubset::from_elements([g3.identity().clone(), e1.clone()]);
        let s = CFScheme::new(g3.clone(), vec![FiniteSubset::singleton(g3.identity().clone()), f.clone()], vec![f])
            .unwrap();
        let rep = check_square(&s, &e1).unwrap();
        let w = rep.level(1).unwrap().clauses[0].verdict.witness().unwrap();
        assert_eq!(w.elements, vec![g3.direct_sum_element(&[(1, 2)]).unwrap()]);
        assert!(matches!(check_square(&s1(), &z(1)), Err(SchemeError::WrongDichotomy(_))));
    }

    #[test]
    fn mixing_examples() {
        for s in [s1(), s1_explicit()] {
            let rep = check_mixing(&s).unwrap();
            assert!(rep.level(1).unwrap().passed());
            assert!(rep.level(0).unwrap().passed());
            assert!(!rep.global[0].verdict.is_pass());
            assert!(!rep.pass);
        }
        let zg = GroupDescriptor::integers();
        let s = CFScheme::new(zg, vec![ints([0]), ints(-1..=8), ints(-20..=120)], vec![ints([0, 3]), ints([0, 15])])
            .unwrap();
        let rep = check_mixing(&s).unwrap();
        let v = rep.level(1).unwrap().clause("(ii) pairwise disjoint").unwrap();
        assert_eq!(v.witness().unwrap().elements[0], z(6));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&check_mixing(&s1()).unwrap()).unwrap();
        let b = serde_json::to_string(&check_mixing(&s1()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
