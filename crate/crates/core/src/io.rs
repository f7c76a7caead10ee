//! JSON wire formats for groups, schemes, compact open sets and samples.
//!
//! Parsers never panic on malformed input: every failure is an [`IoError`]
//! naming the offending field. Integers are bounded so that downstream
//! arithmetic on parsed values cannot overflow.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cfspace::CompactOpen;
use crate::groups::{
    Coords, FiniteSubset, GroupDescriptor, GroupElement, GroupKind, HeisenbergPara, LatticeBox, SpanCoset, Support,
};
use crate::scheme::CFScheme;
use crate::suspension::PoissonSample;

/// Largest accepted absolute value of a coordinate.
pub const COORD_LIMIT: i64 = 1 << 40;
/// Largest accepted absolute value of a Heisenberg shear.
pub const SHEAR_LIMIT: i64 = 1 << 20;
/// Largest accepted lattice dimension.
pub const DIM_LIMIT: u64 = 16;
/// Largest accepted cardinality of a shape.
pub const SHAPE_LIMIT: u128 = 1 << 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("{field}: {msg}")]
    Field { field: String, msg: String },
}

fn field(path: &str, msg: impl Into<String>) -> IoError {
    IoError::Field { field: path.to_string(), msg: msg.into() }
}

fn parse_json(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let msg = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m).to_string();
        IoError::Syntax { line: e.line(), column: e.column(), msg }
    })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| field(path, "expected an object"))
}

fn get<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, IoError> {
    m.get(key).ok_or_else(|| field(&join(path, key), "missing"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| field(path, "expected an array"))
}

fn int(v: &Value, path: &str) -> Result<i64, IoError> {
    let x = v.as_i64().ok_or_else(|| field(path, "expected an integer"))?;
    if x.abs() > COORD_LIMIT {
        return Err(field(path, format!("integer {x} exceeds the limit {COORD_LIMIT}")));
    }
    Ok(x)
}

fn uint(v: &Value, path: &str) -> Result<u64, IoError> {
    v.as_u64().ok_or_else(|| field(path, "expected a nonnegative integer"))
}

fn check_keys(m: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), IoError> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(field(&join(path, k), "unknown field")),
        None => Ok(()),
    }
}

pub fn group_from_value(v: &Value, path: &str) -> Result<GroupDescriptor, IoError> {
    let m = object(v, path)?;
    check_keys(m, &["kind", "params"], path)?;
    if m.get("kind").and_then(Value::as_str) == Some("integer-lattice") {
        let dim = m.get("params").and_then(|p| p.get("dim")).and_then(Value::as_u64);
        if dim.is_some_and(|d| d > DIM_LIMIT) {
            return Err(field(&join(path, "params.dim"), format!("dimension above {DIM_LIMIT}")));
        }
    }
    serde_json::from_value(v.clone()).map_err(|e| field(path, e.to_string()))
}

pub fn parse_group(text: &str) -> Result<GroupDescriptor, IoError> {
    group_from_value(&parse_json(text)?, "")
}

pub fn element_from_value(group: &GroupDescriptor, v: &Value, path: &str) -> Result<GroupElement, IoError> {
    let items = array(v, path)?;
    let g = match group.kind() {
        GroupKind::IntegerLattice { dim } => {
            if items.len() != *dim {
                return Err(field(path, format!("expected {dim} coordinates, got {}", items.len())));
            }
            let coords = items.iter().enumerate().map(|(k, x)| int(x, &format!("{path}[{k}]"))).collect::<Result<Vec<_>, _>>()?;
            GroupElement::lattice(coords)
        }
        GroupKind::Heisenberg => {
            if items.len() != 3 {
                return Err(field(path, "expected a triple [a, b, c]"));
            }
            let t = items.iter().enumerate().map(|(k, x)| int(x, &format!("{path}[{k}]"))).collect::<Result<Vec<_>, _>>()?;
            GroupElement::heisenberg(t[0], t[1], t[2])
        }
        GroupKind::DirectSum { .. } => {
            let mut pairs = Vec::with_capacity(items.len());
            for (k, p) in items.iter().enumerate() {
                let here = format!("{path}[{k}]");
                let pair = array(p, &here)?;
                if pair.len() != 2 {
                    return Err(field(&here, "expected an [index, residue] pair"));
                }
                let index = uint(&pair[0], &format!("{here}[0]"))?;
                let index = u32::try_from(index).map_err(|_| field(&format!("{here}[0]"), "index too large"))?;
                pairs.push((index, int(&pair[1], &format!("{here}[1]"))?));
            }
            group.direct_sum_element(&pairs).map_err(|e| field(path, e.to_string()))?
        }
    };
    group.validate(&g).map_err(|e| field(path, e.to_string()))?;
    Ok(g)
}

fn elements_from_value(
    group: &GroupDescriptor,
    v: &Value,
    path: &str,
) -> Result<(BTreeSet<GroupElement>, usize), IoError> {
    let items = array(v, path)?;
    let mut set = BTreeSet::new();
    let mut dups = 0;
    for (k, x) in items.iter().enumerate() {
        if !set.insert(element_from_value(group, x, &format!("{path}[{k}]"))?) {
            dups += 1;
        }
    }
    Ok((set, dups))
}

/// A subset given either as an element list or as a shape object
/// `{"box": {"lo", "hi"}}`, `{"para": {"a", "b", "c", "p", "q"}}` or
/// `{"span": {"width", "offset"}}`. Returns the number of duplicates dropped.
pub fn subset_from_value(group: &GroupDescriptor, v: &Value, path: &str) -> Result<(FiniteSubset, usize), IoError> {
    if v.is_array() {
        let (set, dups) = elements_from_value(group, v, path)?;
        return Ok((FiniteSubset::Explicit(set), dups));
    }
    let m = object(v, path)?;
    if m.len() != 1 {
        return Err(field(path, "expected an element list or a single shape"));
    }
    let (key, body) = m.iter().next().expect("one entry");
    let here = join(path, key);
    let shape = match (key.as_str(), group.kind()) {
        ("box", GroupKind::IntegerLattice { dim }) => {
            let b = object(body, &here)?;
            check_keys(b, &["lo", "hi"], &here)?;
            let corner = |name: &str| -> Result<Coords, IoError> {
                let at = join(&here, name);
                let v = array(get(b, name, &here)?, &at)?;
                if v.len() != *dim {
                    return Err(field(&at, format!("expected {dim} coordinates")));
                }
                v.iter().enumerate().map(|(k, x)| int(x, &format!("{at}[{k}]"))).collect()
            };
            let bx = LatticeBox::new(corner("lo")?, corner("hi")?).ok_or_else(|| field(&here, "lo exceeds hi"))?;
            FiniteSubset::Box(bx)
        }
        ("para", GroupKind::Heisenberg) => {
            let b = object(body, &here)?;
            check_keys(b, &["a", "b", "c", "p", "q"], &here)?;
            let range = |name: &str| -> Result<(i64, i64), IoError> {
                let at = join(&here, name);
                let v = array(get(b, name, &here)?, &at)?;
                if v.len() != 2 {
                    return Err(field(&at, "expected [lo, hi]"));
                }
                Ok((int(&v[0], &format!("{at}[0]"))?, int(&v[1], &format!("{at}[1]"))?))
            };
            let shear = |name: &str| -> Result<i64, IoError> {
                match b.get(name) {
                    None => Ok(0),
                    Some(x) => {
                        let at = join(&here, name);
                        let s = x.as_i64().ok_or_else(|| field(&at, "expected an integer"))?;
                        if s.abs() > SHEAR_LIMIT {
                            return Err(field(&at, format!("shear exceeds {SHEAR_LIMIT}")));
                        }
                        Ok(s)
                    }
                }
            };
            let p = HeisenbergPara { a: range("a")?, b: range("b")?, c: range("c")?, p: shear("p")?, q: shear("q")? };
            if !p.is_valid() {
                return Err(field(&here, "empty range"));
            }
            FiniteSubset::Para(p)
        }
        ("span", GroupKind::DirectSum { orders }) => {
            let b = object(body, &here)?;
            check_keys(b, &["width", "offset"], &here)?;
            let width = uint(get(b, "width", &here)?, &join(&here, "width"))?;
            let width = u32::try_from(width).map_err(|_| field(&join(&here, "width"), "too large"))?;
            let offset = match b.get("offset") {
                None => Support::new(),
                Some(o) => match element_from_value(group, o, &join(&here, "offset"))? {
                    GroupElement::DirectSum(s) => s,
                    _ => unreachable!("direct-sum group"),
                },
            };
            if offset.iter().any(|(i, _)| *i <= width) {
                return Err(field(&join(&here, "offset"), "offset must be supported above the width"));
            }
            let mut len: u128 = 1;
            for i in 0..width as usize {
                len = len
                    .checked_mul(u128::from(orders[i % orders.len()]))
                    .filter(|l| *l <= SHAPE_LIMIT)
                    .ok_or_else(|| field(&join(&here, "width"), "span too large"))?;
            }
            FiniteSubset::Span(SpanCoset { width, offset, orders: orders.clone() })
        }
        (other, _) => return Err(field(&here, format!("shape `{other}` does not fit the group"))),
    };
    let len = match &shape {
        FiniteSubset::Box(b) => checked_len(b.lo.iter().zip(&b.hi).map(|(l, h)| h - l + 1)),
        FiniteSubset::Para(p) => checked_len([p.a, p.b, p.c].iter().map(|(l, h)| h - l + 1)),
        _ => Some(shape.len()),
    };
    if len.is_none_or(|l| l > SHAPE_LIMIT) {
        return Err(field(&here, "shape too large"));
    }
    Ok((shape, 0))
}

fn checked_len(mut sides: impl Iterator<Item = i64>) -> Option<u128> {
    sides.try_fold(1u128, |acc, s| acc.checked_mul(s as u128))
}

pub fn subset_to_value(s: &FiniteSubset) -> Value {
    match s {
        FiniteSubset::Explicit(e) => json!(e),
        FiniteSubset::Box(b) => json!({ "box": { "lo": b.lo.as_slice(), "hi": b.hi.as_slice() } }),
        FiniteSubset::Para(p) => json!({ "para": p }),
        FiniteSubset::Span(sp) => {
            let offset: Vec<[u32; 2]> = sp.offset.iter().map(|(i, r)| [*i, *r]).collect();
            json!({ "span": { "width": sp.width, "offset": offset } })
        }
    }
}

/// A parsed scheme with any non-fatal diagnostics.
#[derive(Clone, Debug)]
pub struct LoadedScheme {
    pub scheme: CFScheme,
    pub warnings: Vec<String>,
}

pub fn scheme_from_value(v: &Value) -> Result<LoadedScheme, IoError> {
    let m = object(v, "")?;
    check_keys(m, &["group", "F", "C"], "")?;
    let group = group_from_value(get(m, "group", "")?, "group")?;
    let mut warnings = Vec::new();
    let mut sets = |key: &str| -> Result<Vec<FiniteSubset>, IoError> {
        let items = array(get(m, key, "")?, key)?;
        let offset = usize::from(key == "C");
        items
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let (set, dups) = subset_from_value(&group, x, &format!("{key}[{}]", k + offset))?;
                if dups > 0 {
                    warnings.push(format!("{key}[{}]: dropped {dups} duplicate element(s)", k + offset));
                }
                Ok(set)
            })
            .collect()
    };
    let f = sets("F")?;
    let c = sets("C")?;
    let scheme = CFScheme::new(group, f, c).map_err(|e| field("", e.to_string()))?;
    Ok(LoadedScheme { scheme, warnings })
}

/// Parses a scheme file `{"group", "F", "C"}`; `C` is listed from `C_1`.
pub fn parse_scheme(text: &str) -> Result<LoadedScheme, IoError> {
    scheme_from_value(&parse_json(text)?)
}

pub fn scheme_to_value(s: &CFScheme) -> Value {
    json!({
        "group": s.group(),
        "F": s.f_sets().iter().map(subset_to_value).collect::<Vec<_>>(),
        "C": s.c_sets().iter().map(subset_to_value).collect::<Vec<_>>(),
    })
}

pub fn scheme_to_string(s: &CFScheme) -> String {
    serde_json::to_string_pretty(&scheme_to_value(s)).expect("serializable")
}

pub fn compact_open_from_value(s: &CFScheme, v: &Value, path: &str) -> Result<CompactOpen, IoError> {
    let m = object(v, path)?;
    check_keys(m, &["level", "names"], path)?;
    let level = uint(get(m, "level", path)?, &join(path, "level"))?;
    let level = usize::try_from(level).map_err(|_| field(&join(path, "level"), "too large"))?;
    let (names, _) = elements_from_value(s.group(), get(m, "names", path)?, &join(path, "names"))?;
    CompactOpen::new(s, level, FiniteSubset::Explicit(names)).map_err(|e| field(path, e.to_string()))
}

/// Parses `{"level": m, "names": [element…]}` against a scheme.
pub fn parse_compact_open(s: &CFScheme, text: &str) -> Result<CompactOpen, IoError> {
    compact_open_from_value(s, &parse_json(text)?, "")
}

/// Parses `{"resolution", "seed", "counts": [[name, k]…]}` with an optional
/// `"region"` name list.
pub fn parse_sample(s: &CFScheme, text: &str) -> Result<PoissonSample, IoError> {
    let v = parse_json(text)?;
    let m = object(&v, "")?;
    check_keys(m, &["resolution", "seed", "region", "counts"], "")?;
    let resolution = uint(get(m, "resolution", "")?, "resolution")?;
    let resolution = usize::try_from(resolution).map_err(|_| field("resolution", "too large"))?;
    let seed = uint(get(m, "seed", "")?, "seed")?;
    let region = match m.get("region") {
        None => None,
        Some(r) => Some(elements_from_value(s.group(), r, "region")?.0.into_iter().collect()),
    };
    let items = array(get(m, "counts", "")?, "counts")?;
    let mut counts = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let here = format!("counts[{k}]");
        let pair = array(item, &here)?;
        if pair.len() != 2 {
            return Err(field(&here, "expected [name, count]"));
        }
        let name = element_from_value(s.group(), &pair[0], &format!("{here}[0]"))?;
        counts.push((name, uint(&pair[1], &format!("{here}[1]"))?));
    }
    PoissonSample::from_parts(s, resolution, seed, region, counts).map_err(|e| field("", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::fixtures::{s1, s1_explicit};

    #[test]
    fn scheme_round_trip() {
        for s in [s1(), s1_explicit()] {
            let text = scheme_to_string(&s);
            let back = parse_scheme(&text).unwrap();
            assert_eq!(back.scheme, s);
            assert!(back.warnings.is_empty());
        }
    }

    #[test]
    fn duplicates_are_dropped_with_a_warning() {
        let text = r#"{"group":{"kind":"integer-lattice","params":{"dim":1}},
            "F":[[[0]],[[-1],[0],[1],[2],[3],[4],[5],[6],[7],[8]]],
            "C":[[[0],[0],[3]]]}"#;
        let loaded = parse_scheme(text).unwrap();
        assert_eq!(loaded.scheme.c(1).len(), 2);
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn errors_name_the_field() {
        let text = r#"{"group":{"kind":"integer-lattice","params":{"dim":1}},"F":[[[0]],[[0,1]]],"C":[[[0]]]}"#;
        match parse_scheme(text) {
            Err(IoError::Field { field, .. }) => assert_eq!(field, "F[1][0]"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_scheme("{\"group\":"), Err(IoError::Syntax { .. })));
        assert!(parse_group(r#"{"kind":"integer-lattice","params":{"dim":100000000}}"#).is_err());
        assert!(parse_group(r#"{"kind":"integer-lattice","params":{"dim":2}}"#).is_ok());
    }

    #[test]
    fn shapes_parse_and_print() {
        let h = GroupDescriptor::heisenberg();
        let v = json!({"para": {"a": [-1, 1], "b": [0, 2], "c": [-3, 3], "p": 1}});
        let (p, _) = subset_from_value(&h, &v, "F[0]").unwrap();
        assert_eq!(subset_from_value(&h, &subset_to_value(&p), "").unwrap().0, p);
        let d = GroupDescriptor::direct_sum(vec![2]).unwrap();
        let v = json!({"span": {"width": 3, "offset": [[5, 1]]}});
        let (sp, _) = subset_from_value(&d, &v, "F[0]").unwrap();
        assert_eq!(sp.len(), 8);
        assert!(subset_from_value(&d, &json!({"span": {"width": 3, "offset": [[2, 1]]}}), "").is_err());
        assert!(subset_from_value(&d, &json!({"span": {"width": 4000}}), "").is_err());
        assert!(subset_from_value(&h, &json!({"box": {"lo": [0], "hi": [1]}}), "").is_err());
    }

    #[test]
    fn compact_open_and_sample() {
        let s = s1();
        let a = parse_compact_open(&s, r#"{"level":1,"names":[[0],[3]]}"#).unwrap();
        assert_eq!(a.names().len(), 2);
        assert_eq!(serde_json::to_value(&a).unwrap(), json!({"level": 1, "names": [[0], [3]]}));
        assert!(parse_compact_open(&s, r#"{"level":1,"names":[[9]]}"#).is_err());
        let x = crate::suspension::sample(&s, &CompactOpen::level_set(&s, 2).unwrap(), 2, 3).unwrap();
        let text = serde_json::to_string(&x).unwrap();
        assert_eq!(parse_sample(&s, &text).unwrap(), x);
    }
}
