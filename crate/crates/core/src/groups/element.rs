use std::fmt;

use serde::ser::{Serialize, SerializeSeq, Serializer};
use smallvec::SmallVec;

/// Coordinates of an integer-lattice element.
pub type Coords = SmallVec<[i64; 4]>;

/// Finitely supported residue map of a direct-sum element: `(index, residue)`
/// pairs sorted by index, residues nonzero and reduced.
pub type Support = SmallVec<[(u32, u32); 4]>;

/// An element of one of the supported groups, always in canonical form.
///
/// Structural equality, hashing and ordering agree on canonical forms, so
/// elements can be used directly as set members and map keys. The derived
/// ordering is the lexicographic order on encodings used to break ties
/// between elements of equal norm.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Lattice(Coords),
    DirectSum(Support),
    Heisenberg([i64; 3]),
}

impl GroupElement {
    pub fn lattice(coords: impl IntoIterator<Item = i64>) -> Self {
        GroupElement::Lattice(coords.into_iter().collect())
    }

    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        GroupElement::Heisenberg([a, b, c])
    }

    /// Lattice coordinates, if this is a lattice element.
    pub fn coords(&self) -> Option<&[i64]> {
        match self {
            GroupElement::Lattice(v) => Some(v),
            _ => None,
        }
    }

    pub fn triple(&self) -> Option<[i64; 3]> {
        match self {
            GroupElement::Heisenberg(t) => Some(*t),
            _ => None,
        }
    }

    pub fn support(&self) -> Option<&[(u32, u32)]> {
        match self {
            GroupElement::DirectSum(s) => Some(s),
            _ => None,
        }
    }

    /// Stable byte encoding of the canonical form; used to key random streams.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32);
        match self {
            GroupElement::Lattice(v) => {
                out.push(b'L');
                out.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            GroupElement::DirectSum(s) => {
                out.push(b'D');
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                for (i, r) in s {
                    out.extend_from_slice(&i.to_le_bytes());
                    out.extend_from_slice(&r.to_le_bytes());
                }
            }
            GroupElement::Heisenberg(t) => {
                out.push(b'H');
                for x in t {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out
    }
}

/// Wire form: integer array for lattice elements, `[a, b, c]` for Heisenberg
/// triples and `[[index, residue], …]` for direct-sum elements.
impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupElement::Lattice(v) => v.as_slice().serialize(s),
            GroupElement::Heisenberg(t) => t.serialize(s),
            GroupElement::DirectSum(pairs) => {
                let mut seq = s.serialize_seq(Some(pairs.len()))?;
                for (i, r) in pairs {
                    seq.serialize_element(&[*i, *r])?;
                }
                seq.end()
            }
        }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Lattice(v) if v.len() == 1 => write!(f, "{}", v[0]),
            GroupElement::Lattice(v) => {
                write!(f, "(")?;
                for (k, x) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::DirectSum(s) if s.is_empty() => write!(f, "0"),
            GroupElement::DirectSum(s) => {
                for (k, (i, r)) in s.iter().enumerate() {
                    if k > 0 {
                        write!(f, "+")?;
                    }
                    if *r == 1 {
                        write!(f, "e{i}")?;
                    } else {
                        write!(f, "{r}e{i}")?;
                    }
                }
                Ok(())
            }
            GroupElement::Heisenberg([a, b, c]) => write!(f, "({a},{b},{c})"),
        }
    }
}
