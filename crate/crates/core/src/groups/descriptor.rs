use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::element::{Coords, GroupElement, Support};
use super::GroupError;

/// Which concrete countable amenable group a descriptor refers to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// `Z^dim` with the standard basis as generators.
    IntegerLattice { dim: usize },
    /// Countable direct sum of cyclic groups `⊕_{i≥1} Z/order(i)`, where the
    /// order of the `i`-th summand cycles through `orders`.
    DirectSum { orders: Vec<u32> },
    /// Integer Heisenberg group, `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heisenberg,
}

/// A concrete group together with its stored generator set.
///
/// The generators double as the default Følner test set. Norms are word
/// norms: ℓ¹ on the lattice, exact word length in `x = (1,0,0)`,
/// `y = (0,1,0)` on the Heisenberg group, and on the direct sum the
/// weighted word length in which `e_i` costs `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupDescriptor {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    identity: GroupElement,
}

impl GroupDescriptor {
    pub fn new(kind: GroupKind) -> Result<Self, GroupError> {
        let (generators, identity) = match &kind {
            GroupKind::IntegerLattice { dim } => {
                if *dim == 0 {
                    return Err(GroupError::Domain("lattice dimension must be at least 1".into()));
                }
                let gens = (0..*dim)
                    .map(|i| GroupElement::lattice((0..*dim).map(|j| i64::from(i == j))))
                    .collect();
                (gens, GroupElement::lattice(std::iter::repeat_n(0, *dim)))
            }
            GroupKind::DirectSum { orders } => {
                if orders.is_empty() || orders.iter().any(|&o| o < 2) {
                    return Err(GroupError::Domain(
                        "direct-sum orders must be a nonempty list of integers >= 2".into(),
                    ));
                }
                let gens = (1..=orders.len() as u32)
                    .map(|i| GroupElement::DirectSum(Support::from_slice(&[(i, 1)])))
                    .collect();
                (gens, GroupElement::DirectSum(Support::new()))
            }
            GroupKind::Heisenberg => (
                vec![GroupElement::heisenberg(1, 0, 0), GroupElement::heisenberg(0, 1, 0)],
                GroupElement::heisenberg(0, 0, 0),
            ),
        };
        Ok(GroupDescriptor { kind, generators, identity })
    }

    pub fn integers() -> Self {
        Self::lattice(1)
    }

    pub fn lattice(dim: usize) -> Self {
        Self::new(GroupKind::IntegerLattice { dim }).expect("dimension >= 1")
    }

    pub fn direct_sum(orders: Vec<u32>) -> Result<Self, GroupError> {
        Self::new(GroupKind::DirectSum { orders })
    }

    pub fn heisenberg() -> Self {
        Self::new(GroupKind::Heisenberg).expect("heisenberg descriptor")
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn identity(&self) -> &GroupElement {
        &self.identity
    }

    /// Groups of this kind have no nontrivial torsion.
    pub fn is_torsion_free(&self) -> bool {
        !matches!(self.kind, GroupKind::DirectSum { .. })
    }

    /// Order of the `index`-th summand of a direct sum (indices start at 1).
    pub fn summand_order(&self, index: u32) -> Option<u32> {
        match &self.kind {
            GroupKind::DirectSum { orders } if index >= 1 => {
                Some(orders[(index as usize - 1) % orders.len()])
            }
            _ => None,
        }
    }

    /// `e_index` in a direct sum, or the `index`-th basis vector (1-based) of a lattice.
    pub fn basis(&self, index: u32) -> Result<GroupElement, GroupError> {
        match &self.kind {
            GroupKind::DirectSum { .. } if index >= 1 => {
                Ok(GroupElement::DirectSum(Support::from_slice(&[(index, 1)])))
            }
            GroupKind::IntegerLattice { dim } if index >= 1 && (index as usize) <= *dim => {
                Ok(GroupElement::lattice((1..=*dim).map(|j| i64::from(j == index as usize))))
            }
            _ => Err(GroupError::Domain(format!("no basis element with index {index}"))),
        }
    }

    /// Checks that `g` is a canonical element of this group.
    pub fn validate(&self, g: &GroupElement) -> Result<(), GroupError> {
        match (&self.kind, g) {
            (GroupKind::IntegerLattice { dim }, GroupElement::Lattice(v)) if v.len() == *dim => Ok(()),
            (GroupKind::Heisenberg, GroupElement::Heisenberg(_)) => Ok(()),
            (GroupKind::DirectSum { .. }, GroupElement::DirectSum(s)) => {
                let mut prev = 0u32;
                for &(i, r) in s.iter() {
                    let order = self.summand_order(i).ok_or_else(|| {
                        GroupError::Domain(format!("direct-sum index {i} must be >= 1"))
                    })?;
                    if i <= prev {
                        return Err(GroupError::Domain("support indices must be strictly increasing".into()));
                    }
                    if r == 0 || r >= order {
                        return Err(GroupError::Domain(format!(
                            "residue {r} at index {i} is not a nonzero residue mod {order}"
                        )));
                    }
                    prev = i;
                }
                Ok(())
            }
            _ => Err(GroupError::KindMismatch),
        }
    }

    /// Builds a canonical direct-sum element from arbitrary `(index, residue)` pairs.
    pub fn direct_sum_element(&self, pairs: &[(u32, i64)]) -> Result<GroupElement, GroupError> {
        if !matches!(self.kind, GroupKind::DirectSum { .. }) {
            return Err(GroupError::KindMismatch);
        }
        let mut acc: std::collections::BTreeMap<u32, i64> = Default::default();
        for &(i, r) in pairs {
            let order = self
                .summand_order(i)
                .ok_or_else(|| GroupError::Domain(format!("direct-sum index {i} must be >= 1")))?;
            let e = acc.entry(i).or_insert(0);
            *e = (*e + r).rem_euclid(i64::from(order));
        }
        Ok(GroupElement::DirectSum(
            acc.into_iter().filter(|&(_, r)| r != 0).map(|(i, r)| (i, r as u32)).collect(),
        ))
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        match (g, h) {
            (GroupElement::Lattice(x), GroupElement::Lattice(y)) => {
                if x.len() != y.len() {
                    return Err(GroupError::KindMismatch);
                }
                Ok(GroupElement::Lattice(x.iter().zip(y).map(|(a, b)| a + b).collect()))
            }
            (GroupElement::Heisenberg([a, b, c]), GroupElement::Heisenberg([a2, b2, c2])) => {
                Ok(GroupElement::Heisenberg([a + a2, b + b2, c + c2 + a * b2]))
            }
            (GroupElement::DirectSum(x), GroupElement::DirectSum(y)) => {
                let mut out = Support::new();
                let (mut i, mut j) = (0, 0);
                while i < x.len() || j < y.len() {
                    let take = match (x.get(i), y.get(j)) {
                        (Some(&(ix, rx)), Some(&(iy, ry))) if ix == iy => {
                            i += 1;
                            j += 1;
                            let order = self.summand_order(ix).ok_or(GroupError::KindMismatch)?;
                            (ix, (rx + ry) % order)
                        }
                        (Some(&p), Some(&(iy, _))) if p.0 < iy => {
                            i += 1;
                            p
                        }
                        (Some(_), Some(&q)) => {
                            j += 1;
                            q
                        }
                        (Some(&p), None) => {
                            i += 1;
                            p
                        }
                        (None, Some(&q)) => {
                            j += 1;
                            q
                        }
                        (None, None) => unreachable!(),
                    };
                    if take.1 != 0 {
                        out.push(take);
                    }
                }
                Ok(GroupElement::DirectSum(out))
            }
            _ => Err(GroupError::KindMismatch),
        }
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        match g {
            GroupElement::Lattice(x) => GroupElement::Lattice(x.iter().map(|a| -a).collect()),
            GroupElement::Heisenberg([a, b, c]) => GroupElement::Heisenberg([-a, -b, a * b - c]),
            GroupElement::DirectSum(s) => GroupElement::DirectSum(
                s.iter()
                    .map(|&(i, r)| {
                        let order = self.summand_order(i).unwrap_or(r + 1);
                        (i, order - r)
                    })
                    .collect(),
            ),
        }
    }

    /// `g^k` for any integer `k`, by repeated squaring.
    pub fn pow(&self, g: &GroupElement, k: i64) -> Result<GroupElement, GroupError> {
        let base = if k < 0 { self.inv(g) } else { g.clone() };
        let mut e = k.unsigned_abs();
        let mut result = self.identity.clone();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq)?;
            }
        }
        Ok(result)
    }

    /// Least `k ≤ bound` with `g^k = 1`, or `None` when it exceeds the bound.
    pub fn order_of(&self, g: &GroupElement, bound: u64) -> Option<u64> {
        let mut acc = g.clone();
        for k in 1..=bound {
            if acc == self.identity {
                return Some(k);
            }
            acc = self.mul(&acc, g).ok()?;
        }
        None
    }

    /// Word norm of `g` with respect to the stored generators.
    pub fn norm(&self, g: &GroupElement) -> u64 {
        match g {
            GroupElement::Lattice(x) => x.iter().map(|a| a.unsigned_abs()).sum(),
            GroupElement::DirectSum(s) => s
                .iter()
                .map(|&(i, r)| {
                    let order = self.summand_order(i).unwrap_or(r + 1);
                    u64::from(i) * u64::from(r.min(order - r))
                })
                .sum(),
            GroupElement::Heisenberg(_) => heisenberg_word_length(self, g),
        }
    }

    /// All elements of norm exactly `r`, sorted by canonical encoding.
    pub fn shell(&self, r: u64) -> Vec<GroupElement> {
        let mut out = match &self.kind {
            GroupKind::IntegerLattice { dim } => {
                let mut acc = Vec::new();
                let mut buf = Coords::new();
                lattice_sphere(*dim, r as i64, &mut buf, &mut acc);
                acc.into_iter().map(GroupElement::Lattice).collect()
            }
            GroupKind::DirectSum { .. } => {
                let mut acc = Vec::new();
                weighted_sphere(self, 1, r, &mut Support::new(), &mut acc);
                acc.into_iter().map(GroupElement::DirectSum).collect()
            }
            GroupKind::Heisenberg => heisenberg_layers(self, r).pop().unwrap_or_default(),
        };
        out.sort();
        out
    }

    /// Direct-sum elements of norm `r` supported on indices above `width`,
    /// sorted. Empty for other kinds.
    pub fn shell_above(&self, width: u32, r: u64) -> Vec<GroupElement> {
        if !matches!(self.kind, GroupKind::DirectSum { .. }) {
            return Vec::new();
        }
        let mut acc = Vec::new();
        weighted_sphere(self, width + 1, r, &mut Support::new(), &mut acc);
        let mut out: Vec<GroupElement> = acc.into_iter().map(GroupElement::DirectSum).collect();
        out.sort();
        out
    }

    /// Candidate elements for scheme construction, enumerated shell by shell.
    ///
    /// Coincides with [`shell`](Self::shell) except on the Heisenberg group,
    /// whose exact word spheres are too expensive at the radii construction
    /// needs; there the shells of the homogeneous quasi-norm
    /// `|a| + |b| + ⌈2√|c|⌉` are used instead.
    pub fn candidate_shell(&self, r: u64) -> Vec<GroupElement> {
        match &self.kind {
            GroupKind::Heisenberg => {
                let mut out = Vec::new();
                let r = r as i64;
                for t in 0..=r {
                    let (cmin, cmax) = if t == 0 { (0, 0) } else { ((t - 1) * (t - 1) / 4 + 1, t * t / 4) };
                    if cmin > cmax {
                        continue;
                    }
                    let mut ab = Vec::new();
                    let mut buf = Coords::new();
                    lattice_sphere(2, r - t, &mut buf, &mut ab);
                    for v in &ab {
                        for cabs in cmin..=cmax {
                            out.push(GroupElement::heisenberg(v[0], v[1], cabs));
                            if cabs != 0 {
                                out.push(GroupElement::heisenberg(v[0], v[1], -cabs));
                            }
                        }
                    }
                }
                out.sort();
                out
            }
            _ => self.shell(r),
        }
    }

    /// Quasi-norm whose shells [`candidate_shell`](Self::candidate_shell) enumerates.
    pub fn candidate_norm(&self, g: &GroupElement) -> u64 {
        match g {
            GroupElement::Heisenberg([a, b, c]) => {
                a.unsigned_abs() + b.unsigned_abs() + ceil_two_sqrt(c.unsigned_abs())
            }
            _ => self.norm(g),
        }
    }
}

fn ceil_two_sqrt(c: u64) -> u64 {
    // least t with t^2 >= 4c
    let mut t = (2.0 * (c as f64).sqrt()).floor() as u64;
    while t * t < 4 * c {
        t += 1;
    }
    while t > 0 && (t - 1) * (t - 1) >= 4 * c {
        t -= 1;
    }
    t
}

fn lattice_sphere(dim: usize, r: i64, buf: &mut Coords, out: &mut Vec<Coords>) {
    if dim == 1 {
        buf.push(r);
        out.push(buf.clone());
        buf.pop();
        if r != 0 {
            buf.push(-r);
            out.push(buf.clone());
            buf.pop();
        }
        return;
    }
    for x in -r..=r {
        buf.push(x);
        lattice_sphere(dim - 1, r - x.abs(), buf, out);
        buf.pop();
    }
}

fn weighted_sphere(group: &GroupDescriptor, index: u32, r: u64, buf: &mut Support, out: &mut Vec<Support>) {
    if r == 0 {
        out.push(buf.clone());
        return;
    }
    if u64::from(index) > r {
        return;
    }
    let order = group.summand_order(index).expect("direct sum");
    // skip this index
    weighted_sphere(group, index + 1, r, buf, out);
    for res in 1..order {
        let cost = u64::from(index) * u64::from(res.min(order - res));
        if cost <= r {
            buf.push((index, res));
            weighted_sphere(group, index + 1, r - cost, buf, out);
            buf.pop();
        }
    }
}

/// Breadth-first word spheres `S_0, …, S_r` in the Cayley graph of the stored
/// (symmetrized) generators.
fn heisenberg_layers(group: &GroupDescriptor, r: u64) -> Vec<Vec<GroupElement>> {
    let mut steps: Vec<GroupElement> = group.generators().to_vec();
    steps.extend(group.generators().iter().map(|g| group.inv(g)));
    let mut seen: HashSet<GroupElement> = HashSet::new();
    seen.insert(group.identity().clone());
    let mut layers = vec![vec![group.identity().clone()]];
    for _ in 0..r {
        let mut next = Vec::new();
        for g in layers.last().expect("nonempty") {
            for s in &steps {
                let h = group.mul(g, s).expect("same kind");
                if seen.insert(h.clone()) {
                    next.push(h);
                }
            }
        }
        layers.push(next);
    }
    layers
}

fn heisenberg_word_length(group: &GroupDescriptor, g: &GroupElement) -> u64 {
    if g == group.identity() {
        return 0;
    }
    let mut steps: Vec<GroupElement> = group.generators().to_vec();
    steps.extend(group.generators().iter().map(|s| group.inv(s)));
    let mut seen: HashSet<GroupElement> = HashSet::new();
    seen.insert(group.identity().clone());
    let mut frontier = vec![group.identity().clone()];
    let mut depth = 0;
    loop {
        depth += 1;
        let mut next = Vec::new();
        for h in &frontier {
            for s in &steps {
                let k = group.mul(h, s).expect("same kind");
                if &k == g {
                    return depth;
                }
                if seen.insert(k.clone()) {
                    next.push(k);
                }
            }
        }
        frontier = next;
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DescriptorWire {
    kind: String,
    #[serde(default)]
    params: serde_json::Value,
}

impl Serialize for GroupDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (kind, params) = match &self.kind {
            GroupKind::IntegerLattice { dim } => ("integer-lattice", serde_json::json!({ "dim": dim })),
            GroupKind::DirectSum { orders } => {
                ("direct-sum-finite-cyclic", serde_json::json!({ "orders": orders }))
            }
            GroupKind::Heisenberg => ("discrete-heisenberg", serde_json::json!({})),
        };
        DescriptorWire { kind: kind.into(), params }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = DescriptorWire::deserialize(d)?;
        let kind = match wire.kind.as_str() {
            "integer-lattice" => {
                let dim = wire
                    .params
                    .get("dim")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| D::Error::custom("params.dim: expected a positive integer"))?;
                GroupKind::IntegerLattice { dim: dim as usize }
            }
            "direct-sum-finite-cyclic" => {
                let orders = wire
                    .params
                    .get("orders")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| D::Error::custom("params.orders: expected a list of integers"))?
                    .iter()
                    .map(|o| o.as_u64().and_then(|o| u32::try_from(o).ok()))
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| D::Error::custom("params.orders: expected integers >= 2"))?;
                GroupKind::DirectSum { orders }
            }
            "discrete-heisenberg" => GroupKind::Heisenberg,
            other => return Err(D::Error::custom(format!("kind: unknown group kind `{other}`"))),
        };
        GroupDescriptor::new(kind).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupDescriptor {
        GroupDescriptor::integers()
    }

    fn h(a: i64, b: i64, c: i64) -> GroupElement {
        GroupElement::heisenberg(a, b, c)
    }

    /// 3×3 upper unitriangular matrix of a Heisenberg triple.
    fn matrix(t: [i64; 3]) -> [[i64; 3]; 3] {
        [[1, t[0], t[2]], [0, 1, t[1]], [0, 0, 1]]
    }

    fn matmul(x: [[i64; 3]; 3], y: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
        let mut out = [[0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn integer_law() {
        let g = z();
        let p = g.mul(&GroupElement::lattice([2]), &GroupElement::lattice([3])).unwrap();
        assert_eq!(p, GroupElement::lattice([5]));
        assert_eq!(g.inv(&GroupElement::lattice([5])), GroupElement::lattice([-5]));
    }

    #[test]
    fn heisenberg_product_matches_matrices() {
        let g = GroupDescriptor::heisenberg();
        assert_eq!(g.mul(&h(1, 0, 0), &h(0, 1, 0)).unwrap(), h(1, 1, 1));
        let m = matmul(matrix([1, 0, 0]), matrix([0, 1, 0]));
        assert_eq!(m, matrix([1, 1, 1]));
        for t in [[2, -3, 5], [-1, 4, 0], [7, 7, -7]] {
            for u in [[0, 1, 2], [-5, 2, 3]] {
                let p = g.mul(&h(t[0], t[1], t[2]), &h(u[0], u[1], u[2])).unwrap();
                let m = matmul(matrix(t), matrix(u));
                assert_eq!(p, h(m[0][1], m[1][2], m[0][2]));
            }
        }
    }

    #[test]
    fn heisenberg_inverse() {
        let g = GroupDescriptor::heisenberg();
        assert_eq!(g.inv(&h(1, 1, 1)), h(-1, -1, 0));
        assert_eq!(g.mul(&h(1, 1, 1), &h(-1, -1, 0)).unwrap(), h(0, 0, 0));
    }

    #[test]
    fn direct_sum_involution() {
        let g = GroupDescriptor::direct_sum(vec![2]).unwrap();
        let e1 = g.basis(1).unwrap();
        assert_eq!(g.inv(&e1), e1);
        assert_eq!(g.mul(&e1, &e1).unwrap(), *g.identity());
    }

    #[test]
    fn kind_mismatch() {
        let g = z();
        assert_eq!(
            g.mul(&GroupElement::lattice([1]), &h(0, 0, 0)),
            Err(GroupError::KindMismatch)
        );
        assert_eq!(
            g.mul(&GroupElement::lattice([1]), &GroupElement::lattice([1, 2])),
            Err(GroupError::KindMismatch)
        );
    }

    #[test]
    fn order_classification() {
        let s = GroupDescriptor::direct_sum(vec![2]).unwrap();
        assert_eq!(s.order_of(&s.basis(1).unwrap(), 10), Some(2));
        assert_eq!(z().order_of(&GroupElement::lattice([1]), 100), None);
        let hg = GroupDescriptor::heisenberg();
        assert_eq!(hg.order_of(&h(1, 1, 1), 50), None);
        assert_eq!(z().order_of(z().identity(), 1), Some(1));
    }

    #[test]
    fn shells() {
        assert_eq!(z().shell(2), vec![GroupElement::lattice([-2]), GroupElement::lattice([2])]);
        assert_eq!(z().shell(0), vec![z().identity().clone()]);
        let z2 = GroupDescriptor::lattice(2);
        for r in 1..8 {
            assert_eq!(z2.shell(r).len() as u64, 4 * r);
        }
        let hg = GroupDescriptor::heisenberg();
        assert_eq!(hg.shell(0), vec![h(0, 0, 0)]);
        assert_eq!(hg.shell(1).len(), 4);
    }

    #[test]
    fn canonical_direct_sum() {
        let g = GroupDescriptor::direct_sum(vec![3]).unwrap();
        let x = g.direct_sum_element(&[(2, 4), (1, 3), (2, 2)]).unwrap();
        // 4+2 ≡ 0 mod 3 and 3 ≡ 0 mod 3
        assert_eq!(x, *g.identity());
        assert!(g.validate(&GroupElement::DirectSum(Support::from_slice(&[(1, 3)]))).is_err());
    }

    #[test]
    fn ceil_sqrt_boundaries() {
        for c in 0..2000u64 {
            let t = ceil_two_sqrt(c);
            assert!(t * t >= 4 * c);
            assert!(t == 0 || (t - 1) * (t - 1) < 4 * c);
        }
    }

    #[test]
    fn descriptor_json() {
        let g = GroupDescriptor::direct_sum(vec![2, 3]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"kind":"direct-sum-finite-cyclic","params":{"orders":[2,3]}}"#);
        let back: GroupDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GroupDescriptor>(r#"{"kind":"free-group","params":{}}"#).is_err());
    }
}
