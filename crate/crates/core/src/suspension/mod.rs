//! Poisson suspension of a (C,F)-action, realized by counting
//! configurations on the cylinders of a fixed resolution level.

mod entropy;
mod stats;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cfspace::{act, refine, CompactOpen, SpaceError};
use crate::groups::{FiniteSubset, GroupElement};
use crate::scheme::CFScheme;

pub use entropy::{entropy_bound_curve, poisson_entropy, poisson_entropy_closed_form, EntropyCurve, EntropyPoint};
pub use stats::{
    coarsen_check, exact_covariance, mc_covariance, BlockFit, CoarsenStats, McCovariance, PairCorrelation,
    Thresholds,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuspensionError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Precondition(String),
    #[error("cylinder {name} at level {level} is outside the sampled region")]
    Coverage { name: GroupElement, level: usize },
    #[error("partition blocks {0} and {1} overlap")]
    Partition(usize, usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Seeded uniform stream for one (purpose, level, name) key.
fn stream(seed: u64, tag: &[u8], level: usize, name: &GroupElement) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"cflab");
    h.update(tag);
    h.update(seed.to_le_bytes());
    h.update((level as u64).to_le_bytes());
    h.update(name.canonical_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Seed of trial `i` in a multi-trial experiment.
pub(crate) fn trial_seed(seed: u64, i: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"trial");
    h.update(seed.to_le_bytes());
    h.update(i.to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

/// Poisson variate by sequential inversion.
fn poisson_inverse(lambda: f64, u: f64) -> u64 {
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// Counts of a Poisson configuration on the level-`resolution` cylinders of
/// a region. Only nonzero counts are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonSample {
    resolution: usize,
    region: BTreeSet<GroupElement>,
    counts: BTreeMap<GroupElement, u64>,
    seed: u64,
}

impl Serialize for PoissonSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let counts: Vec<(&GroupElement, u64)> = self.counts.iter().map(|(k, v)| (k, *v)).collect();
        let mut st = s.serialize_struct("PoissonSample", 4)?;
        st.serialize_field("resolution", &self.resolution)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("region", &self.region)?;
        st.serialize_field("counts", &counts)?;
        st.end()
    }
}

impl PoissonSample {
    /// Rebuilds a sample from stored parts. Without an explicit region the
    /// occupied names are taken as the region.
    pub fn from_parts(
        s: &CFScheme,
        resolution: usize,
        seed: u64,
        region: Option<Vec<GroupElement>>,
        counts: Vec<(GroupElement, u64)>,
    ) -> Result<Self, SuspensionError> {
        let mut map = BTreeMap::new();
        for (name, k) in counts {
            if map.insert(name.clone(), k).is_some() {
                return Err(SuspensionError::Precondition(format!("name {name} listed twice")));
            }
        }
        map.retain(|_, k| *k > 0);
        let region: BTreeSet<GroupElement> = match region {
            Some(r) => r.into_iter().collect(),
            None => map.keys().cloned().collect(),
        };
        // validates the level and that every region name lies in F_M
        CompactOpen::new(s, resolution, FiniteSubset::Explicit(region.clone()))?;
        if let Some(name) = map.keys().find(|k| !region.contains(k)) {
            return Err(SuspensionError::Coverage { name: name.clone(), level: resolution });
        }
        Ok(PoissonSample { resolution, region, counts: map, seed })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn region(&self) -> &BTreeSet<GroupElement> {
        &self.region
    }

    /// Nonzero counts keyed by name.
    pub fn counts(&self) -> &BTreeMap<GroupElement, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn region_set(&self) -> CompactOpen {
        CompactOpen::from_parts_unchecked(self.resolution, FiniteSubset::Explicit(self.region.clone()))
    }
}

/// Independent Poisson counts on the level-`m` cylinders of `region`.
pub fn sample(s: &CFScheme, region: &CompactOpen, m: usize, seed: u64) -> Result<PoissonSample, SuspensionError> {
    let fine = refine(s, region, m)?;
    let names: Vec<GroupElement> = fine.names().iter().collect();
    let lambda = BigRational::new(1.into(), s.c_product(m)).to_f64().expect("finite measure");
    let counts: BTreeMap<GroupElement, u64> = names
        .par_iter()
        .filter_map(|name| {
            let u: f64 = stream(seed, b"count", m, name).gen();
            let k = poisson_inverse(lambda, u);
            (k > 0).then(|| (name.clone(), k))
        })
        .collect();
    Ok(PoissonSample { resolution: m, region: names.into_iter().collect(), counts, seed })
}

/// The same configuration resolved to level `m`: the points of every
/// occupied cylinder are spread uniformly over its children, one level at a
/// time, with streams keyed by the cylinder.
pub fn refine_sample(s: &CFScheme, x: &PoissonSample, m: usize) -> Result<PoissonSample, SuspensionError> {
    if m < x.resolution {
        return Err(SuspensionError::Precondition(format!("cannot coarsen level {} to {m}", x.resolution)));
    }
    let region = refine(s, &x.region_set(), m)?.names().to_explicit();
    let group = s.group();
    let mut counts = x.counts.clone();
    for level in x.resolution..m {
        let cs = s.c_elements(level + 1);
        let mut next = BTreeMap::new();
        for (name, k) in counts {
            let mut rng = stream(x.seed, b"split", level, &name);
            let mut per = vec![0u64; cs.len()];
            for _ in 0..k {
                per[rng.gen_range(0..cs.len())] += 1;
            }
            for (c, n) in cs.iter().zip(per) {
                if n > 0 {
                    next.insert(group.mul(&name, c).map_err(SpaceError::from)?, n);
                }
            }
        }
        counts = next;
    }
    Ok(PoissonSample { resolution: m, region, counts, seed: x.seed })
}

/// `N_K(x)`, the number of points of `x` in `K`.
///
/// Sets finer than the sample resolution are counted on the refined sample.
pub fn count(s: &CFScheme, x: &PoissonSample, k: &CompactOpen) -> Result<u64, SuspensionError> {
    if k.level() > x.resolution {
        return count(s, &refine_sample(s, x, k.level())?, k);
    }
    let fine = refine(s, k, x.resolution)?;
    let mut total = 0;
    for name in fine.names().iter() {
        if !x.region.contains(&name) {
            return Err(SuspensionError::Coverage { name, level: x.resolution });
        }
        total += x.counts.get(&name).copied().unwrap_or(0);
    }
    Ok(total)
}

/// Moves every point forward by `T_g`. The occupied cylinders must resolve
/// within the budget; unoccupied parts of the region that do not resolve
/// are dropped from the new region.
pub fn transport(s: &CFScheme, x: &PoissonSample, g: &GroupElement, budget: usize) -> Result<PoissonSample, SuspensionError> {
    let group = s.group();
    let mut level = x.resolution;
    for name in x.counts.keys() {
        let moved = act(s, g, &CompactOpen::cylinder(s, x.resolution, name.clone())?, budget)?;
        if !moved.residual.is_empty() {
            return Err(SpaceError::Undefined { g: g.clone(), budget }.into());
        }
        level = level.max(moved.image.level());
    }
    let region_image = act(s, g, &x.region_set(), budget)?.image;
    let region_image = if region_image.is_empty() { CompactOpen::empty(level) } else { region_image };
    level = level.max(region_image.level());
    let fine = refine_sample(s, x, level)?;
    let mut counts = BTreeMap::new();
    for (name, k) in &fine.counts {
        counts.insert(group.mul(g, name).map_err(SpaceError::from)?, *k);
    }
    let region = refine(s, &region_image, level)?.names().to_explicit();
    debug_assert!(counts.keys().all(|k| region.contains(k)));
    Ok(PoissonSample { resolution: level, region, counts, seed: x.seed })
}
