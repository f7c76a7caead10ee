//! (C,F)-schemes: the finite sequences `F_0, …, F_N` and `C_1, …, C_N`,
//! checkers for every finitary condition placed on them, and a builder.

mod build;
mod check;
pub(crate) mod geometry;
mod report;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::groups::{FiniteSubset, GroupDescriptor, GroupElement, GroupError};

pub use build::{build_scheme, BuildParams};
pub use check::{check_base, check_folner, check_mixing, check_square, check_triangle, classify, FolnerSchedule};
pub use report::{Clause, ConditionReport, LevelReport, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("scheme has depth 0, nothing to check")]
    NothingToCheck,
    #[error("wrong dichotomy: {0}")]
    WrongDichotomy(String),
    #[error("invalid scheme: {0}")]
    Invalid(String),
    #[error("invalid parameters: {0}")]
    Precondition(String),
    #[error("search exhausted at level {level} while establishing {condition}")]
    SearchExhausted { level: usize, condition: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// `F_0, …, F_N` and `C_1, …, C_N` over a fixed group.
///
/// Construction only checks that the lists have matching lengths and that
/// every element belongs to the group; the scheme conditions themselves are
/// the business of the checkers, which report violations with witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFScheme {
    group: GroupDescriptor,
    f: Vec<FiniteSubset>,
    c: Vec<FiniteSubset>,
}

impl CFScheme {
    pub fn new(group: GroupDescriptor, f: Vec<FiniteSubset>, c: Vec<FiniteSubset>) -> Result<Self, SchemeError> {
        if f.len() != c.len() + 1 {
            return Err(SchemeError::Invalid(format!("{} F sets but {} C sets", f.len(), c.len())));
        }
        for (name, sets) in [("F", &f), ("C", &c)] {
            for (k, s) in sets.iter().enumerate() {
                let level = if name == "F" { k } else { k + 1 };
                if let FiniteSubset::Explicit(e) = s {
                    for g in e {
                        group
                            .validate(g)
                            .map_err(|err| SchemeError::Invalid(format!("{name}[{level}]: element {g}: {err}")))?;
                    }
                }
            }
        }
        let f = f.iter().map(FiniteSubset::compacted).collect();
        let c = c.iter().map(|s| s.explicit()).collect();
        Ok(CFScheme { group, f, c })
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn depth(&self) -> usize {
        self.c.len()
    }

    /// `F_n` for `0 ≤ n ≤ N`.
    pub fn f(&self, n: usize) -> &FiniteSubset {
        &self.f[n]
    }

    /// `C_n` for `1 ≤ n ≤ N`.
    pub fn c(&self, n: usize) -> &FiniteSubset {
        &self.c[n - 1]
    }

    pub fn f_sets(&self) -> &[FiniteSubset] {
        &self.f
    }

    pub fn c_sets(&self) -> &[FiniteSubset] {
        &self.c
    }

    /// Sorted elements of `C_n`.
    pub fn c_elements(&self, n: usize) -> Vec<GroupElement> {
        self.c(n).to_explicit().into_iter().collect()
    }

    /// `#C_1 ⋯ #C_n`.
    pub fn c_product(&self, n: usize) -> BigInt {
        (1..=n).map(|i| BigInt::from(self.c(i).len())).product()
    }

    /// `r_n = #F_n / (#C_1 ⋯ #C_n)`.
    pub fn growth(&self, n: usize) -> BigRational {
        BigRational::new(BigInt::from(self.f(n).len()), self.c_product(n))
    }

    /// The first `depth` levels of this scheme.
    pub fn truncate(&self, depth: usize) -> CFScheme {
        let depth = depth.min(self.depth());
        CFScheme { group: self.group.clone(), f: self.f[..=depth].to_vec(), c: self.c[..depth].to_vec() }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn growth_of_s1() {
        let s = s1();
        let r: Vec<_> = (0..=2).map(|n| s.growth(n)).collect();
        assert_eq!(
            r,
            vec![
                BigRational::from_integer(1.into()),
                BigRational::from_integer(5.into()),
                BigRational::new(141.into(), 4.into())
            ]
        );
    }

    #[test]
    fn rejects_mismatched_lengths_and_foreign_elements() {
        let z = GroupDescriptor::integers();
        assert!(CFScheme::new(z.clone(), vec![ints([0])], vec![ints([0, 1])]).is_err());
        let bad = FiniteSubset::singleton(GroupElement::heisenberg(0, 0, 0));
        assert!(matches!(CFScheme::new(z, vec![bad, ints([0, 1])], vec![ints([0, 1])]), Err(SchemeError::Invalid(_))));
    }
}
