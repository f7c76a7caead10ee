//! A laboratory for (C,F)-actions of countable amenable groups.
//!
//! [`groups`] provides exact group arithmetic, [`scheme`] builds and
//! certifies (C,F)-schemes, [`cfspace`] realizes the associated
//! infinite-measure-preserving action on cylinder sets with exact rational
//! measures, and [`suspension`] realizes its Poisson suspension by seeded
//! sampling of counting configurations.

pub mod cfspace;
pub mod groups;
pub mod io;
pub mod scheme;
pub mod suspension;
