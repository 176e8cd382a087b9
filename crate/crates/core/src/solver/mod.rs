//! Finding solutions: exact 3-cocycle enumeration for cyclic groups and damped
//! least squares for multiplicity-free fusion rules.

pub mod cocycles;
pub mod zn;

pub use cocycles::{enumerate_cocycles, CocycleSolutionSet};
pub mod gauge;
pub mod lm;

pub use lm::{jacobian_check, solve_multiplicity_free, SolveOptions, SolveReport, SolveResult};
