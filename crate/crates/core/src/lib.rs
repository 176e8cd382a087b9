//! Solutions of the pentagon relation as families of block linear maps over
//! a finite colour set.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod builders;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod normalized;
pub mod pentagon;
pub mod random;
pub mod report;
pub mod rules;
pub mod scalar;
pub mod solver;
pub mod sumvec;
pub mod tensor;

pub use block::{assemble_matrix, block_apply, fmap_apply, identity_component, FBlock, FMap, FSolution};
pub use error::{Error, Result};
pub use report::ResidualReport;
pub use rules::{FusionRules, Label};
pub use scalar::Scalar;
pub use sumvec::{permute_23, SumShape, SumVector};
