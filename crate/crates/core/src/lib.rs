//! Testing bounded means by betting.
//!
//! [`wealth`] holds the wealth process and its legality rules,
//! [`strategies`] the betting rules, [`diagnostics`] the path statistics,
//! [`subgaussian`] the unbounded-data analogues and [`simlab`] the seeded
//! Monte Carlo runners. The `betlab` binary wraps [`cli`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod simlab;
pub mod strategies;
pub mod subgaussian;
pub mod wealth;

pub use error::{Error, Result};
pub use strategies::{Bettor, Strategy};
pub use wealth::{NullSpec, PathState};
