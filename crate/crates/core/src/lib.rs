//! Dense Egyptian fraction representations: exact identities, prime-power
//! clearing constructions, exhaustive search oracles for extremal
//! quantities, and exact-count harnesses checked against asymptotic
//! formulas.

// Range checks are written `!(x >= lo)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod analytics;
pub mod arith;
pub mod construct;
pub mod error;
pub mod identities;
pub mod lemmas;
pub mod report;
pub mod search;

pub use arith::{PrimePower, Rational};
pub use error::{Error, Result};
pub use identities::{DenominatorSet, Representation};
