//! Exact-arithmetic toolkit for semi-POVMs built from universal probability
//! approximants.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: exact Hermitian matrices over the complex rationals, the
//!   Löwner order, and certified norm/eigenvalue enclosures.
//! - [`machine`]: a concrete prefix-free reference machine and the staged
//!   complexity table obtained by dovetailing it.
//! - [`ait`]: the string/number codec, pairing, scalar semi-measures and the
//!   joint/conditional/mutual complexity calculus.
//! - [`povm`]: semi-POVM maps, validation, completion, flattening and
//!   monotonization of stage enumerators.
//! - [`constructions`]: universal semi-POVM approximants, POVM sequences,
//!   and the diagonal semi-density construction.
//! - [`measure`]: states, outcome probabilities, sampling and verification
//!   reports.

pub mod ait;
pub mod constructions;
pub mod error;
pub mod linalg;
pub mod machine;
pub mod measure;
pub mod povm;
pub mod random;
mod serde_util;

pub use error::{Error, Result};
