//! Exact complex-rational Hermitian matrix algebra.
//!
//! Everything here is exact. The only quantities that cannot be represented
//! as rationals (eigenvalues, operator norms, logarithms) are returned as
//! [`RationalInterval`] enclosures whose width the caller chooses.

pub mod complex;
pub mod interval;
pub mod matrix;
pub mod psd;
pub mod spectrum;

pub use complex::{format_rational, parse_rational, pow2_neg, rat, ComplexRational};
pub use interval::{dyadic_exponent, floor_log2, log2_enclosure, pow2, ComplexInterval, RationalInterval};
pub use matrix::{commutator, conjugate, hermitize, ComplexMatrix, HermitianMatrix};
pub use psd::{is_positive_definite, is_psd, loewner_leq};
pub use spectrum::{
    characteristic_polynomial, eigenvalue_enclosures, matrix_function_enclosure, min_eigenvalue_sign, operator_norm_bounds,
    Poly, SturmChain,
};
