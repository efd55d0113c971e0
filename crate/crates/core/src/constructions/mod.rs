//! Universal semi-POVM approximants, their approximation and POVM
//! sequences, and the diagonal semi-density construction.

mod density;
mod sequence;
mod universal;

pub use density::{semi_density_sigma, trace_deficiency_search, DeficiencySearch, SemiDensityApprox};
pub use sequence::{approx_sequence, povm_sequence, ApproxSequence, PovmSequenceElement};
pub use universal::{
    certified_c, commutator_identity_check, conjugate_construction, default_gh, noncommuting_universal, phi_weight,
    scalar_universal, UniversalApprox, UniversalKind, CERTIFY_BITS,
};
