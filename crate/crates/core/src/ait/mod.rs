//! Strings as naturals, scalar semi-measures, and the complexity calculus
//! over staged tables.

pub mod codec;
pub mod metrics;
pub mod semimeasure;

pub use codec::{pair, phi, phi_inv, phi_inv_u64, phi_u64, unpair, BitString};
pub use metrics::{ait_identity_report, ait_metrics, AitMetrics, AitTable, IdentityReport, Spread};
pub use semimeasure::{validate_semimeasure, ScalarStageEnumerator, SemimeasureReport};
