//! States, Born-rule probabilities, outcome sampling, and the verification
//! reports for the bounds relating measurements to the complexity table.

mod sampling;
mod state;
mod verify;

pub use sampling::{sample_outcomes, SampleCounts, GENERATOR};
pub use state::{outcome_prob, pinch_to_semimeasure, pure_prob, DensityMatrix, PureState};
pub use verify::{
    ceil_log2, conjugation_invariance_check, matrix_k, neg_log2_enclosure, verify_main_bounds, verify_optimality,
    BoundReport, BoundRow, ConjugationReport, ConjugationRow, MatrixKReport, OptimalityReport, OptimalityRow,
};
