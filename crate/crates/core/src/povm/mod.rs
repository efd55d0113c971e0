//! Semi-POVMs on finite supports: validation, completion, flattening, and
//! stage enumerators with the monotonization search.

mod operator_map;
mod stages;

pub use operator_map::{complete_to_povm, flatten, flatten_sums, validate, OperatorMap, SemiPovmCert};
pub use stages::{lower_enum_from_computable, monotonize, MatrixStageEnumerator, Monotonized, StageMode};
