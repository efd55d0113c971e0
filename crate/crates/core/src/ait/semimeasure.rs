use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::codec::BitString;
use crate::machine::ComplexityTable;

type StageFn = dyn Fn(u64, &BitString) -> BigRational + Send + Sync;

/// A total stage function `(n, s) ↦ f(n, s)` approximating a semi-measure
/// from below.
#[derive(Clone)]
pub struct ScalarStageEnumerator {
    stage_fn: Arc<StageFn>,
    declared_monotone: bool,
}

impl fmt::Debug for ScalarStageEnumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarStageEnumerator").field("declared_monotone", &self.declared_monotone).finish()
    }
}

impl ScalarStageEnumerator {
    pub fn new(f: impl Fn(u64, &BitString) -> BigRational + Send + Sync + 'static, declared_monotone: bool) -> Self {
        Self { stage_fn: Arc::new(f), declared_monotone }
    }

    pub fn value(&self, n: u64, s: &BitString) -> BigRational {
        (self.stage_fn)(n, s)
    }

    pub fn declared_monotone(&self) -> bool {
        self.declared_monotone
    }

    /// The same value at every stage.
    pub fn constant(values: BTreeMap<BitString, BigRational>) -> Self {
        Self::new(move |_, s| values.get(s).cloned().unwrap_or_else(BigRational::zero), true)
    }

    pub fn zero() -> Self {
        Self::new(|_, _| BigRational::zero(), true)
    }

    /// Stage `n` counts the table's programs of length at most `n`; from
    /// stage `max_len` on it equals `p_lower`.
    pub fn from_table(table: &ComplexityTable) -> Self {
        let mut lengths: BTreeMap<BitString, Vec<u64>> = BTreeMap::new();
        for r in table.records() {
            lengths.entry(r.output.clone()).or_default().push(r.bits.len() as u64);
        }
        Self::new(
            move |n, s| {
                lengths.get(s).map_or_else(BigRational::zero, |ls| {
                    ls.iter()
                        .filter(|&&l| l <= n)
                        .map(|&l| BigRational::new(BigInt::one(), BigInt::one() << l as usize))
                        .fold(BigRational::zero(), |a, b| a + b)
                })
            },
            true,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageViolation {
    pub stage: u64,
    pub string: BitString,
}

/// Outcome of checking the finite-support necessary conditions of a
/// lower-computable semi-measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemimeasureReport {
    #[serde(with = "crate::serde_util::rational_vec")]
    pub stage_sums: Vec<BigRational>,
    pub negative_values: Vec<StageViolation>,
    pub monotonicity_violations: Vec<StageViolation>,
    pub sum_exceeded_at: Vec<u64>,
    pub passed: bool,
}

/// Checks stages `0..stages` on `support`: values non-negative, partial sums
/// at most one, and (when declared) `f(n, s) <= f(n+1, s)`.
pub fn validate_semimeasure(
    e: &ScalarStageEnumerator,
    stages: u64,
    support: &[BitString],
) -> SemimeasureReport {
    let mut stage_sums = Vec::with_capacity(stages as usize);
    let mut negative_values = Vec::new();
    let mut monotonicity_violations = Vec::new();
    let mut sum_exceeded_at = Vec::new();
    let mut previous: Option<Vec<BigRational>> = None;
    for n in 0..stages {
        let values: Vec<BigRational> = support.iter().map(|s| e.value(n, s)).collect();
        for (s, v) in support.iter().zip(&values) {
            if v.is_negative() {
                negative_values.push(StageViolation { stage: n, string: s.clone() });
            }
        }
        if e.declared_monotone() {
            if let Some(prev) = &previous {
                for ((s, v), p) in support.iter().zip(&values).zip(prev) {
                    if v < p {
                        monotonicity_violations.push(StageViolation { stage: n, string: s.clone() });
                    }
                }
            }
        }
        let sum = values.iter().fold(BigRational::zero(), |a, b| a + b);
        if sum > BigRational::one() {
            sum_exceeded_at.push(n);
        }
        stage_sums.push(sum);
        previous = Some(values);
    }
    let passed = negative_values.is_empty() && monotonicity_violations.is_empty() && sum_exceeded_at.is_empty();
    SemimeasureReport { stage_sums, negative_values, monotonicity_violations, sum_exceeded_at, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pow2_neg, rat};
    use crate::machine::{enumerate, EnumerateLimits};

    #[test]
    fn zero_enumerator_passes() {
        let support: Vec<_> = BitString::up_to_len(3).collect();
        let r = validate_semimeasure(&ScalarStageEnumerator::zero(), 5, &support);
        assert!(r.passed);
        assert!(r.stage_sums.iter().all(Zero::is_zero));
    }

    #[test]
    fn mass_two_fails() {
        let e = ScalarStageEnumerator::new(|_, s| if s.is_empty() { rat(2, 1) } else { rat(0, 1) }, true);
        let r = validate_semimeasure(&e, 3, &[BitString::empty()]);
        assert!(!r.passed);
        assert_eq!(r.sum_exceeded_at, vec![0, 1, 2]);
    }

    #[test]
    fn geometric_enumerator_passes_below_half() {
        let e = ScalarStageEnumerator::new(
            |n, s| (BigRational::one() - pow2_neg(n)) * pow2_neg(2 * s.len() as u64 + 2),
            true,
        );
        let support: Vec<_> = BitString::up_to_len(4).collect();
        let r = validate_semimeasure(&e, 12, &support);
        assert!(r.passed);
        // Exact limit over this support is 31/64.
        for (n, sum) in r.stage_sums.iter().enumerate() {
            assert_eq!(*sum, (BigRational::one() - pow2_neg(n as u64)) * rat(31, 64));
            assert!(*sum < rat(1, 2));
        }
    }

    #[test]
    fn declared_monotone_violation_is_reported() {
        let e = ScalarStageEnumerator::new(|n, _| if n == 1 { rat(1, 8) } else { rat(1, 4) }, true);
        let r = validate_semimeasure(&e, 3, &[BitString::empty()]);
        assert_eq!(r.monotonicity_violations, vec![StageViolation { stage: 1, string: BitString::empty() }]);
        assert!(!r.passed);
    }

    #[test]
    fn machine_semimeasure_is_valid_at_every_stage() {
        let table = enumerate(12, 500, &EnumerateLimits::default()).unwrap();
        let e = ScalarStageEnumerator::from_table(&table);
        let support: Vec<_> = table.outputs().cloned().collect();
        let r = validate_semimeasure(&e, 14, &support);
        assert!(r.passed);
        assert_eq!(r.stage_sums.last().unwrap(), &table.kraft_sum());
        for s in &support {
            assert_eq!(e.value(12, s), table.p_lower(s));
        }
    }
}
