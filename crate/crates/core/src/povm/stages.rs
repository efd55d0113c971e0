use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::ait::BitString;
use crate::error::{Error, Result};
use crate::linalg::{hermitize, loewner_leq, pow2_neg, ComplexMatrix, HermitianMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageMode {
    /// Every stage lies below the declared limit.
    BelowLimit,
    /// Stages are Löwner non-decreasing in `n`.
    Monotone,
}

type StageFn = dyn Fn(u64, &BitString) -> Result<HermitianMatrix> + Send + Sync;
type LimitFn = dyn Fn(&BitString) -> HermitianMatrix + Send + Sync;

/// A stage function `(n, s) ↦ f(n, s)` with values in `Her_Q(N)`.
///
/// Stage functions are fallible only so that derived enumerators can report
/// budget exhaustion; hand-written ones normally never fail.
#[derive(Clone)]
pub struct MatrixStageEnumerator {
    dim: usize,
    mode: StageMode,
    stage_fn: Arc<StageFn>,
    limit: Option<Arc<LimitFn>>,
}

impl fmt::Debug for MatrixStageEnumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixStageEnumerator")
            .field("dim", &self.dim)
            .field("mode", &self.mode)
            .field("has_limit", &self.limit.is_some())
            .finish()
    }
}

impl MatrixStageEnumerator {
    pub fn new(
        dim: usize,
        mode: StageMode,
        f: impl Fn(u64, &BitString) -> Result<HermitianMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self { dim, mode, stage_fn: Arc::new(f), limit: None }
    }

    /// Attaches a known limit, used only for spot checks.
    pub fn with_limit(mut self, limit: impl Fn(&BitString) -> HermitianMatrix + Send + Sync + 'static) -> Self {
        self.limit = Some(Arc::new(limit));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> StageMode {
        self.mode
    }

    pub fn stage(&self, n: u64, s: &BitString) -> Result<HermitianMatrix> {
        let m = (self.stage_fn)(n, s)?;
        if m.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: m.dim() });
        }
        Ok(m)
    }

    pub fn limit(&self, s: &BitString) -> Option<HermitianMatrix> {
        self.limit.as_ref().map(|l| l(s))
    }

    /// Checks the mode's defining inequality on stages `0..stages` for each
    /// string in `support`. Below-limit checks need a declared limit.
    pub fn check(&self, stages: u64, support: &[BitString]) -> Result<Vec<(u64, BitString)>> {
        let mut violations = Vec::new();
        for s in support {
            match self.mode {
                StageMode::Monotone => {
                    let mut prev = self.stage(0, s)?;
                    for n in 1..stages {
                        let cur = self.stage(n, s)?;
                        if !loewner_leq(&prev, &cur)? {
                            violations.push((n, s.clone()));
                        }
                        prev = cur;
                    }
                }
                StageMode::BelowLimit => {
                    let Some(lim) = self.limit(s) else {
                        return Err(Error::Validation("below-limit check needs a declared limit".into()));
                    };
                    for n in 0..stages {
                        if !loewner_leq(&self.stage(n, s)?, &lim)? {
                            violations.push((n, s.clone()));
                        }
                    }
                }
            }
        }
        Ok(violations)
    }
}

/// The monotone enumerator `h(n, s) = g(τ(n, s), s)` with
/// `g(n, s) = f(n, s) - 2^-n I`.
///
/// `τ(0, s) = 0` and `τ(n+1, s)` is the first `k > τ(n, s)` with
/// `g(τ(n, s), s) ⩽ g(k, s)`. The search never looks past `budget`.
pub struct Monotonized {
    source: MatrixStageEnumerator,
    budget: u64,
    taus: Mutex<BTreeMap<BitString, Vec<u64>>>,
}

impl fmt::Debug for Monotonized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Monotonized").field("source", &self.source).field("budget", &self.budget).finish()
    }
}

impl Monotonized {
    /// `g(n, s)`.
    pub fn shifted(&self, n: u64, s: &BitString) -> Result<HermitianMatrix> {
        Ok(self.source.stage(n, s)?.shift(&pow2_neg(n)))
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn source(&self) -> &MatrixStageEnumerator {
        &self.source
    }

    pub fn tau(&self, n: u64, s: &BitString) -> Result<u64> {
        let mut known = self.taus.lock().expect("tau cache poisoned").get(s).cloned().unwrap_or_else(|| vec![0]);
        let start_len = known.len();
        while known.len() as u64 <= n {
            let last = *known.last().expect("tau sequence starts at 0");
            let base = self.shifted(last, s)?;
            let mut k = last + 1;
            loop {
                if k > self.budget {
                    self.store(s, &known, start_len);
                    return Err(Error::Budget(format!(
                        "no stage in ({last}, {}] dominates stage {last} for {:?}",
                        self.budget,
                        s.as_str()
                    )));
                }
                if loewner_leq(&base, &self.shifted(k, s)?)? {
                    break;
                }
                k += 1;
            }
            known.push(k);
        }
        let tau = known[n as usize];
        self.store(s, &known, start_len);
        Ok(tau)
    }

    fn store(&self, s: &BitString, known: &[u64], start_len: usize) {
        if known.len() > start_len {
            let mut cache = self.taus.lock().expect("tau cache poisoned");
            let entry = cache.entry(s.clone()).or_default();
            if entry.len() < known.len() {
                *entry = known.to_vec();
            }
        }
    }

    /// `h(n, s)`.
    pub fn stage(&self, n: u64, s: &BitString) -> Result<HermitianMatrix> {
        let t = self.tau(n, s)?;
        self.shifted(t, s)
    }

    /// Wraps `h` as a monotone stage enumerator carrying the source limit.
    pub fn into_enumerator(self) -> MatrixStageEnumerator {
        let dim = self.source.dim;
        let limit = self.source.limit.clone();
        let me = Arc::new(self);
        let mut e = MatrixStageEnumerator::new(dim, StageMode::Monotone, move |n, s| me.stage(n, s));
        e.limit = limit;
        e
    }
}

/// Turns a below-limit enumerator into a monotone one converging to the
/// same limit.
pub fn monotonize(e: &MatrixStageEnumerator, budget: u64) -> Result<Monotonized> {
    if e.mode() != StageMode::BelowLimit {
        return Err(Error::Validation("monotonize expects a below-limit enumerator".into()));
    }
    Ok(Monotonized { source: e.clone(), budget, taus: Mutex::new(BTreeMap::new()) })
}

/// `(s, k) ↦ hermitize(G(s, k)) - 2^-k I` for an approximator with
/// `‖R(s) - G(s, k)‖ < 2^-k`.
pub fn lower_enum_from_computable(
    dim: usize,
    g: impl Fn(&BitString, u64) -> ComplexMatrix + Send + Sync + 'static,
) -> MatrixStageEnumerator {
    MatrixStageEnumerator::new(dim, StageMode::BelowLimit, move |k, s| {
        let m = g(s, k);
        if m.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: m.dim() });
        }
        Ok(hermitize(&m).shift(&pow2_neg(k)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_norm_bounds, rat, ComplexRational};
    use num_rational::BigRational;
    use num_traits::One;

    fn scalar(q: BigRational) -> HermitianMatrix {
        HermitianMatrix::scalar(1, &q)
    }

    fn lam() -> BitString {
        BitString::empty()
    }

    #[test]
    fn already_monotone_sequence_keeps_every_stage() {
        let e = MatrixStageEnumerator::new(1, StageMode::BelowLimit, |n, _| Ok(scalar(BigRational::one() - pow2_neg(n))))
            .with_limit(|_| scalar(BigRational::one()));
        let m = monotonize(&e, 100).unwrap();
        for n in 0..10 {
            assert_eq!(m.tau(n, &lam()).unwrap(), n);
            assert_eq!(m.stage(n, &lam()).unwrap(), scalar(BigRational::one() - pow2_neg(n) * rat(2, 1)));
        }
    }

    #[test]
    fn constant_enumerator_is_shifted_down() {
        let a = HermitianMatrix::diag(&[rat(1, 3), rat(1, 5)]);
        let a2 = a.clone();
        let e = MatrixStageEnumerator::new(2, StageMode::BelowLimit, move |_, _| Ok(a2.clone()));
        let h = monotonize(&e, 50).unwrap().into_enumerator();
        assert!(h.check(12, &[lam()]).unwrap().is_empty());
        assert_eq!(h.stage(3, &lam()).unwrap(), a.shift(&pow2_neg(3)));
    }

    #[test]
    fn irregular_scalar_sequence() {
        // 1/4, 1/8, then 1/2 - 2^-(n+1); limit 1/2.
        let f = |n: u64| match n {
            0 => rat(1, 4),
            1 => rat(1, 8),
            _ => rat(1, 2) - pow2_neg(n + 1),
        };
        let e = MatrixStageEnumerator::new(1, StageMode::BelowLimit, move |n, _| Ok(scalar(f(n))))
            .with_limit(|_| scalar(rat(1, 2)));
        assert!(e.check(20, &[lam()]).unwrap().is_empty());
        let m = monotonize(&e, 100).unwrap();
        let taus: Vec<u64> = (0..5).map(|n| m.tau(n, &lam()).unwrap()).collect();
        assert_eq!(taus, vec![0, 1, 2, 3, 4]);
        let h4 = m.stage(4, &lam()).unwrap();
        let gap = operator_norm_bounds(&scalar(rat(1, 2)).sub(&h4).unwrap(), 10);
        assert!(gap.hi() <= &pow2_neg(3));
        let h = m.into_enumerator();
        assert!(h.check(10, &[lam()]).unwrap().is_empty());
    }

    #[test]
    fn non_dominating_sequence_hits_budget() {
        // g(0) = -1 and g(n) = -1 - 2^-n afterwards, so nothing dominates g(0).
        let e = MatrixStageEnumerator::new(1, StageMode::BelowLimit, |n, _| {
            Ok(scalar(if n == 0 { rat(0, 1) } else { rat(-1, 1) }))
        });
        let m = monotonize(&e, 30).unwrap();
        assert!(m.tau(1, &lam()).unwrap_err().is_budget());
    }

    #[test]
    fn computable_approximator_examples() {
        let r = HermitianMatrix::diag(&[rat(1, 2), rat(1, 3)]);
        let r2 = r.clone();
        let e = lower_enum_from_computable(2, move |_, _| r2.as_matrix().clone());
        assert_eq!(e.stage(4, &lam()).unwrap(), r.shift(&pow2_neg(4)));

        let e = lower_enum_from_computable(1, |_, k| ComplexMatrix::from_real_rows(vec![vec![rat(1, 2) + pow2_neg(k + 1)]]).unwrap());
        for k in 0..6 {
            assert_eq!(e.stage(k, &lam()).unwrap(), scalar(rat(1, 2) - pow2_neg(k + 1)));
        }

        let skew = ComplexMatrix::from_rows(vec![
            vec![ComplexRational::from_ints(1, 0), ComplexRational::from_ints(2, 1)],
            vec![ComplexRational::from_ints(0, 0), ComplexRational::from_ints(3, 0)],
        ])
        .unwrap();
        let e = lower_enum_from_computable(2, move |_, _| skew.clone());
        let h = hermitize(&e.stage(0, &lam()).unwrap().shift(&-BigRational::one()).into_matrix());
        assert_eq!(h.get(0, 1), &ComplexRational::new(rat(1, 1), rat(1, 2)));
    }
}
