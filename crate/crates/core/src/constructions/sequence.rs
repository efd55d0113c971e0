use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::Serialize;

use super::universal::UniversalApprox;
use crate::ait::BitString;
use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, is_psd, pow2_neg, HermitianMatrix};
use crate::povm::{monotonize, validate, MatrixStageEnumerator, Monotonized, OperatorMap, StageMode};

/// Sequence `F_0, F_1, …` approximating the limit-stage `M` from below.
///
/// The stage enumerator `f(j, s) = M_{min(j, S)}(s)` is monotonized to `h`,
/// and `F_n(s) = h(τ'(n, s), s)` where `τ'(n, s)` is the first index after
/// `τ'(n-1, s)` with `0 < h` and `M_S(s) - h ⩽ 2^-(n+1) I`.
pub struct ApproxSequence {
    u: UniversalApprox,
    h: Monotonized,
    budget: u64,
    picks: Mutex<BTreeMap<BitString, Vec<u64>>>,
}

impl ApproxSequence {
    pub fn new(u: &UniversalApprox, budget: u64) -> Result<Self> {
        let limit = u.limit_stage();
        let src = u.clone();
        let lim = u.clone();
        let f = MatrixStageEnumerator::new(u.dim(), StageMode::BelowLimit, move |j, s| Ok(src.element(s, j.min(limit))))
            .with_limit(move |s| lim.limit(s));
        Ok(Self { u: u.clone(), h: monotonize(&f, budget)?, budget, picks: Mutex::new(BTreeMap::new()) })
    }

    pub fn universal(&self) -> &UniversalApprox {
        &self.u
    }

    /// Index into the monotonized enumerator used for `F_n(s)`.
    pub fn pick(&self, n: u64, s: &BitString) -> Result<u64> {
        let mut known = self.picks.lock().expect("pick cache poisoned").get(s).cloned().unwrap_or_default();
        let limit = self.u.limit(s);
        while known.len() as u64 <= n {
            let i = known.len() as u64;
            let tol = HermitianMatrix::scalar(self.u.dim(), &pow2_neg(i + 1));
            let mut j = known.last().map_or(0, |p| p + 1);
            loop {
                if j > self.budget {
                    return Err(Error::Budget(format!(
                        "no positive stage within 2^-{} of the limit for {:?} by index {}",
                        i + 1,
                        s.as_str(),
                        self.budget
                    )));
                }
                let hj = self.h.stage(j, s)?;
                if is_positive_definite(&hj) && is_psd(&tol.sub(&limit.sub(&hj)?)?) {
                    break;
                }
                j += 1;
            }
            known.push(j);
        }
        let pick = known[n as usize];
        let mut cache = self.picks.lock().expect("pick cache poisoned");
        let entry = cache.entry(s.clone()).or_default();
        if entry.len() < known.len() {
            *entry = known;
        }
        Ok(pick)
    }

    pub fn element(&self, n: u64, s: &BitString) -> Result<HermitianMatrix> {
        self.h.stage(self.pick(n, s)?, s)
    }

    /// `F_n` on `support`.
    pub fn f_n(&self, n: u64, support: &[BitString]) -> Result<OperatorMap> {
        let mut out = OperatorMap::empty(self.u.dim());
        for s in support {
            out.insert(s.clone(), self.element(n, s)?)?;
        }
        Ok(out)
    }
}

/// `F_n` on `support` for the approximant `u`.
pub fn approx_sequence(u: &UniversalApprox, n: u64, support: &[BitString], budget: u64) -> Result<OperatorMap> {
    ApproxSequence::new(u, budget)?.f_n(n, support)
}

/// One element of the POVM sequence.
#[derive(Clone, Debug, Serialize)]
pub struct PovmSequenceElement {
    pub n: u64,
    pub f: OperatorMap,
    pub g: OperatorMap,
}

/// `G_n`: labels are the first `n+1` strings, `G_n(s) = F_n(s)` before the
/// last label, and the last label carries `I - Σ F_n(s)`.
pub fn povm_sequence(f: &OperatorMap, n: u64) -> Result<OperatorMap> {
    validate(f)?;
    let labels = BitString::first(n + 1);
    let (last, head) = labels.split_last().expect("at least one label");
    let mut g = OperatorMap::empty(f.dim());
    for s in head {
        g.insert(s.clone(), f.element(s))?;
    }
    let partial = HermitianMatrix::sum(f.dim(), head.iter().filter_map(|s| f.get(s)))?;
    let defect = HermitianMatrix::identity(f.dim()).sub(&partial)?;
    if !is_psd(&defect) {
        return Err(Error::Validation(format!("defect on label {:?} is not positive semi-definite", last.as_str())));
    }
    g.insert(last.clone(), defect)?;
    let cert = validate(&g)?;
    debug_assert!(cert.is_povm);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ait::ScalarStageEnumerator;
    use crate::linalg::{loewner_leq, operator_norm_bounds, rat};
    use num_rational::BigRational;

    fn b(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    fn geometric_m() -> ScalarStageEnumerator {
        // m_n(s) = 2^-(2|s|+2) (1 - 2^-n), limit stage 6.
        ScalarStageEnumerator::new(
            |n, s| pow2_neg(2 * s.len() as u64 + 2) * (BigRational::from_integer(1.into()) - pow2_neg(n)),
            true,
        )
    }

    #[test]
    fn povm_sequence_examples() {
        let g0 = povm_sequence(&OperatorMap::empty(2), 0).unwrap();
        assert_eq!(g0, OperatorMap::from_elements(2, [(b(""), HermitianMatrix::identity(2))]).unwrap());

        let f1 = OperatorMap::from_elements(1, [(b(""), HermitianMatrix::scalar(1, &rat(1, 2)))]).unwrap();
        let g1 = povm_sequence(&f1, 1).unwrap();
        let half = HermitianMatrix::scalar(1, &rat(1, 2));
        assert_eq!(g1, OperatorMap::from_elements(1, [(b(""), half.clone()), (b("0"), half)]).unwrap());
    }

    #[test]
    fn scalar_sequence_is_monotone_and_close() {
        let u = UniversalApprox::scalar(geometric_m(), 2, 6).unwrap();
        let seq = ApproxSequence::new(&u, 200).unwrap();
        let support = BitString::first(4);
        let mut prev: Option<OperatorMap> = None;
        for n in 0..6 {
            let f = seq.f_n(n, &support).unwrap();
            for s in &support {
                let fs = f.element(s);
                let lim = u.limit(s);
                assert!(is_positive_definite(&fs));
                assert!(loewner_leq(&fs, &lim).unwrap());
                let gap = operator_norm_bounds(&lim.sub(&fs).unwrap(), 20);
                assert!(gap.hi() < &pow2_neg(n));
                if let Some(p) = &prev {
                    assert!(loewner_leq(&p.element(s), &fs).unwrap());
                }
            }
            let g = povm_sequence(&f, n).unwrap();
            assert!(validate(&g).unwrap().is_povm);
            assert_eq!(g.len() as u64, n + 1);
            prev = Some(f);
        }
    }

    #[test]
    fn zero_mass_string_exhausts_budget() {
        let m = ScalarStageEnumerator::constant([(b(""), rat(1, 2))].into_iter().collect());
        let u = UniversalApprox::scalar(m, 1, 0).unwrap();
        let err = approx_sequence(&u, 0, &[b("0")], 40).unwrap_err();
        assert!(err.is_budget());
        assert!(approx_sequence(&u, 0, &[b("")], 40).is_ok());
    }

    #[test]
    fn noncommuting_sequence_stays_below_limit() {
        let u = UniversalApprox::noncommuting_default(geometric_m(), 2, 6).unwrap();
        let support = BitString::first(3);
        let f3 = approx_sequence(&u, 3, &support, 200).unwrap();
        for s in &support {
            assert!(loewner_leq(&f3.element(s), &u.limit(s)).unwrap());
        }
        assert!(validate(&povm_sequence(&f3, 3).unwrap()).unwrap().is_povm);
    }
}
