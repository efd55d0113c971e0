use std::ops::RangeInclusive;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::ait::{phi_inv_u64, ScalarStageEnumerator};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// `σ(N) = diag(m(φ⁻¹(1)), …, m(φ⁻¹(N)))` at one stage of `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemiDensityApprox {
    pub dim: usize,
    pub sigma: HermitianMatrix,
    pub stage: u64,
}

impl SemiDensityApprox {
    pub fn trace(&self) -> BigRational {
        self.sigma.trace()
    }
}

pub fn semi_density_sigma(m: &ScalarStageEnumerator, dim: usize, stage: u64) -> Result<SemiDensityApprox> {
    if dim == 0 {
        return Err(Error::Validation("dimension must be positive".into()));
    }
    let diag: Vec<BigRational> = (1..=dim as u64).map(|i| m.value(stage, &phi_inv_u64(i))).collect();
    let sigma = HermitianMatrix::diag(&diag);
    if sigma.trace() > BigRational::one() {
        return Err(Error::Validation("stage values sum past one".into()));
    }
    Ok(SemiDensityApprox { dim, sigma, stage })
}

/// Outcome of the trace-deficiency dovetail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum DeficiencySearch {
    Found {
        n: usize,
        i: usize,
        k: u64,
        /// `1 - Σ_{j≠i} f_jj(N, k)`.
        #[serde(with = "crate::serde_util::rational")]
        bound: BigRational,
        probes: u64,
    },
    NotFound {
        probes: u64,
    },
}

/// Probes `(N, i, k)` in dovetail order until `1 - Σ_{j≠i} f_jj(N, k) < ε`.
///
/// Rounds `d = N + k` increase from the smallest admissible `N`; within a
/// round `N` increases, and within `N` the index `i` runs `1..=N`. The
/// family returns the diagonal of `f(N, k)`. At most `budget` probes run.
pub fn trace_deficiency_search(
    family: impl Fn(usize, u64) -> Vec<BigRational>,
    eps: &BigRational,
    budget: u64,
    dims: RangeInclusive<usize>,
) -> DeficiencySearch {
    let lo = (*dims.start()).max(1);
    let hi = *dims.end();
    let mut probes = 0u64;
    if lo > hi {
        return DeficiencySearch::NotFound { probes };
    }
    let mut d = lo as u64;
    loop {
        let top = (d as usize).min(hi);
        for n in lo..=top {
            let k = d - n as u64;
            let diag = family(n, k);
            assert_eq!(diag.len(), n, "family must return N diagonal entries");
            let total: BigRational = diag.iter().fold(BigRational::zero(), |a, b| a + b);
            for i in 1..=n {
                if probes == budget {
                    return DeficiencySearch::NotFound { probes };
                }
                probes += 1;
                let bound = BigRational::one() - (&total - &diag[i - 1]);
                if &bound < eps {
                    return DeficiencySearch::Found { n, i, k, bound, probes };
                }
            }
        }
        d += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ait::BitString;
    use crate::linalg::rat;
    use crate::machine::{enumerate, EnumerateLimits};

    #[test]
    fn sigma_examples() {
        let m = ScalarStageEnumerator::new(|_, s| if s.as_str() == "0" { rat(1, 8) } else { rat(1, 32) }, true);
        let s1 = semi_density_sigma(&m, 1, 0).unwrap();
        assert_eq!(s1.sigma, HermitianMatrix::diag(&[rat(1, 8)]));
        let z = semi_density_sigma(&ScalarStageEnumerator::zero(), 3, 0).unwrap();
        assert!(z.sigma.is_zero() && z.trace().is_zero());
    }

    #[test]
    fn machine_sigma_trace_below_one() {
        let table = enumerate(12, 500, &EnumerateLimits::default()).unwrap();
        let m = ScalarStageEnumerator::from_table(&table);
        assert!(table.kraft_sum() < BigRational::one());
        for n in 1..=8 {
            let s = semi_density_sigma(&m, n, 12).unwrap();
            let expect: BigRational = (1..=n as u64).map(|i| table.p_lower(&phi_inv_u64(i))).sum();
            assert_eq!(s.trace(), expect);
            assert!(s.trace() < BigRational::one());
        }
        assert_eq!(phi_inv_u64(1), BitString::new("0").unwrap());
    }

    #[test]
    fn uniform_family_fixed_dimension() {
        let uniform = |n: usize, _k: u64| vec![rat(1, n as i64); n];
        let r = trace_deficiency_search(uniform, &rat(1, 4), 10_000, 8..=8);
        assert_eq!(r, DeficiencySearch::Found { n: 8, i: 1, k: 0, bound: rat(1, 8), probes: 1 });
    }

    #[test]
    fn uniform_family_open_dimension() {
        let uniform = |n: usize, _k: u64| vec![rat(1, n as i64); n];
        // 1/N < 1/4 first holds at N = 5.
        match trace_deficiency_search(uniform, &rat(1, 4), 10_000, 1..=usize::MAX) {
            DeficiencySearch::Found { n, i, bound, .. } => {
                assert_eq!((n, i, bound), (5, 1, rat(1, 5)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn large_eps_and_zero_family() {
        let zeros = |n: usize, _k: u64| vec![BigRational::zero(); n];
        assert!(matches!(
            trace_deficiency_search(zeros, &rat(3, 2), 10, 1..=4),
            DeficiencySearch::Found { probes: 1, .. }
        ));
        assert_eq!(trace_deficiency_search(zeros, &rat(1, 1), 50, 1..=4), DeficiencySearch::NotFound { probes: 50 });
    }
}
