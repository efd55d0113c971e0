use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::state::{outcome_prob, DensityMatrix};
use crate::ait::BitString;
use crate::error::{Error, Result};
use crate::povm::{validate, OperatorMap};

/// Name and version of the outcome generator, recorded in every report.
pub const GENERATOR: &str = "chacha20-v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleCounts {
    pub generator: &'static str,
    pub seed: u64,
    pub trials: u64,
    /// Outcome probabilities, `"p/q"`.
    pub probabilities: BTreeMap<BitString, String>,
    pub counts: BTreeMap<BitString, u64>,
}

/// Draws `trials` outcomes of the POVM `q` on `rho`.
///
/// All probabilities are brought over a common denominator `D`; each trial
/// draws a uniform integer below `D` from ChaCha20 seeded with `seed` and
/// selects the outcome whose cumulative weight interval contains it.
pub fn sample_outcomes(rho: &DensityMatrix, q: &OperatorMap, trials: u64, seed: u64) -> Result<SampleCounts> {
    if !validate(q)?.is_povm {
        return Err(Error::Validation("sampling needs a POVM".into()));
    }
    let mut probs = Vec::new();
    for (label, e) in q.iter() {
        probs.push((label.clone(), outcome_prob(rho, e)?));
    }
    let denom = probs.iter().fold(BigUint::one(), |acc, (_, p)| {
        acc.lcm(&p.denom().to_biguint().expect("reduced denominators are positive"))
    });
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = BigUint::from(0u32);
    for (label, p) in &probs {
        let weight = (p * BigRational::from_integer(denom.clone().into())).to_integer();
        acc += weight.to_biguint().expect("probabilities are non-negative");
        cumulative.push((label.clone(), acc.clone()));
    }
    debug_assert_eq!(acc, denom);

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<BitString, u64> = BTreeMap::new();
    for _ in 0..trials {
        let x = rng.gen_biguint_below(&denom);
        let idx = cumulative.partition_point(|(_, c)| c <= &x);
        *counts.entry(cumulative[idx].0.clone()).or_default() += 1;
    }
    let probabilities = probs.iter().map(|(l, p)| (l.clone(), crate::linalg::format_rational(p))).collect();
    Ok(SampleCounts { generator: GENERATOR, seed, trials, probabilities, counts })
}

impl SampleCounts {
    /// `(count - trials p) / sqrt(trials p (1 - p))` for one outcome, as a
    /// float for display only.
    pub fn z_score(&self, label: &BitString, p: &BigRational) -> Option<f64> {
        let n = self.trials as f64;
        let pf = p.to_f64()?;
        let var = n * pf * (1.0 - pf);
        if var == 0.0 {
            return None;
        }
        let c = *self.counts.get(label).unwrap_or(&0) as f64;
        Some((c - n * pf) / var.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, HermitianMatrix};

    fn b(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    #[test]
    fn trivial_povm_always_yields_lambda() {
        let q = OperatorMap::from_elements(2, [(b(""), HermitianMatrix::identity(2))]).unwrap();
        let c = sample_outcomes(&DensityMatrix::maximally_mixed(2), &q, 100, 1).unwrap();
        assert_eq!(c.counts, [(b(""), 100)].into_iter().collect());
    }

    #[test]
    fn deterministic_outcome() {
        let rho = DensityMatrix::new(HermitianMatrix::diag(&[rat(1, 1), rat(0, 1)])).unwrap();
        let q = OperatorMap::from_elements(
            2,
            [(b(""), HermitianMatrix::diag(&[rat(1, 1), rat(0, 1)])), (b("0"), HermitianMatrix::diag(&[rat(0, 1), rat(1, 1)]))],
        )
        .unwrap();
        let c = sample_outcomes(&rho, &q, 500, 2).unwrap();
        assert_eq!(c.counts.get(&b("")), Some(&500));
        assert_eq!(c.counts.get(&b("0")), None);
    }

    #[test]
    fn fair_coin_within_five_sigma_and_reproducible() {
        let half = HermitianMatrix::scalar(1, &rat(1, 2));
        let q = OperatorMap::from_elements(1, [(b(""), half.clone()), (b("0"), half)]).unwrap();
        let rho = DensityMatrix::maximally_mixed(1);
        let c = sample_outcomes(&rho, &q, 10_000, 42).unwrap();
        let z = c.z_score(&b(""), &rat(1, 2)).unwrap();
        assert!(z.abs() < 5.0, "z = {z}");
        assert_eq!(c, sample_outcomes(&rho, &q, 10_000, 42).unwrap());
        assert_eq!(sample_outcomes(&rho, &q, 0, 42).unwrap().counts.len(), 0);
    }

    #[test]
    fn rejects_semi_povm() {
        let q = OperatorMap::from_elements(1, [(b(""), HermitianMatrix::scalar(1, &rat(1, 2)))]).unwrap();
        assert!(sample_outcomes(&DensityMatrix::maximally_mixed(1), &q, 1, 0).is_err());
    }
}
