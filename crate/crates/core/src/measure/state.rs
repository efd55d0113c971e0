use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::ait::ScalarStageEnumerator;
use crate::constructions::UniversalApprox;
use crate::error::{Error, Result};
use crate::linalg::{format_rational, is_psd, ComplexMatrix, ComplexRational, HermitianMatrix};

/// A PSD Hermitian matrix of trace exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        if !m.trace().is_one() {
            return Err(Error::Validation(format!("density matrix trace is {}", format_rational(&m.trace()))));
        }
        if !is_psd(&m) {
            return Err(Error::NotPsd { label: "rho".into() });
        }
        Ok(Self(m))
    }

    /// `I / N`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::scalar(dim, &BigRational::new(1.into(), dim.into())))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(psi.projector())
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if !u.is_unitary() {
            return Err(Error::NotUnitary);
        }
        let m = u.mul(self.0.as_matrix())?.mul(&u.adjoint())?;
        Ok(Self(HermitianMatrix::new(m)?))
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = HermitianMatrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// A vector with `⟨ψ|ψ⟩ = 1` exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PureState {
    amplitudes: Vec<ComplexRational>,
}

impl PureState {
    pub fn new(amplitudes: Vec<ComplexRational>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Validation("state vector is empty".into()));
        }
        let norm: BigRational = amplitudes.iter().map(ComplexRational::norm_sqr).fold(BigRational::zero(), |a, b| a + b);
        if !norm.is_one() {
            return Err(Error::Validation(format!("state norm squared is {}", format_rational(&norm))));
        }
        Ok(Self { amplitudes })
    }

    /// The standard basis vector `e_i` (zero-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amplitudes = vec![ComplexRational::zero(); dim];
        amplitudes[i] = ComplexRational::one();
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[ComplexRational] {
        &self.amplitudes
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> HermitianMatrix {
        let a = &self.amplitudes;
        let m = ComplexMatrix::from_fn(a.len(), |r, c| &a[r] * &a[c].conj());
        HermitianMatrix::new(m).expect("outer product is Hermitian")
    }

    /// `⟨ψ|E|ψ⟩`, which is real for Hermitian `E`.
    pub fn expectation(&self, e: &HermitianMatrix) -> Result<BigRational> {
        let n = self.dim();
        if e.dim() != n {
            return Err(Error::Dimension { expected: n, found: e.dim() });
        }
        let mut acc = ComplexRational::zero();
        for r in 0..n {
            for c in 0..n {
                acc += &(&(&self.amplitudes[r].conj() * e.get(r, c)) * &self.amplitudes[c]);
            }
        }
        debug_assert!(acc.is_real());
        Ok(acc.re)
    }
}

/// `tr(ρE)`.
pub fn outcome_prob(rho: &DensityMatrix, e: &HermitianMatrix) -> Result<BigRational> {
    if e.dim() != rho.dim() {
        return Err(Error::Dimension { expected: rho.dim(), found: e.dim() });
    }
    if !is_psd(e) {
        return Err(Error::NotPsd { label: "E".into() });
    }
    rho.matrix().trace_product(e)
}

/// `⟨ψ|E|ψ⟩`.
pub fn pure_prob(psi: &PureState, e: &HermitianMatrix) -> Result<BigRational> {
    if !is_psd(e) {
        return Err(Error::NotPsd { label: "E".into() });
    }
    psi.expectation(e)
}

/// `s ↦ x† M_n(s) x` as a scalar stage enumerator.
pub fn pinch_to_semimeasure(u: &UniversalApprox, x: &PureState) -> Result<ScalarStageEnumerator> {
    if x.dim() != u.dim() {
        return Err(Error::Dimension { expected: u.dim(), found: x.dim() });
    }
    let monotone = u.m().declared_monotone();
    let u = u.clone();
    let x = x.clone();
    Ok(ScalarStageEnumerator::new(move |n, s| x.expectation(&u.element(s, n)).expect("dimensions checked"), monotone))
}
