use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::ait::{phi_u64, BitString, ScalarStageEnumerator};
use crate::error::{Error, Result};
use crate::linalg::{
    commutator, conjugate, is_positive_definite, is_psd, loewner_leq, pow2_neg, rat, ComplexMatrix, HermitianMatrix,
};
use crate::povm::OperatorMap;

/// Which universal semi-POVM the approximant realises.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UniversalKind {
    /// `s ↦ m(s) I`.
    Scalar,
    /// `s ↦ (m(s)/2)(2^-φ(s) G + H)`, with `cI ⩽ H` certified.
    Noncommuting {
        g: HermitianMatrix,
        h: HermitianMatrix,
        #[serde(with = "crate::serde_util::rational")]
        c: BigRational,
    },
}

/// A desk-scale approximant of a universal semi-POVM, driven by a staged
/// scalar semi-measure `m`. Stage `limit_stage` plays the role of the limit.
#[derive(Clone, Debug)]
pub struct UniversalApprox {
    kind: UniversalKind,
    m: ScalarStageEnumerator,
    dim: usize,
    limit_stage: u64,
}

/// Bits of resolution used when certifying `c`.
pub const CERTIFY_BITS: u32 = 20;

impl UniversalApprox {
    pub fn scalar(m: ScalarStageEnumerator, dim: usize, limit_stage: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        Ok(Self { kind: UniversalKind::Scalar, m, dim, limit_stage })
    }

    /// Checks `0 < G ⩽ I`, `0 < H ⩽ I`, `[G, H] ≠ 0` and certifies `c`.
    pub fn noncommuting(
        m: ScalarStageEnumerator,
        g: HermitianMatrix,
        h: HermitianMatrix,
        limit_stage: u64,
    ) -> Result<Self> {
        let dim = g.dim();
        if h.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: h.dim() });
        }
        let id = HermitianMatrix::identity(dim);
        for (name, x) in [("G", &g), ("H", &h)] {
            if !is_positive_definite(x) {
                return Err(Error::Validation(format!("{name} is not positive definite")));
            }
            if !loewner_leq(x, &id)? {
                return Err(Error::Validation(format!("{name} is not below the identity")));
            }
        }
        if commutator(&g, &h)?.is_zero() {
            return Err(Error::Validation("G and H commute".into()));
        }
        let c = certified_c(&h, CERTIFY_BITS);
        if c.is_zero() {
            return Err(Error::Validation(format!("no c >= 2^-{CERTIFY_BITS} with cI <= H")));
        }
        Ok(Self { kind: UniversalKind::Noncommuting { g, h, c }, m, dim, limit_stage })
    }

    /// The noncommuting construction with the default pair.
    pub fn noncommuting_default(m: ScalarStageEnumerator, dim: usize, limit_stage: u64) -> Result<Self> {
        let (g, h) = default_gh(dim)?;
        Self::noncommuting(m, g, h, limit_stage)
    }

    pub fn kind(&self) -> &UniversalKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn limit_stage(&self) -> u64 {
        self.limit_stage
    }

    pub fn m(&self) -> &ScalarStageEnumerator {
        &self.m
    }

    pub fn m_value(&self, s: &BitString, stage: u64) -> BigRational {
        self.m.value(stage, s)
    }

    /// Lower sandwich constant: `c₁ m(s) I ⩽ M(s)`.
    pub fn c1(&self) -> BigRational {
        match &self.kind {
            UniversalKind::Scalar => BigRational::one(),
            UniversalKind::Noncommuting { c, .. } => c / BigRational::from_integer(2.into()),
        }
    }

    /// Upper sandwich constant: `M(s) ⩽ c₂ m(s) I`.
    pub fn c2(&self) -> BigRational {
        BigRational::one()
    }

    /// `M(s)` at the given stage.
    pub fn element(&self, s: &BitString, stage: u64) -> HermitianMatrix {
        let m = self.m_value(s, stage);
        match &self.kind {
            UniversalKind::Scalar => HermitianMatrix::scalar(self.dim, &m),
            UniversalKind::Noncommuting { g, h, .. } => noncommuting_formula(&m, s, g, h),
        }
    }

    /// `M(s)` at the limit stage.
    pub fn limit(&self, s: &BitString) -> HermitianMatrix {
        self.element(s, self.limit_stage)
    }

    pub fn operator_map(&self, support: &[BitString], stage: u64) -> OperatorMap {
        OperatorMap::from_elements(self.dim, support.iter().map(|s| (s.clone(), self.element(s, stage))))
            .expect("support labels are distinct and elements share the dimension")
    }
}

fn noncommuting_formula(m: &BigRational, s: &BitString, g: &HermitianMatrix, h: &HermitianMatrix) -> HermitianMatrix {
    if m.is_zero() {
        return HermitianMatrix::zeros(g.dim());
    }
    let weight = phi_weight(s);
    let inner = g.scale(&weight).add(h).expect("G and H share the dimension");
    inner.scale(&(m / BigRational::from_integer(2.into())))
}

/// `2^-φ(s)`.
pub fn phi_weight(s: &BitString) -> BigRational {
    let code = phi_u64(s).expect("string code fits in 64 bits");
    pow2_neg(code)
}

/// `G = diag(1, 1/2, …, 1/2)` and `H = I/2 + (E₁₂ + E₂₁)/4`.
pub fn default_gh(dim: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if dim < 2 {
        return Err(Error::Validation("the noncommuting construction needs dimension at least 2".into()));
    }
    let mut gd = vec![rat(1, 2); dim];
    gd[0] = rat(1, 1);
    let g = HermitianMatrix::diag(&gd);
    let rows: Vec<Vec<BigRational>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| match (i, j) {
                    _ if i == j => rat(1, 2),
                    (0, 1) | (1, 0) => rat(1, 4),
                    _ => BigRational::zero(),
                })
                .collect()
        })
        .collect();
    let h = HermitianMatrix::from_real_rows(rows)?;
    Ok((g, h))
}

/// Largest multiple `c` of `2^-bits` in `[0, 1]` with `cI ⩽ H`, found by
/// bisection on exact PSD tests of `H - cI`.
pub fn certified_c(h: &HermitianMatrix, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let at = |k: &BigInt| BigRational::new(k.clone(), scale.clone());
    let ok = |k: &BigInt| is_psd(&h.shift(&at(k)));
    if !ok(&BigInt::zero()) {
        return BigRational::zero();
    }
    let (mut lo, mut hi) = (BigInt::zero(), scale.clone());
    if ok(&hi) {
        return at(&hi);
    }
    // Invariant: ok(lo), !ok(hi).
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        if ok(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(&lo)
}

pub fn scalar_universal(m: &ScalarStageEnumerator, dim: usize, s: &BitString, stage: u64) -> HermitianMatrix {
    HermitianMatrix::scalar(dim, &m.value(stage, s))
}

pub fn noncommuting_universal(u: &UniversalApprox, s: &BitString, stage: u64) -> Result<HermitianMatrix> {
    match u.kind() {
        UniversalKind::Noncommuting { .. } => Ok(u.element(s, stage)),
        UniversalKind::Scalar => Err(Error::Validation("expected the noncommuting construction".into())),
    }
}

/// `[M(s), M(t)] - ¼ m(s) m(t) (2^-φ(s) - 2^-φ(t)) [G, H]`, which is exactly
/// zero for the noncommuting construction.
pub fn commutator_identity_check(u: &UniversalApprox, s: &BitString, t: &BitString, stage: u64) -> Result<ComplexMatrix> {
    let UniversalKind::Noncommuting { g, h, .. } = u.kind() else {
        return Err(Error::Validation("expected the noncommuting construction".into()));
    };
    let lhs = commutator(&u.element(s, stage), &u.element(t, stage))?;
    let coeff = u.m_value(s, stage) * u.m_value(t, stage) * (phi_weight(s) - phi_weight(t)) / BigRational::from_integer(4.into());
    let rhs = commutator(g, h)?.scale(&coeff);
    lhs.sub(&rhs)
}

/// `U† M(s) U`.
pub fn conjugate_construction(u: &UniversalApprox, unitary: &ComplexMatrix, s: &BitString, stage: u64) -> Result<HermitianMatrix> {
    conjugate(unitary, &u.element(s, stage))
}
