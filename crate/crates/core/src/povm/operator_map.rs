use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::ait::BitString;
use crate::error::{Error, Result};
use crate::linalg::{is_psd, operator_norm_bounds, HermitianMatrix, RationalInterval};

/// A finitely supported map from strings to `N×N` Hermitian matrices.
/// Strings outside the support map to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMap {
    dim: usize,
    elements: BTreeMap<BitString, HermitianMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ElementWire {
    label: BitString,
    matrix: HermitianMatrix,
}

#[derive(Serialize, Deserialize)]
struct MapWire {
    dim: usize,
    elements: Vec<ElementWire>,
}

impl OperatorMap {
    pub fn empty(dim: usize) -> Self {
        Self { dim, elements: BTreeMap::new() }
    }

    /// Builds a map from `(label, matrix)` pairs; labels must be distinct.
    pub fn from_elements(dim: usize, items: impl IntoIterator<Item = (BitString, HermitianMatrix)>) -> Result<Self> {
        let mut map = Self::empty(dim);
        for (label, m) in items {
            if map.elements.contains_key(&label) {
                return Err(Error::Validation(format!("duplicate label {:?}", label.as_str())));
            }
            map.insert(label, m)?;
        }
        Ok(map)
    }

    pub fn insert(&mut self, label: BitString, m: HermitianMatrix) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: m.dim() });
        }
        self.elements.insert(label, m);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, s: &BitString) -> Option<&HermitianMatrix> {
        self.elements.get(s)
    }

    /// `R(s)`, zero off the support.
    pub fn element(&self, s: &BitString) -> HermitianMatrix {
        self.elements.get(s).cloned().unwrap_or_else(|| HermitianMatrix::zeros(self.dim))
    }

    pub fn labels(&self) -> impl Iterator<Item = &BitString> {
        self.elements.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &HermitianMatrix)> {
        self.elements.iter()
    }

    pub fn sum(&self) -> HermitianMatrix {
        HermitianMatrix::sum(self.dim, self.elements.values()).expect("elements share the map dimension")
    }

    pub fn to_json(&self) -> String {
        let wire = MapWire {
            dim: self.dim,
            elements: self.iter().map(|(l, m)| ElementWire { label: l.clone(), matrix: m.clone() }).collect(),
        };
        serde_json::to_string_pretty(&wire).expect("operator map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: MapWire = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_elements(wire.dim, wire.elements.into_iter().map(|e| (e.label, e.matrix)))
    }
}

impl Serialize for OperatorMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapWire {
            dim: self.dim,
            elements: self.iter().map(|(l, m)| ElementWire { label: l.clone(), matrix: m.clone() }).collect(),
        }
        .serialize(s)
    }
}

/// Result of a successful validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemiPovmCert {
    pub psd_checked: BTreeMap<BitString, bool>,
    pub sum: HermitianMatrix,
    /// `I - Σ R(s)`.
    pub defect: HermitianMatrix,
    pub is_povm: bool,
}

/// Checks `0 ⩽ R(s)` for every element and `Σ R(s) ⩽ I`.
pub fn validate(r: &OperatorMap) -> Result<SemiPovmCert> {
    let mut psd_checked = BTreeMap::new();
    for (label, m) in r.iter() {
        if !is_psd(m) {
            return Err(Error::NotPsd { label: label.as_str().to_owned() });
        }
        psd_checked.insert(label.clone(), true);
    }
    let sum = r.sum();
    let defect = HermitianMatrix::identity(r.dim()).sub(&sum)?;
    if !is_psd(&defect) {
        return Err(Error::SumExceedsIdentity);
    }
    let is_povm = defect.is_zero();
    Ok(SemiPovmCert { psd_checked, sum, defect, is_povm })
}

/// `Q(λ) = I - Σ R(s)` and `Q(s') = R(s)`, where `s'` is the successor of
/// `s`. With `keep_zero = false` zero elements are dropped.
pub fn complete_to_povm(r: &OperatorMap, keep_zero: bool) -> Result<OperatorMap> {
    let cert = validate(r)?;
    let mut q = OperatorMap::empty(r.dim());
    let mut push = |label: BitString, m: HermitianMatrix| {
        if keep_zero || !m.is_zero() {
            q.elements.insert(label, m);
        }
    };
    push(BitString::empty(), cert.defect);
    for (label, m) in r.iter() {
        push(label.successor(), m.clone());
    }
    debug_assert!(validate(&q).map(|c| c.is_povm).unwrap_or(false));
    Ok(q)
}

/// Enclosures of `‖R(s)‖ / N`, each of width at most `2^-k`.
pub fn flatten(r: &OperatorMap, k: u32) -> Result<BTreeMap<BitString, RationalInterval>> {
    validate(r)?;
    let inv_n = BigRational::new(1.into(), r.dim().into());
    Ok(r.iter().map(|(label, m)| (label.clone(), operator_norm_bounds(m, k).scale(&inv_n))).collect())
}

/// Sums of the lower and upper endpoints of a flattened map.
pub fn flatten_sums(flat: &BTreeMap<BitString, RationalInterval>) -> (BigRational, BigRational) {
    flat.values().fold((BigRational::zero(), BigRational::zero()), |(lo, hi), iv| (lo + iv.lo(), hi + iv.hi()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn b(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    fn half(n: usize) -> HermitianMatrix {
        HermitianMatrix::scalar(n, &rat(1, 2))
    }

    #[test]
    fn empty_map_has_identity_defect() {
        let cert = validate(&OperatorMap::empty(2)).unwrap();
        assert_eq!(cert.defect, HermitianMatrix::identity(2));
        assert!(!cert.is_povm);
    }

    #[test]
    fn two_halves_form_a_povm() {
        let r = OperatorMap::from_elements(2, [(b(""), half(2)), (b("0"), half(2))]).unwrap();
        assert!(validate(&r).unwrap().is_povm);
    }

    #[test]
    fn indefinite_element_is_named() {
        let bad = HermitianMatrix::from_real_rows(vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(1, 1)]]).unwrap();
        let r = OperatorMap::from_elements(2, [(b(""), bad)]).unwrap();
        assert_eq!(validate(&r), Err(Error::NotPsd { label: String::new() }));
    }

    #[test]
    fn oversized_sum_is_rejected() {
        let r = OperatorMap::from_elements(1, [(b(""), half(1)), (b("0"), half(1)), (b("1"), half(1))]).unwrap();
        assert_eq!(validate(&r), Err(Error::SumExceedsIdentity));
    }

    #[test]
    fn completion_examples() {
        let q = complete_to_povm(&OperatorMap::empty(2), true).unwrap();
        assert_eq!(q, OperatorMap::from_elements(2, [(b(""), HermitianMatrix::identity(2))]).unwrap());

        let r = OperatorMap::from_elements(2, [(b(""), half(2))]).unwrap();
        let q = complete_to_povm(&r, true).unwrap();
        assert_eq!(q, OperatorMap::from_elements(2, [(b(""), half(2)), (b("0"), half(2))]).unwrap());

        let r = OperatorMap::from_elements(2, [(b(""), HermitianMatrix::identity(2))]).unwrap();
        let kept = complete_to_povm(&r, true).unwrap();
        assert_eq!(kept.get(&b("")), Some(&HermitianMatrix::zeros(2)));
        let dropped = complete_to_povm(&r, false).unwrap();
        assert_eq!(dropped.len(), 1);
        assert!(validate(&kept).unwrap().is_povm && validate(&dropped).unwrap().is_povm);
    }

    #[test]
    fn flatten_examples() {
        let r = OperatorMap::from_elements(2, [(b(""), HermitianMatrix::diag(&[rat(1, 2), rat(1, 4)]))]).unwrap();
        let flat = flatten(&r, 10).unwrap();
        assert!(flat[&b("")].contains(&rat(1, 4)));
        assert!(flatten(&OperatorMap::empty(3), 4).unwrap().is_empty());
    }

    #[test]
    fn flatten_matches_largest_eigenvalue() {
        // (1/6)[[2,1],[1,2]] has eigenvalues 1/6 and 1/2.
        let m = HermitianMatrix::from_real_rows(vec![vec![rat(1, 3), rat(1, 6)], vec![rat(1, 6), rat(1, 3)]]).unwrap();
        let r = OperatorMap::from_elements(2, [(b("1"), m)]).unwrap();
        let iv = &flatten(&r, 12).unwrap()[&b("1")];
        assert!(iv.contains(&rat(1, 4)));
        assert!(iv.width() <= crate::linalg::pow2_neg(12));
    }

    #[test]
    fn json_roundtrip() {
        let r = OperatorMap::from_elements(2, [(b(""), half(2)), (b("01"), HermitianMatrix::diag(&[rat(1, 3), rat(0, 1)]))])
            .unwrap();
        let back = OperatorMap::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"label\": \"\""));
    }
}
