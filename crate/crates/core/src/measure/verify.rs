use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::state::{outcome_prob, DensityMatrix};
use crate::ait::BitString;
use crate::constructions::{UniversalApprox, UniversalKind};
use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalue_enclosures, floor_log2, format_rational, is_positive_definite, log2_enclosure, matrix_function_enclosure,
    pow2, ComplexInterval, ComplexMatrix, RationalInterval,
};
use crate::machine::ComplexityTable;
use crate::povm::{validate, OperatorMap};

/// Smallest integer `e` with `x <= 2^e`.
pub fn ceil_log2(x: &BigRational) -> i64 {
    let e = floor_log2(x);
    if pow2(e) == *x {
        e
    } else {
        e + 1
    }
}

/// `-log2 x` enclosed to width `2^-k`.
pub fn neg_log2_enclosure(x: &BigRational, k: u32) -> RationalInterval {
    let l = log2_enclosure(x, k);
    RationalInterval::new(-l.hi().clone(), -l.lo().clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub s: BitString,
    #[serde(with = "crate::serde_util::rational")]
    pub prob: BigRational,
    pub k_upper: Option<u64>,
    #[serde(with = "crate::serde_util::rational")]
    pub p_lower: BigRational,
    /// Smallest integer `d` with `prob <= 2^(d - k_upper)`.
    pub row_d: Option<i64>,
    /// `prob / p_lower`.
    #[serde(with = "crate::serde_util::option_rational")]
    pub row_c: Option<BigRational>,
    /// Construction-specific upper bound asserted for this label.
    #[serde(with = "crate::serde_util::option_rational")]
    pub bound: Option<BigRational>,
}

/// Per-label probabilities of a POVM measured on `ρ`, set against a
/// complexity table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub status: &'static str,
    pub rows: Vec<BoundRow>,
    pub d_observed: Option<i64>,
    #[serde(with = "crate::serde_util::option_rational")]
    pub c_observed: Option<BigRational>,
    pub failures: Vec<String>,
    pub table_max_len: usize,
    pub table_max_steps: u64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// CSV with columns `s,prob_num,prob_den,k_upper,p_lower_num,p_lower_den,row_d,row_c`.
    /// Missing values are empty; `row_c` is written as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,prob_num,prob_den,k_upper,p_lower_num,p_lower_den,row_d,row_c\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.s.as_str(),
                r.prob.numer(),
                r.prob.denom(),
                r.k_upper.map(|k| k.to_string()).unwrap_or_default(),
                r.p_lower.numer(),
                r.p_lower.denom(),
                r.row_d.map(|d| d.to_string()).unwrap_or_default(),
                r.row_c.as_ref().map(format_rational).unwrap_or_default(),
            ));
        }
        out
    }
}

/// Measures `q` on `rho` and compares each outcome probability with the
/// table. For labels in `bounds` it asserts `prob(s) <= bound(s) <= p_lower(s)`.
pub fn verify_main_bounds(
    rho: &DensityMatrix,
    q: &OperatorMap,
    table: &ComplexityTable,
    bounds: Option<&BTreeMap<BitString, BigRational>>,
) -> Result<BoundReport> {
    validate(q)?;
    let mut rows = Vec::with_capacity(q.len());
    let mut failures = Vec::new();
    for (s, e) in q.iter() {
        let prob = outcome_prob(rho, e)?;
        let k_upper = table.k_upper(s);
        let p_lower = table.p_lower(s);
        let row_d = match k_upper {
            Some(k) if prob.is_positive() => Some(k as i64 + ceil_log2(&prob)),
            _ => None,
        };
        let row_c = (!p_lower.is_zero()).then(|| &prob / &p_lower);
        let bound = bounds.and_then(|b| b.get(s)).cloned();
        if let Some(b) = &bound {
            if prob > *b {
                failures.push(format!("{:?}: prob {} exceeds bound {}", s.as_str(), format_rational(&prob), format_rational(b)));
            }
            if *b > p_lower {
                failures.push(format!(
                    "{:?}: bound {} exceeds p_lower {}",
                    s.as_str(),
                    format_rational(b),
                    format_rational(&p_lower)
                ));
            }
        }
        rows.push(BoundRow { s: s.clone(), prob, k_upper, p_lower, row_d, row_c, bound });
    }
    let d_observed = rows.iter().filter_map(|r| r.row_d).max();
    let c_observed = rows.iter().filter_map(|r| r.row_c.clone()).max();
    let status = if failures.is_empty() { "pass" } else { "fail" };
    Ok(BoundReport {
        status,
        rows,
        d_observed,
        c_observed,
        failures,
        table_max_len: table.max_len(),
        table_max_steps: table.max_steps(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalityRow {
    pub s: BitString,
    #[serde(with = "crate::serde_util::rational")]
    pub m: BigRational,
    #[serde(with = "crate::serde_util::rational")]
    pub prob: BigRational,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub k_upper: Option<u64>,
    /// `-log2 tr(ρ M(s))`, when the probability is positive.
    pub neg_log2_prob: Option<RationalInterval>,
    /// `k_upper(s) - (-log2 tr(ρ M(s)))`; reported only.
    pub k_gap: Option<RationalInterval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalityReport {
    pub status: &'static str,
    #[serde(with = "crate::serde_util::rational")]
    pub c1: BigRational,
    #[serde(with = "crate::serde_util::rational")]
    pub c2: BigRational,
    pub rows: Vec<OptimalityRow>,
    pub failures: Vec<String>,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Asserts `c₁ m(s) <= tr(ρ M(s)) <= c₂ m(s)` on `support` and reports
/// `-log2 tr(ρ M(s))` against the table when one is given.
pub fn verify_optimality(
    rho: &DensityMatrix,
    u: &UniversalApprox,
    support: &[BitString],
    stage: u64,
    table: Option<&ComplexityTable>,
    k: u32,
) -> Result<OptimalityReport> {
    if rho.dim() != u.dim() {
        return Err(Error::Dimension { expected: u.dim(), found: rho.dim() });
    }
    let (c1, c2) = (u.c1(), u.c2());
    let mut rows = Vec::with_capacity(support.len());
    let mut failures = Vec::new();
    let mut sorted = support.to_vec();
    sorted.sort();
    sorted.dedup();
    for s in sorted {
        let m = u.m_value(&s, stage);
        let prob = outcome_prob(rho, &u.element(&s, stage))?;
        let lower_ok = &c1 * &m <= prob;
        let upper_ok = prob <= &c2 * &m;
        if !lower_ok || !upper_ok {
            failures.push(format!(
                "{:?}: tr(rho M) = {} outside [{}, {}]",
                s.as_str(),
                format_rational(&prob),
                format_rational(&(&c1 * &m)),
                format_rational(&(&c2 * &m))
            ));
        }
        let neg_log2_prob = prob.is_positive().then(|| neg_log2_enclosure(&prob, k));
        let k_upper = table.and_then(|t| t.k_upper(&s));
        let k_gap = match (&neg_log2_prob, k_upper) {
            (Some(iv), Some(ku)) => {
                let kq = BigRational::from_integer(ku.into());
                Some(RationalInterval::new(&kq - iv.hi(), &kq - iv.lo()))
            }
            _ => None,
        };
        rows.push(OptimalityRow { s, m, prob, lower_ok, upper_ok, k_upper, neg_log2_prob, k_gap });
    }
    let status = if failures.is_empty() { "pass" } else { "fail" };
    Ok(OptimalityReport { status, c1, c2, rows, failures })
}

/// Enclosure of the matrix `-log2 M(s)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixKReport {
    pub s: BitString,
    pub entries: Vec<Vec<ComplexInterval>>,
    /// `-log2` of each distinct eigenvalue, ascending in the eigenvalue.
    pub eigenvalues: Vec<RationalInterval>,
    pub k_upper: Option<u64>,
}

/// Entry-wise enclosure of `-log2 M_stage(s)` with entry widths at most
/// `2^-k`. `M_stage(s)` must be positive definite.
pub fn matrix_k(
    u: &UniversalApprox,
    s: &BitString,
    stage: u64,
    k: u32,
    table: Option<&ComplexityTable>,
) -> Result<MatrixKReport> {
    let m = u.element(s, stage);
    if !is_positive_definite(&m) {
        return Err(Error::Validation(format!("M({:?}) is not positive definite at stage {stage}", s.as_str())));
    }
    let k_upper = table.and_then(|t| t.k_upper(s));
    let n = m.dim();
    if let UniversalKind::Scalar = u.kind() {
        let v = neg_log2_enclosure(&u.m_value(s, stage), k);
        let zero = RationalInterval::point(BigRational::zero());
        let entries = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| ComplexInterval { re: if r == c { v.clone() } else { zero.clone() }, im: zero.clone() })
                    .collect()
            })
            .collect();
        return Ok(MatrixKReport { s: s.clone(), entries, eigenvalues: vec![v], k_upper });
    }
    // λ_min >= det / tr^(N-1), since the other eigenvalues are at most tr.
    let det = m.as_matrix().determinant().re;
    let tr = m.trace();
    let floor = det / (0..n - 1).fold(BigRational::one(), |acc, _| &acc * &tr);
    let neg_log2 = |iv: &RationalInterval, p: u32| -> Result<RationalInterval> {
        let lo = iv.lo().clone().max(floor.clone());
        let hi = iv.hi().clone();
        if !lo.is_positive() || lo > hi {
            return Err(Error::Validation("eigenvalue enclosure is not positive".into()));
        }
        let top = neg_log2_enclosure(&lo, p);
        let bottom = neg_log2_enclosure(&hi, p);
        Ok(RationalInterval::new(bottom.lo().clone(), top.hi().clone()))
    };
    let entries = matrix_function_enclosure(&m, k, &neg_log2)?;
    let eigenvalues = eigenvalue_enclosures(&m, k + 8).iter().map(|iv| neg_log2(iv, k + 8)).collect::<Result<_>>()?;
    Ok(MatrixKReport { s: s.clone(), entries, eigenvalues, k_upper })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugationRow {
    pub s: BitString,
    /// `tr(U ρ U† M(s))`.
    #[serde(with = "crate::serde_util::rational")]
    pub evolved_state: BigRational,
    /// `tr(ρ U† M(s) U)`.
    #[serde(with = "crate::serde_util::rational")]
    pub conjugated_povm: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugationReport {
    pub status: &'static str,
    pub rows: Vec<ConjugationRow>,
    pub semi_povm_valid: bool,
    pub failures: Vec<String>,
}

impl ConjugationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `tr(U ρ U† M(s)) = tr(ρ U† M(s) U)` on `support`, and that the
/// conjugated family is still a semi-POVM there.
pub fn conjugation_invariance_check(
    rho: &DensityMatrix,
    u: &UniversalApprox,
    unitary: &ComplexMatrix,
    support: &[BitString],
    stage: u64,
) -> Result<ConjugationReport> {
    let evolved = rho.evolve(unitary)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut conjugated = OperatorMap::empty(u.dim());
    let mut sorted = support.to_vec();
    sorted.sort();
    sorted.dedup();
    for s in sorted {
        let m = u.element(&s, stage);
        let cm = crate::linalg::conjugate(unitary, &m)?;
        let lhs = evolved.matrix().trace_product(&m)?;
        let rhs = rho.matrix().trace_product(&cm)?;
        if lhs != rhs {
            failures.push(format!("{:?}: {} != {}", s.as_str(), format_rational(&lhs), format_rational(&rhs)));
        }
        conjugated.insert(s.clone(), cm)?;
        rows.push(ConjugationRow { s, evolved_state: lhs, conjugated_povm: rhs });
    }
    let semi_povm_valid = validate(&conjugated).is_ok();
    if !semi_povm_valid {
        failures.push("conjugated family is not a semi-POVM on the support".into());
    }
    let status = if failures.is_empty() { "pass" } else { "fail" };
    Ok(ConjugationReport { status, rows, semi_povm_valid, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ait::ScalarStageEnumerator;
    use crate::linalg::{operator_norm_bounds, pow2_neg, rat, HermitianMatrix};
    use crate::machine::{enumerate, EnumerateLimits};

    fn b(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    fn const_m(pairs: &[(&str, BigRational)]) -> ScalarStageEnumerator {
        ScalarStageEnumerator::constant(pairs.iter().map(|(s, q)| (b(s), q.clone())).collect())
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(&rat(1, 4)), -2);
        assert_eq!(ceil_log2(&rat(3, 16)), -2);
        assert_eq!(ceil_log2(&rat(1, 1)), 0);
        assert_eq!(ceil_log2(&rat(5, 1)), 3);
    }

    #[test]
    fn identity_povm_report() {
        let table = enumerate(12, 500, &EnumerateLimits::default()).unwrap();
        let q = OperatorMap::from_elements(2, [(b(""), HermitianMatrix::identity(2))]).unwrap();
        let r = verify_main_bounds(&DensityMatrix::maximally_mixed(2), &q, &table, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].prob.is_one());
        assert_eq!(r.c_observed, Some(BigRational::one() / table.p_lower(&b(""))));
        assert_eq!(r.d_observed, table.k_upper(&b("")).map(|k| k as i64));
        assert!(r.passed());
        assert!(r.to_csv().starts_with("s,prob_num,prob_den,k_upper,p_lower_num,p_lower_den,row_d,row_c\n,1,1,"));
    }

    #[test]
    fn violated_bound_is_reported() {
        let table = enumerate(8, 200, &EnumerateLimits::default()).unwrap();
        let q = OperatorMap::from_elements(1, [(b(""), HermitianMatrix::identity(1))]).unwrap();
        let bounds = [(b(""), rat(1, 2))].into_iter().collect();
        let r = verify_main_bounds(&DensityMatrix::maximally_mixed(1), &q, &table, Some(&bounds)).unwrap();
        assert!(!r.passed());
        assert_eq!(r.status, "fail");
    }

    #[test]
    fn optimality_scalar_and_noncommuting() {
        let m = const_m(&[("", rat(1, 4)), ("0", rat(1, 8)), ("1", rat(3, 64))]);
        let support = BitString::first(3);
        let rho = DensityMatrix::maximally_mixed(2);
        let s = UniversalApprox::scalar(m.clone(), 2, 0).unwrap();
        let r = verify_optimality(&rho, &s, &support, 0, None, 8).unwrap();
        assert!(r.passed());
        assert!(r.rows.iter().all(|row| row.prob == row.m));

        let u = UniversalApprox::noncommuting_default(m, 2, 0).unwrap();
        assert_eq!(u.c1(), rat(1, 8));
        let r = verify_optimality(&rho, &u, &support, 0, None, 8).unwrap();
        assert!(r.passed());
        for row in &r.rows {
            let e = u.element(&row.s, 0);
            assert_eq!(row.prob, e.trace() / rat(2, 1));
            assert!(row.prob <= *operator_norm_bounds(&e, 10).hi());
        }
    }

    #[test]
    fn matrix_k_scalar_examples() {
        let m = const_m(&[("", rat(1, 4)), ("0", rat(3, 16))]);
        let u = UniversalApprox::scalar(m, 2, 0).unwrap();
        let r = matrix_k(&u, &b(""), 0, 10, None).unwrap();
        assert_eq!(r.entries[0][0].re, RationalInterval::point(rat(2, 1)));
        assert_eq!(r.entries[0][1].re, RationalInterval::point(rat(0, 1)));
        let r = matrix_k(&u, &b("0"), 0, 10, None).unwrap();
        let target = (16.0f64 / 3.0).log2();
        let iv = &r.entries[1][1].re;
        assert!(iv.lo().clone() < rat(2416, 1000) && rat(2415, 1000) < iv.hi().clone());
        assert!(iv.width() <= pow2_neg(10));
        assert!((iv.to_f64_mid() - target).abs() < 1e-3);
        assert!(matrix_k(&u, &b("1"), 0, 10, None).is_err());
    }

    #[test]
    fn matrix_k_noncommuting_matches_closed_form() {
        let u = UniversalApprox::noncommuting_default(const_m(&[("", rat(1, 4))]), 2, 0).unwrap();
        let r = matrix_k(&u, &b(""), 0, 12, None).unwrap();
        // M = [[3/16,1/32],[1/32,1/8]]: eigenvalues (5 ± √2)/32.
        let lam = [(5.0 - 2f64.sqrt()) / 32.0, (5.0 + 2f64.sqrt()) / 32.0];
        let logs = [-lam[0].log2(), -lam[1].log2()];
        assert!((r.eigenvalues[0].to_f64_mid() - logs[0]).abs() < 1e-3);
        assert!((r.eigenvalues[1].to_f64_mid() - logs[1]).abs() < 1e-3);
        // -log2 M = V diag(logs) Vᵀ; the trace is the sum of the logs.
        let tr = r.entries[0][0].re.to_f64_mid() + r.entries[1][1].re.to_f64_mid();
        assert!((tr - logs[0] - logs[1]).abs() < 1e-3);
        for row in &r.entries {
            for z in row {
                assert!(z.max_width() <= pow2_neg(12));
            }
        }
    }

    #[test]
    fn conjugation_identity_is_trivial() {
        let m = const_m(&[("", rat(1, 4)), ("0", rat(1, 8))]);
        let u = UniversalApprox::noncommuting_default(m, 2, 0).unwrap();
        let rho = DensityMatrix::new(HermitianMatrix::diag(&[rat(2, 3), rat(1, 3)])).unwrap();
        let id = ComplexMatrix::identity(2);
        let r = conjugation_invariance_check(&rho, &u, &id, &BitString::first(3), 0).unwrap();
        assert!(r.passed());
        let rot = ComplexMatrix::from_real_rows(vec![vec![rat(3, 5), rat(4, 5)], vec![rat(-4, 5), rat(3, 5)]]).unwrap();
        let r = conjugation_invariance_check(&rho, &u, &rot, &BitString::first(3), 0).unwrap();
        assert!(r.passed());
        assert!(conjugation_invariance_check(&rho, &u, &ComplexMatrix::from_real_rows(vec![vec![rat(1, 1), rat(1, 1)], vec![rat(0, 1), rat(1, 1)]]).unwrap(), &[], 0).is_err());
    }
}
