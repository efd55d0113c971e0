use num_rational::BigRational;
use serde::Serialize;

use super::codec::{pair, BitString};
use crate::machine::ComplexityTable;

/// Joint, conditional and mutual complexity built on a staged table.
/// Missing entries are ∞ and propagate as `None`.
#[derive(Clone, Debug)]
pub struct AitTable {
    base: ComplexityTable,
}

/// `K̂(s,u)`, `K̂(s|u)`, `K̂(s:u)` for one pair of strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AitMetrics {
    pub joint: Option<u64>,
    pub conditional: Option<i64>,
    pub mutual: Option<i64>,
    /// Set when any referenced table entry is ∞.
    pub infinite: bool,
}

impl AitTable {
    pub fn new(base: ComplexityTable) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &ComplexityTable {
        &self.base
    }

    pub fn k(&self, s: &BitString) -> Option<u64> {
        self.base.k_upper(s)
    }

    pub fn joint(&self, s: &BitString, t: &BitString) -> Option<u64> {
        self.base.k_upper(&pair(s, t))
    }

    /// `K̂(s|t) = K̂(t,s) - K̂(t)`.
    pub fn conditional(&self, s: &BitString, t: &BitString) -> Option<i64> {
        Some(self.joint(t, s)? as i64 - self.k(t)? as i64)
    }

    /// `K̂(s:t) = K̂(s) + K̂(t) - K̂(s,t)`.
    pub fn mutual(&self, s: &BitString, t: &BitString) -> Option<i64> {
        Some(self.k(s)? as i64 + self.k(t)? as i64 - self.joint(s, t)? as i64)
    }
}

pub fn ait_metrics(t: &AitTable, s: &BitString, u: &BitString) -> AitMetrics {
    let joint = t.joint(s, u);
    let conditional = t.conditional(s, u);
    let mutual = t.mutual(s, u);
    let infinite = t.k(s).is_none() || t.k(u).is_none() || joint.is_none() || t.joint(u, s).is_none();
    AitMetrics { joint, conditional, mutual, infinite }
}

/// Min / max / mean of an integer-valued quantity over a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Spread {
    pub count: usize,
    pub min: Option<i64>,
    pub max: Option<i64>,
    #[serde(with = "crate::serde_util::option_rational")]
    pub mean: Option<BigRational>,
}

impl Spread {
    fn of(values: &[i64]) -> Self {
        let mean = (!values.is_empty()).then(|| {
            BigRational::new(values.iter().sum::<i64>().into(), (values.len() as i64).into())
        });
        Self { count: values.len(), min: values.iter().min().copied(), max: values.iter().max().copied(), mean }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricRow {
    pub s: BitString,
    pub t: BitString,
    pub metric: &'static str,
    pub value: Option<i64>,
}

/// Empirical ranges for the asymptotic identities of the complexity
/// calculus. Nothing here is asserted; the constants are machine-relative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub sample: Vec<BitString>,
    /// `K̂(s,t) - K̂(t,s)`.
    pub joint_symmetry: Spread,
    /// `K̂(s:t) - K̂(t:s)`.
    pub mutual_symmetry: Spread,
    /// `K̂(s|t)`, whose lower bound is the quantity of interest.
    pub conditional: Spread,
    /// `K̂(s:t)`.
    pub mutual: Spread,
    /// `K̂(s:s) - K̂(s)`.
    pub self_information: Spread,
    /// `K̂(s:λ)`.
    pub mutual_with_empty: Spread,
    /// Pairs skipped because an entry was ∞.
    pub infinite_pairs: usize,
    pub rows: Vec<MetricRow>,
}

impl IdentityReport {
    /// CSV with columns `s,t,metric,value`; ∞ is written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,metric,value\n");
        for r in &self.rows {
            let v = r.value.map_or_else(|| "inf".to_owned(), |v| v.to_string());
            out.push_str(&format!("{},{},{},{}\n", r.s.as_str(), r.t.as_str(), r.metric, v));
        }
        out
    }
}

/// Aggregates the calculus over all ordered pairs of `sample`. The sample is
/// sorted and deduplicated first, so the result does not depend on its order.
pub fn ait_identity_report(t: &AitTable, sample: &[BitString]) -> IdentityReport {
    let mut sample = sample.to_vec();
    sample.sort();
    sample.dedup();
    let (mut joint_sym, mut mutual_sym, mut cond, mut mutual, mut infinite) = (vec![], vec![], vec![], vec![], 0);
    let mut rows = Vec::new();
    for s in &sample {
        for u in &sample {
            let m = ait_metrics(t, s, u);
            rows.push(MetricRow { s: s.clone(), t: u.clone(), metric: "joint", value: m.joint.map(|v| v as i64) });
            rows.push(MetricRow { s: s.clone(), t: u.clone(), metric: "conditional", value: m.conditional });
            rows.push(MetricRow { s: s.clone(), t: u.clone(), metric: "mutual", value: m.mutual });
            match (t.joint(s, u), t.joint(u, s), t.mutual(s, u), t.mutual(u, s), m.conditional) {
                (Some(a), Some(b), Some(x), Some(y), Some(c)) => {
                    joint_sym.push(a as i64 - b as i64);
                    mutual_sym.push(x - y);
                    cond.push(c);
                    mutual.push(x);
                }
                _ => infinite += 1,
            }
        }
    }
    let self_info: Vec<i64> =
        sample.iter().filter_map(|s| Some(t.mutual(s, s)? - t.k(s)? as i64)).collect();
    let with_empty: Vec<i64> = sample.iter().filter_map(|s| t.mutual(s, &BitString::empty())).collect();
    IdentityReport {
        joint_symmetry: Spread::of(&joint_sym),
        mutual_symmetry: Spread::of(&mutual_sym),
        conditional: Spread::of(&cond),
        mutual: Spread::of(&mutual),
        self_information: Spread::of(&self_info),
        mutual_with_empty: Spread::of(&with_empty),
        infinite_pairs: infinite,
        rows,
        sample,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{enumerate, EnumerateLimits};

    fn table() -> AitTable {
        AitTable::new(enumerate(14, 2000, &EnumerateLimits::default()).unwrap())
    }

    #[test]
    fn definitional_identities_hold() {
        let t = table();
        let strings: Vec<_> = BitString::up_to_len(2).collect();
        for s in &strings {
            for u in &strings {
                let m = ait_metrics(&t, s, u);
                if let (Some(ks), Some(ku), Some(j), Some(mu)) = (t.k(s), t.k(u), m.joint, m.mutual) {
                    assert_eq!(mu + j as i64, ks as i64 + ku as i64);
                }
                if let (Some(c), Some(j_rev), Some(ku)) = (m.conditional, t.joint(u, s), t.k(u)) {
                    assert_eq!(c, j_rev as i64 - ku as i64);
                }
            }
        }
    }

    #[test]
    fn singleton_lambda_sample_has_zero_differences() {
        let t = table();
        let r = ait_identity_report(&t, &[BitString::empty()]);
        assert_eq!(r.joint_symmetry.max, Some(0));
        assert_eq!(r.joint_symmetry.min, Some(0));
        assert_eq!(r.mutual_symmetry.max, Some(0));
    }

    #[test]
    fn report_is_order_independent() {
        let t = table();
        let mut sample: Vec<_> = BitString::up_to_len(2).collect();
        let a = ait_identity_report(&t, &sample);
        sample.reverse();
        let b = ait_identity_report(&t, &sample);
        assert_eq!(a, b);
        assert!(a.to_csv().starts_with("s,t,metric,value\n"));
    }

    #[test]
    fn missing_entries_are_flagged() {
        let t = AitTable::new(enumerate(0, 10, &EnumerateLimits::default()).unwrap());
        let m = ait_metrics(&t, &BitString::empty(), &BitString::empty());
        assert!(m.infinite);
        assert_eq!(m.mutual, None);
    }
}
