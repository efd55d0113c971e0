use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, Machine, RunOutcome, Status};
use crate::ait::codec::BitString;
use crate::error::{Error, Result};

/// A halting program of the reference machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HaltRecord {
    pub bits: BitString,
    pub output: BitString,
    pub steps: u64,
}

impl HaltRecord {
    /// Re-runs the program within its recorded step count.
    pub fn reproduces(&self) -> bool {
        run(&self.bits, self.steps) == RunOutcome::Halted { output: self.output.clone(), steps: self.steps }
    }
}

fn record_order(a: &HaltRecord, b: &HaltRecord) -> std::cmp::Ordering {
    a.bits.cmp(&b.bits)
}

/// Upper limits on enumeration budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerateLimits {
    pub len_cap: usize,
    pub steps_cap: u64,
    /// Cap on the estimated work-tape arena, in bytes.
    pub max_mem: Option<u64>,
}

impl Default for EnumerateLimits {
    fn default() -> Self {
        Self { len_cap: 24, steps_cap: 1_000_000, max_mem: None }
    }
}

impl EnumerateLimits {
    fn check(&self, max_len: usize, max_steps: u64) -> Result<()> {
        if max_len > self.len_cap {
            return Err(Error::Budget(format!("max_len {max_len} exceeds cap {}", self.len_cap)));
        }
        if max_steps > self.steps_cap {
            return Err(Error::Budget(format!("max_steps {max_steps} exceeds cap {}", self.steps_cap)));
        }
        if let Some(cap) = self.max_mem {
            // Tape length never exceeds the step count; one live machine per
            // tree level per worker.
            let workers = rayon::current_num_threads() as u64;
            let estimate = (max_steps / 8 + 64) * (max_len as u64 + 1) * workers;
            if estimate > cap {
                return Err(Error::Budget(format!("estimated arena {estimate} bytes exceeds cap {cap}")));
            }
        }
        Ok(())
    }
}

/// Staged complexity bounds from all programs of length `<= max_len` that
/// halt within `max_steps` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityTable {
    max_len: usize,
    max_steps: u64,
    records: Vec<HaltRecord>,
    by_output: BTreeMap<BitString, Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    k_upper: u64,
    p_lower: BigRational,
}

#[derive(Serialize, Deserialize)]
struct TableWire {
    max_len: usize,
    max_steps: u64,
    records: Vec<HaltRecord>,
}

impl ComplexityTable {
    fn from_records(max_len: usize, max_steps: u64, mut records: Vec<HaltRecord>) -> Self {
        records.sort_by(record_order);
        records.dedup();
        let mut by_output: BTreeMap<BitString, Entry> = BTreeMap::new();
        for r in &records {
            let len = r.bits.len() as u64;
            let weight = BigRational::new(BigInt::one(), BigInt::one() << len as usize);
            by_output
                .entry(r.output.clone())
                .and_modify(|e| {
                    e.k_upper = e.k_upper.min(len);
                    e.p_lower += &weight;
                })
                .or_insert(Entry { k_upper: len, p_lower: weight });
        }
        Self { max_len, max_steps, records, by_output }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn records(&self) -> &[HaltRecord] {
        &self.records
    }

    /// Shortest known program length for `s`; `None` stands for ∞.
    pub fn k_upper(&self, s: &BitString) -> Option<u64> {
        self.by_output.get(s).map(|e| e.k_upper)
    }

    /// `Σ 2^{-|p|}` over known programs for `s`.
    pub fn p_lower(&self, s: &BitString) -> BigRational {
        self.by_output.get(s).map(|e| e.p_lower.clone()).unwrap_or_else(BigRational::zero)
    }

    /// Outputs with at least one known program, in canonical order.
    pub fn outputs(&self) -> impl Iterator<Item = &BitString> {
        self.by_output.keys()
    }

    pub fn kraft_sum(&self) -> BigRational {
        self.by_output.values().fold(BigRational::zero(), |acc, e| acc + &e.p_lower)
    }

    /// The exact table a smaller budget would have produced.
    pub fn restrict(&self, max_len: usize, max_steps: u64) -> ComplexityTable {
        let records =
            self.records.iter().filter(|r| r.bits.len() <= max_len && r.steps <= max_steps).cloned().collect();
        Self::from_records(max_len.min(self.max_len), max_steps.min(self.max_steps), records)
    }

    pub fn to_json(&self) -> String {
        let wire = TableWire { max_len: self.max_len, max_steps: self.max_steps, records: self.records.clone() };
        serde_json::to_string_pretty(&wire).expect("table serializes")
    }

    /// Parses a table and checks that every record is within budget,
    /// reproducible, and that the program set is prefix-free.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: TableWire = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for r in &wire.records {
            if r.bits.len() > wire.max_len || r.steps > wire.max_steps {
                return Err(Error::Validation(format!("record {:?} exceeds the table budget", r.bits.as_str())));
            }
            if !r.reproduces() {
                return Err(Error::Validation(format!("record {:?} does not reproduce", r.bits.as_str())));
            }
        }
        if !prefix_free_check(wire.records.iter().map(|r| &r.bits)) {
            return Err(Error::Validation("table programs are not prefix-free".into()));
        }
        Ok(Self::from_records(wire.max_len, wire.max_steps, wire.records))
    }
}

/// True iff no program is a proper prefix of another.
pub fn prefix_free_check<'a>(programs: impl IntoIterator<Item = &'a BitString>) -> bool {
    let mut sorted: Vec<&str> = programs.into_iter().map(BitString::as_str).collect();
    sorted.sort_unstable();
    sorted.dedup();
    // In lexicographic order a prefix sorts immediately before some string
    // that extends it, and then also before its direct successor.
    sorted.windows(2).all(|w| !w[1].starts_with(w[0]))
}

/// Exact `Σ 2^{-|p|}` over distinct programs.
pub fn kraft_sum<'a>(programs: impl IntoIterator<Item = &'a BitString>) -> Result<BigRational> {
    let distinct: BTreeSet<&BitString> = programs.into_iter().collect();
    if !prefix_free_check(distinct.iter().copied()) {
        return Err(Error::Validation("program set is not prefix-free".into()));
    }
    Ok(distinct
        .iter()
        .map(|p| BigRational::new(BigInt::one(), BigInt::one() << p.len()))
        .fold(BigRational::zero(), |a, b| a + b))
}

/// Depth-first search of the program tree below `machine`.
fn explore(machine: Machine, prefix: &mut Vec<bool>, max_len: usize, max_steps: u64, out: &mut Vec<HaltRecord>) {
    let mut machine = machine;
    match machine.advance(max_steps) {
        Status::Halted => out.push(HaltRecord {
            bits: BitString::from_bits(prefix),
            output: machine.output(),
            steps: machine.steps(),
        }),
        Status::NeedBit if prefix.len() < max_len => {
            for bit in [false, true] {
                let mut child = machine.clone();
                if child.push_bit(bit).is_ok() {
                    prefix.push(bit);
                    explore(child, prefix, max_len, max_steps, out);
                    prefix.pop();
                }
            }
        }
        _ => {}
    }
}

/// Frontier depth at which the program tree is split across workers.
const SPLIT_DEPTH: usize = 8;

/// Dovetails every program of length `<= max_len` for at most `max_steps`
/// steps each. Deterministic regardless of thread count.
pub fn enumerate(max_len: usize, max_steps: u64, limits: &EnumerateLimits) -> Result<ComplexityTable> {
    limits.check(max_len, max_steps)?;
    let mut records = Vec::new();
    let mut frontier = vec![(Machine::new(), Vec::new())];
    let split = SPLIT_DEPTH.min(max_len);
    for _ in 0..split {
        let mut next = Vec::new();
        for (mut m, prefix) in frontier {
            match m.advance(max_steps) {
                Status::Halted => records.push(HaltRecord {
                    bits: BitString::from_bits(&prefix),
                    output: m.output(),
                    steps: m.steps(),
                }),
                Status::NeedBit => {
                    for bit in [false, true] {
                        let mut child = m.clone();
                        if child.push_bit(bit).is_ok() {
                            let mut p = prefix.clone();
                            p.push(bit);
                            next.push((child, p));
                        }
                    }
                }
                _ => {}
            }
        }
        frontier = next;
    }
    let found: Vec<Vec<HaltRecord>> = frontier
        .into_par_iter()
        .map(|(m, mut prefix)| {
            let mut out = Vec::new();
            explore(m, &mut prefix, max_len, max_steps, &mut out);
            out
        })
        .collect();
    records.extend(found.into_iter().flatten());
    Ok(ComplexityTable::from_records(max_len, max_steps, records))
}

/// Extends a previously computed table to larger budgets. The previous
/// records must reappear unchanged in the extended table.
pub fn enumerate_resume(
    previous: &ComplexityTable,
    max_len: usize,
    max_steps: u64,
    limits: &EnumerateLimits,
) -> Result<ComplexityTable> {
    if max_len < previous.max_len || max_steps < previous.max_steps {
        return Err(Error::Validation(format!(
            "resume budgets ({max_len}, {max_steps}) are smaller than the table's ({}, {})",
            previous.max_len, previous.max_steps
        )));
    }
    let table = enumerate(max_len, max_steps, limits)?;
    let known: BTreeSet<&HaltRecord> = table.records.iter().collect();
    if let Some(missing) = previous.records.iter().find(|r| !known.contains(r)) {
        return Err(Error::Validation(format!("resumed table lost record {:?}", missing.bits.as_str())));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::super::{diverging_program, literal_program};
    use super::*;

    fn b(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    #[test]
    fn zero_length_budget_is_empty() {
        let t = enumerate(0, 1000, &EnumerateLimits::default()).unwrap();
        assert!(t.records().is_empty());
        assert_eq!(t.kraft_sum(), BigRational::zero());
        assert_eq!(t.k_upper(&BitString::empty()), None);
    }

    #[test]
    fn prefix_free_examples() {
        assert!(prefix_free_check(std::iter::empty()));
        assert!(!prefix_free_check([b("0"), b("01")].iter()));
        assert!(prefix_free_check([b("00"), b("01"), b("10"), b("11")].iter()));
    }

    #[test]
    fn kraft_examples() {
        assert_eq!(kraft_sum(std::iter::empty()).unwrap(), BigRational::zero());
        assert_eq!(kraft_sum([b("00"), b("01"), b("10"), b("11")].iter()).unwrap(), BigRational::one());
        assert!(kraft_sum([b("0"), b("01")].iter()).is_err());
    }

    #[test]
    fn enumeration_matches_brute_force_runs() {
        // Oracle: run every bit string of length <= 10 independently.
        let (l, t) = (10, 200);
        let table = enumerate(l, t, &EnumerateLimits::default()).unwrap();
        let mut brute = Vec::new();
        for p in BitString::up_to_len(l) {
            if let RunOutcome::Halted { output, steps } = run(&p, t) {
                brute.push(HaltRecord { bits: p, output, steps });
            }
        }
        assert_eq!(table.records(), &brute[..]);
        assert!(prefix_free_check(table.records().iter().map(|r| &r.bits)));
    }

    #[test]
    fn literal_programs_are_found() {
        let table = enumerate(12, 1000, &EnumerateLimits::default()).unwrap();
        assert_eq!(table.k_upper(&BitString::empty()), Some(3));
        let s = b("0110");
        let lit = literal_program(&s);
        assert!(table.k_upper(&s).unwrap() <= lit.len() as u64);
        assert!(!table.records().iter().any(|r| r.bits == diverging_program()));
    }

    #[test]
    fn budgets_are_monotone() {
        let small = enumerate(9, 20, &EnumerateLimits::default()).unwrap();
        let big = enumerate(11, 200, &EnumerateLimits::default()).unwrap();
        let bigger: BTreeSet<_> = big.records().iter().collect();
        assert!(small.records().iter().all(|r| bigger.contains(r)));
        assert_eq!(big.restrict(9, 20), small);
        for s in small.outputs() {
            assert!(big.k_upper(s).unwrap() <= small.k_upper(s).unwrap());
            assert!(big.p_lower(s) >= small.p_lower(s));
        }
    }

    #[test]
    fn caps_are_enforced() {
        let limits = EnumerateLimits { len_cap: 4, steps_cap: 10, max_mem: None };
        assert!(enumerate(5, 10, &limits).unwrap_err().is_budget());
        assert!(enumerate(4, 11, &limits).unwrap_err().is_budget());
        let tiny = EnumerateLimits { max_mem: Some(16), ..EnumerateLimits::default() };
        assert!(enumerate(4, 1000, &tiny).unwrap_err().is_budget());
    }

    #[test]
    fn json_roundtrip_and_resume() {
        let t = enumerate(9, 50, &EnumerateLimits::default()).unwrap();
        let text = t.to_json();
        let back = ComplexityTable::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
        let extended = enumerate_resume(&back, 10, 60, &EnumerateLimits::default()).unwrap();
        assert_eq!(extended, enumerate(10, 60, &EnumerateLimits::default()).unwrap());
        assert!(enumerate_resume(&back, 8, 50, &EnumerateLimits::default()).is_err());
    }

    #[test]
    fn tampered_table_is_rejected() {
        let t = enumerate(6, 50, &EnumerateLimits::default()).unwrap();
        let text = t.to_json().replacen("\"steps\": 1", "\"steps\": 0", 1);
        assert!(ComplexityTable::from_json(&text).is_err());
    }
}
