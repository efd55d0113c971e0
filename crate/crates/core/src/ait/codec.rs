//! Finite binary strings, their identification with the naturals, and the
//! pairing bijection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite binary string. Ordered as `λ, 0, 1, 00, 01, …` (length first,
/// then lexicographic), which is the order induced by [`phi`].
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(String);

impl BitString {
    pub fn empty() -> Self {
        Self(String::new())
    }

    pub fn new(s: &str) -> Result<Self> {
        if let Some(c) = s.chars().find(|c| *c != '0' && *c != '1') {
            return Err(Error::Parse(format!("invalid character {c:?} in bit string {s:?}")));
        }
        Ok(Self(s.to_owned()))
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| if b { '1' } else { '0' }).collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.bytes().map(|b| b == b'1')
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The next string in the canonical order.
    pub fn successor(&self) -> BitString {
        phi_inv(&(phi(self) + 1u32))
    }

    /// All strings of length exactly `len`, in canonical order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        (0u64..(1u64 << len)).map(move |v| BitString((0..len).rev().map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()))
    }

    /// All strings of length at most `len`, in canonical order.
    pub fn up_to_len(len: usize) -> impl Iterator<Item = BitString> {
        (0..=len).flat_map(BitString::all_of_len)
    }

    /// The first `count` strings in canonical order.
    pub fn first(count: u64) -> Vec<BitString> {
        (0..count).map(|n| phi_inv_u64(n)).collect()
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for BitString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BitString::new(s)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("λ")
        } else {
            f.write_str(&self.0)
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self.0)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitString::new(&s).map_err(serde::de::Error::custom)
    }
}

/// `φ(s)`: read `1s` as a binary numeral and subtract one.
pub fn phi(s: &BitString) -> BigUint {
    let mut v = BigUint::one();
    for b in s.bits() {
        v <<= 1;
        if b {
            v += 1u32;
        }
    }
    v - 1u32
}

/// `φ(s)` when it fits in a `u64`.
pub fn phi_u64(s: &BitString) -> Option<u64> {
    phi(s).to_u64()
}

pub fn phi_inv(n: &BigUint) -> BitString {
    let v = n + 1u32;
    let bits = v.bits();
    let s: String = (0..bits - 1).rev().map(|i| if v.bit(i) { '1' } else { '0' }).collect();
    BitString(s)
}

pub fn phi_inv_u64(n: u64) -> BitString {
    phi_inv(&BigUint::from(n))
}

/// Cantor pairing `(a+b)(a+b+1)/2 + b`.
pub fn cantor(a: &BigUint, b: &BigUint) -> BigUint {
    let w = a + b;
    (&w * (&w + 1u32)) / 2u32 + b
}

pub fn cantor_inv(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z + 1) - 1) / 2)
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = z - t;
    let a = &w - &b;
    (a, b)
}

/// `⟨s, t⟩ = φ⁻¹(Cantor(φ(s), φ(t)))`.
pub fn pair(s: &BitString, t: &BitString) -> BitString {
    phi_inv(&cantor(&phi(s), &phi(t)))
}

pub fn unpair(u: &BitString) -> (BitString, BitString) {
    let (a, b) = cantor_inv(&phi(u));
    (phi_inv(&a), phi_inv(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&b("")), BigUint::from(0u32));
        assert_eq!(phi(&b("0")), BigUint::from(1u32));
        assert_eq!(phi(&b("010")), BigUint::from(9u32));
        assert_eq!(phi_inv_u64(9), b("010"));
    }

    #[test]
    fn phi_roundtrip_exhaustive() {
        for s in BitString::up_to_len(16) {
            assert_eq!(phi_inv(&phi(&s)), s);
        }
        for n in 0u64..(1 << 17) {
            assert_eq!(phi_u64(&phi_inv_u64(n)), Some(n));
        }
    }

    #[test]
    fn order_matches_phi() {
        let strings: Vec<_> = BitString::up_to_len(4).collect();
        for w in strings.windows(2) {
            assert!(w[0] < w[1]);
            assert_eq!(w[0].successor(), w[1]);
        }
        assert_eq!(BitString::first(4), vec![b(""), b("0"), b("1"), b("00")]);
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair(&b(""), &b("")), b(""));
        assert_eq!(pair(&b(""), &b("0")), b("1"));
        assert_eq!(pair(&b("0"), &b("")), b("0"));
    }

    #[test]
    fn unpair_inverts_pair_exhaustively() {
        let strings: Vec<_> = BitString::up_to_len(6).collect();
        for s in &strings {
            for t in &strings {
                assert_eq!(unpair(&pair(s, t)), (s.clone(), t.clone()));
            }
        }
    }

    #[test]
    fn rejects_non_binary() {
        assert!(BitString::new("012").is_err());
    }
}
