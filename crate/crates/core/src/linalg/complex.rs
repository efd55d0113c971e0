use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    BigRational::from_str(text.trim()).map_err(|e| Error::Parse(format!("bad rational {text:?}: {e}")))
}

/// Canonical `"p/q"` rendering; the denominator is always written.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `2^{-k}` as an exact rational.
pub fn pow2_neg(k: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ComplexRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    /// |z|^2, always rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self { re: &self.re * k, im: &self.im * k }
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Self { re: &self.re / &n, im: -&self.im / &n })
    }
}

impl Zero for ComplexRational {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ComplexRational {
    fn one() -> Self {
        Self::real(BigRational::one())
    }
}

impl From<BigRational> for ComplexRational {
    fn from(re: BigRational) -> Self {
        Self::real(re)
    }
}

impl<'a> Add<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn add(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Add for ComplexRational {
    type Output = ComplexRational;
    fn add(self, rhs: ComplexRational) -> ComplexRational {
        &self + &rhs
    }
}

impl<'a> AddAssign<&'a ComplexRational> for ComplexRational {
    fn add_assign(&mut self, rhs: &ComplexRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> Sub<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn sub(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Sub for ComplexRational {
    type Output = ComplexRational;
    fn sub(self, rhs: ComplexRational) -> ComplexRational {
        &self - &rhs
    }
}

impl<'a> SubAssign<&'a ComplexRational> for ComplexRational {
    fn sub_assign(&mut self, rhs: &ComplexRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl<'a> Mul<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn mul(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Mul for ComplexRational {
    type Output = ComplexRational;
    fn mul(self, rhs: ComplexRational) -> ComplexRational {
        &self * &rhs
    }
}

impl<'a> Div<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn div(self, rhs: &ComplexRational) -> ComplexRational {
        self * &rhs.inv().expect("division by zero complex rational")
    }
}

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational { re: -self.re, im: -self.im }
    }
}

impl<'a> Neg for &'a ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Debug for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexWire {
    re: String,
    im: String,
}

impl Serialize for ComplexRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexWire { re: format_rational(&self.re), im: format_rational(&self.im) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ComplexWire::deserialize(deserializer)?;
        let re = parse_rational(&wire.re).map_err(serde::de::Error::custom)?;
        let im = parse_rational(&wire.im).map_err(serde::de::Error::custom)?;
        Ok(ComplexRational { re, im })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_is_reduced() {
        let q = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7/1");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn multiplication_and_inverse() {
        let z = ComplexRational::from_ints(3, 4);
        assert_eq!(z.norm_sqr(), rat(25, 1));
        let w = &z * &z.inv().unwrap();
        assert_eq!(w, ComplexRational::one());
        assert_eq!(&ComplexRational::i() * &ComplexRational::i(), ComplexRational::from_ints(-1, 0));
    }

    #[test]
    fn wire_format() {
        let z = ComplexRational::new(rat(1, 2), rat(-3, 4));
        let json = serde_json::to_string(&z).unwrap();
        assert_eq!(json, r#"{"re":"1/2","im":"-3/4"}"#);
        let back: ComplexRational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, z);
    }
}
