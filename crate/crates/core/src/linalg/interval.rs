use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::complex::{format_rational, parse_rational, pow2_neg};

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: {lo} > {hi}");
        Self { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Self::new(a, b)
        } else {
            Self::new(b, a)
        }
    }

    /// `self / other`; `other` must exclude zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if other.contains_zero() {
            return None;
        }
        let inv = Self::new(other.hi.recip(), other.lo.recip());
        Some(self * &inv)
    }

    pub fn max(&self, other: &Self) -> Self {
        Self::new(self.lo.clone().max(other.lo.clone()), self.hi.clone().max(other.hi.clone()))
    }

    pub fn to_f64_mid(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

impl<'a> Add<&'a RationalInterval> for &'a RationalInterval {
    type Output = RationalInterval;
    fn add(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval::new(&self.lo + &rhs.lo, &self.hi + &rhs.hi)
    }
}

impl<'a> Sub<&'a RationalInterval> for &'a RationalInterval {
    type Output = RationalInterval;
    fn sub(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval::new(&self.lo - &rhs.hi, &self.hi - &rhs.lo)
    }
}

impl<'a> Mul<&'a RationalInterval> for &'a RationalInterval {
    type Output = RationalInterval;
    fn mul(self, rhs: &RationalInterval) -> RationalInterval {
        let p = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let lo = p.iter().min().unwrap().clone();
        let hi = p.iter().max().unwrap().clone();
        RationalInterval::new(lo, hi)
    }
}

impl Neg for &RationalInterval {
    type Output = RationalInterval;
    fn neg(self) -> RationalInterval {
        RationalInterval::new(-&self.hi, -&self.lo)
    }
}

impl fmt::Debug for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalWire {
    lo: String,
    hi: String,
}

impl Serialize for RationalInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalWire { lo: format_rational(&self.lo), hi: format_rational(&self.hi) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = IntervalWire::deserialize(d)?;
        let lo = parse_rational(&w.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rational(&w.hi).map_err(serde::de::Error::custom)?;
        if lo > hi {
            return Err(serde::de::Error::custom("interval endpoints out of order"));
        }
        Ok(RationalInterval { lo, hi })
    }
}

/// Complex number with interval real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexInterval {
    pub re: RationalInterval,
    pub im: RationalInterval,
}

impl ComplexInterval {
    pub fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { re: &(&self.re * &o.re) - &(&self.im * &o.im), im: &(&self.re * &o.im) + &(&self.im * &o.re) }
    }

    pub fn scale(&self, k: &RationalInterval) -> Self {
        Self { re: &self.re * k, im: &self.im * k }
    }

    pub fn zero() -> Self {
        Self { re: RationalInterval::point(BigRational::zero()), im: RationalInterval::point(BigRational::zero()) }
    }

    pub fn max_width(&self) -> BigRational {
        self.re.width().max(self.im.width())
    }
}

/// Largest multiple of `2^-bits` not exceeding `x`.
pub fn round_down(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.floor().to_integer(), scale)
}

/// Smallest multiple of `2^-bits` not below `x`.
pub fn round_up(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

/// `floor(log2 x)` for positive rational `x`.
pub fn floor_log2(x: &BigRational) -> i64 {
    assert!(x.is_positive());
    let n = x.numer().bits() as i64;
    let d = x.denom().bits() as i64;
    // 2^(n-1) <= num < 2^n and 2^(d-1) <= den < 2^d, so the answer is n-d or n-d-1.
    let e = n - d;
    if pow2(e) <= *x {
        e
    } else {
        e - 1
    }
}

/// `2^e` as a rational, for any integer `e`.
pub fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        pow2_neg(e.unsigned_abs())
    }
}

/// Enclosure of `log2 x` of width at most `2^-k`; a point interval when
/// `x` is an exact power of two.
pub fn log2_enclosure(x: &BigRational, k: u32) -> RationalInterval {
    assert!(x.is_positive(), "log2 of a non-positive rational");
    let e = floor_log2(x);
    let y = x / pow2(e);
    let base = BigRational::from_integer(e.into());
    if y.is_one() {
        return RationalInterval::point(base);
    }
    let two = BigRational::from_integer(2.into());
    let mut precision = k as u64 + 64;
    'retry: loop {
        let mut lo = y.clone();
        let mut hi = y.clone();
        let mut frac = BigInt::zero();
        for _ in 0..k {
            lo = round_down(&(&lo * &lo), precision);
            hi = round_up(&(&hi * &hi), precision);
            frac <<= 1;
            if lo >= two {
                frac += 1;
                lo = &lo / &two;
                hi = &hi / &two;
            } else if hi < two {
                // bit is 0
            } else {
                precision *= 2;
                continue 'retry;
            }
        }
        let scale = BigInt::one() << k as usize;
        let low = &base + BigRational::new(frac.clone(), scale.clone());
        let high = &base + BigRational::new(frac + 1, scale);
        return RationalInterval::new(low, high);
    }
}

/// Number of bits of `q` below the binary point needed to make it a
/// dyadic rational, if it is one.
pub fn dyadic_exponent(q: &BigRational) -> Option<u64> {
    let d = q.denom();
    if d.is_odd() && !d.is_one() {
        return None;
    }
    let tz = d.trailing_zeros().unwrap_or(0);
    if (d >> tz as usize).is_one() {
        Some(tz)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::super::complex::rat;
    use super::*;

    #[test]
    fn log2_of_powers_of_two_is_exact() {
        assert_eq!(log2_enclosure(&rat(1, 4), 20), RationalInterval::point(rat(-2, 1)));
        assert_eq!(log2_enclosure(&rat(8, 1), 5), RationalInterval::point(rat(3, 1)));
        assert_eq!(floor_log2(&rat(3, 16)), -3);
        assert_eq!(floor_log2(&rat(1, 1)), 0);
        assert_eq!(floor_log2(&rat(7, 1)), 2);
    }

    #[test]
    fn log2_enclosure_matches_float() {
        for &(n, d) in &[(16, 3), (3, 16), (5, 1), (1, 7), (1000, 999)] {
            let x = rat(n, d);
            let iv = log2_enclosure(&x, 24);
            assert!(iv.width() <= pow2_neg(24));
            let f = (n as f64 / d as f64).log2();
            use num_traits::ToPrimitive;
            assert!(iv.lo().to_f64().unwrap() <= f + 1e-12 && f - 1e-12 <= iv.hi().to_f64().unwrap(), "{iv:?} vs {f}");
        }
    }

    #[test]
    fn interval_mul_and_div() {
        let a = RationalInterval::new(rat(-1, 1), rat(2, 1));
        let b = RationalInterval::new(rat(3, 1), rat(4, 1));
        assert_eq!(&a * &b, RationalInterval::new(rat(-4, 1), rat(8, 1)));
        assert!(b.div(&a).is_none());
        assert_eq!(a.div(&b).unwrap(), RationalInterval::new(rat(-1, 3), rat(2, 3)));
    }

    #[test]
    fn rounding_is_outward() {
        let x = rat(1, 3);
        assert!(round_down(&x, 8) <= x && x <= round_up(&x, 8));
        assert_eq!(dyadic_exponent(&round_down(&x, 8)), Some(8));
        assert_eq!(dyadic_exponent(&round_up(&x, 8)), Some(7));
        assert_eq!(dyadic_exponent(&x), None);
        assert_eq!(dyadic_exponent(&rat(5, 1)), Some(0));
    }
}
