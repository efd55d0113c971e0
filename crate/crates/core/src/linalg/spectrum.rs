//! Exact characteristic polynomials and Sturm-sequence eigenvalue
//! enclosures for Hermitian matrices.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::complex::{pow2_neg, ComplexRational};
use super::interval::{ComplexInterval, RationalInterval};
use super::matrix::{ComplexMatrix, HermitianMatrix};
use crate::error::{Error, Result};

/// Dense univariate polynomial, coefficients from the constant term up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(i.into())).collect(),
        )
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    /// Quotient and remainder of polynomial long division.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.0.clone();
        let dd = d.degree();
        let lead = d.lead();
        if r.len() < d.0.len() {
            return (Poly(Vec::new()), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        let lead = a.lead();
        if lead.is_zero() {
            return a;
        }
        Poly(a.0.iter().map(|c| c / &lead).collect())
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn square_free(&self) -> Poly {
        let d = self.derivative();
        if d.is_zero() {
            return self.clone();
        }
        let g = self.gcd(&d);
        self.div_rem(&g).0
    }

    /// Cauchy bound: every root lies strictly inside `(-B, B)`.
    pub fn root_bound(&self) -> BigRational {
        let lead = self.lead();
        let m = self.0[..self.0.len().saturating_sub(1)]
            .iter()
            .map(|c| (c / &lead).abs())
            .max()
            .unwrap_or_else(BigRational::zero);
        BigRational::one() + m
    }
}

/// Characteristic polynomial `det(xI - A)` by the Faddeev–LeVerrier
/// recurrence, carried out in exact complex rationals.
pub fn characteristic_polynomial(a: &HermitianMatrix) -> Poly {
    let n = a.dim();
    let am = a.as_matrix();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m = ComplexMatrix::zeros(n);
    for k in 1..=n {
        let shifted = {
            let c = ComplexRational::real(coeffs[n - k + 1].clone());
            let id = ComplexMatrix::identity(n).scale_complex(&c);
            am.mul(&m).expect("square").add(&id).expect("square")
        };
        m = shifted;
        let t = am.mul(&m).expect("square").trace();
        debug_assert!(t.is_real());
        coeffs[n - k] = -t.re / BigRational::from_integer(k.into());
    }
    Poly::new(coeffs)
}

/// Sturm chain of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<Poly>,
}

fn sign(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let p0 = p.square_free();
        let mut chain = vec![p0.clone()];
        let p1 = p0.derivative();
        if !p1.is_zero() {
            chain.push(p1);
            loop {
                let len = chain.len();
                let r = chain[len - 2].div_rem(&chain[len - 1]).1;
                if r.is_zero() {
                    break;
                }
                chain.push(r.neg());
            }
        }
        Self { chain }
    }

    pub fn poly(&self) -> &Poly {
        &self.chain[0]
    }

    fn variations_at(&self, x: &BigRational) -> usize {
        variations(self.chain.iter().map(|p| sign(&p.eval(x))))
    }

    fn variations_at_pos_inf(&self) -> usize {
        variations(self.chain.iter().map(|p| sign(&p.lead())))
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count_in(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }

    /// Number of distinct roots strictly greater than `x`.
    pub fn count_greater(&self, x: &BigRational) -> usize {
        self.variations_at(x) - self.variations_at_pos_inf()
    }

    /// Disjoint enclosures of every distinct real root, ascending, each of
    /// width at most `2^-k`.
    pub fn isolate(&self, k: u32) -> Vec<RationalInterval> {
        let p = self.poly();
        if p.degree() == 0 {
            return Vec::new();
        }
        let bound = p.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((a, b)) = stack.pop() {
            match self.count_in(&a, &b) {
                0 => {}
                1 => out.push(self.refine(a, b, k)),
                _ => {
                    let m = (&a + &b) / BigRational::from_integer(2.into());
                    stack.push((a, m.clone()));
                    stack.push((m, b));
                }
            }
        }
        out.sort_by(|x, y| x.lo().cmp(y.lo()));
        out
    }

    /// Shrinks `(a, b]`, which holds exactly one root, to width `2^-k`.
    fn refine(&self, mut a: BigRational, mut b: BigRational, k: u32) -> RationalInterval {
        let p = self.poly();
        if p.eval(&b).is_zero() {
            return RationalInterval::point(b);
        }
        let target = pow2_neg(k as u64);
        while &b - &a > target {
            let m = (&a + &b) / BigRational::from_integer(2.into());
            if p.eval(&m).is_zero() {
                return RationalInterval::point(m);
            }
            if self.count_in(&a, &m) == 1 {
                b = m;
            } else {
                a = m;
            }
        }
        RationalInterval::new(a, b)
    }
}

/// Enclosures of the distinct eigenvalues of `a`, ascending.
pub fn eigenvalue_enclosures(a: &HermitianMatrix, k: u32) -> Vec<RationalInterval> {
    SturmChain::new(&characteristic_polynomial(a)).isolate(k)
}

/// Sign of the smallest eigenvalue, decided by Sturm counts on the exact
/// characteristic polynomial.
pub fn min_eigenvalue_sign(a: &HermitianMatrix) -> Ordering {
    let chain = SturmChain::new(&characteristic_polynomial(a));
    let p = chain.poly();
    let zero = BigRational::zero();
    let below = -p.root_bound();
    let at_zero = p.eval(&zero).is_zero();
    let in_lower = chain.count_in(&below, &zero) - usize::from(at_zero);
    if in_lower > 0 {
        Ordering::Less
    } else if at_zero {
        Ordering::Equal
    } else {
        Ordering::Greater
    }
}

/// Certified enclosure of the operator norm `max |λ|`, width `<= 2^-k`.
pub fn operator_norm_bounds(a: &HermitianMatrix, k: u32) -> RationalInterval {
    if a.is_zero() {
        return RationalInterval::point(BigRational::zero());
    }
    let eig = eigenvalue_enclosures(a, k);
    let smallest = eig.first().expect("nonzero Hermitian matrix has eigenvalues");
    let largest = eig.last().expect("nonzero Hermitian matrix has eigenvalues");
    let neg_small = -smallest;
    let hull = largest.max(&neg_small);
    let lo = hull.lo().clone().max(BigRational::zero());
    RationalInterval::new(lo, hull.hi().clone())
}

/// Entry-wise enclosure of `f(A)` for a Hermitian `A`, given a function that
/// encloses `f` on each eigenvalue enclosure. Uses Lagrange–Sylvester
/// interpolation over the distinct eigenvalues, which is exact for
/// diagonalizable matrices. Precision is raised until every entry has width
/// at most `2^-k`.
pub fn matrix_function_enclosure(
    a: &HermitianMatrix,
    k: u32,
    f: impl Fn(&RationalInterval, u32) -> Result<RationalInterval>,
) -> Result<Vec<Vec<ComplexInterval>>> {
    let n = a.dim();
    let target = pow2_neg(k as u64);
    let chain = SturmChain::new(&characteristic_polynomial(a));
    let mut precision = k + 8;
    for _ in 0..32 {
        let eig = chain.isolate(precision);
        let mut total = vec![vec![ComplexInterval::zero(); n]; n];
        for (i, li) in eig.iter().enumerate() {
            let fi = f(li, precision)?;
            // Product of (A - λ_j I)/(λ_i - λ_j) over j != i, as an interval matrix.
            let mut prod: Vec<Vec<ComplexInterval>> = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| {
                            let one = if r == c { BigRational::one() } else { BigRational::zero() };
                            ComplexInterval {
                                re: RationalInterval::point(one),
                                im: RationalInterval::point(BigRational::zero()),
                            }
                        })
                        .collect()
                })
                .collect();
            for (j, lj) in eig.iter().enumerate() {
                if i == j {
                    continue;
                }
                let gap = li - lj;
                let inv_gap = RationalInterval::point(BigRational::one())
                    .div(&gap)
                    .ok_or_else(|| Error::Validation("eigenvalue enclosures overlap".into()))?;
                let factor: Vec<Vec<ComplexInterval>> = (0..n)
                    .map(|r| {
                        (0..n)
                            .map(|c| {
                                let z = a.get(r, c);
                                let mut re = RationalInterval::point(z.re.clone());
                                if r == c {
                                    re = &re - lj;
                                }
                                ComplexInterval { re, im: RationalInterval::point(z.im.clone()) }.scale(&inv_gap)
                            })
                            .collect()
                    })
                    .collect();
                prod = interval_matmul(&prod, &factor);
            }
            for r in 0..n {
                for c in 0..n {
                    total[r][c] = total[r][c].add(&prod[r][c].scale(&fi));
                }
            }
        }
        let worst = total.iter().flatten().map(ComplexInterval::max_width).max().unwrap_or_else(BigRational::zero);
        if worst <= target {
            return Ok(total);
        }
        precision += 16;
    }
    Err(Error::Budget(format!("matrix function enclosure did not reach width 2^-{k}")))
}

fn interval_matmul(a: &[Vec<ComplexInterval>], b: &[Vec<ComplexInterval>]) -> Vec<Vec<ComplexInterval>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(ComplexInterval::zero(), |acc, k| acc.add(&a[i][k].mul(&b[k][j]))))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::complex::rat;
    use super::*;

    fn sym(rows: &[&[i64]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn char_poly_of_2x2() {
        // x^2 - 4x + 3
        let p = characteristic_polynomial(&sym(&[&[2, 1], &[1, 2]]));
        assert_eq!(p, Poly::new(vec![rat(3, 1), rat(-4, 1), rat(1, 1)]));
    }

    #[test]
    fn square_free_drops_multiplicity() {
        let p = characteristic_polynomial(&HermitianMatrix::identity(3));
        let sf = p.square_free();
        assert_eq!(sf.degree(), 1);
        assert!(sf.eval(&rat(1, 1)).is_zero());
    }

    #[test]
    fn norm_examples() {
        let iv = operator_norm_bounds(&HermitianMatrix::diag(&[rat(1, 1), rat(3, 1)]), 10);
        assert!(iv.contains(&rat(3, 1)) && iv.width() <= pow2_neg(10));

        let iv = operator_norm_bounds(&sym(&[&[0, 1], &[1, 0]]), 4);
        assert!(iv.contains(&rat(1, 1)) && iv.width() <= pow2_neg(4));

        let iv = operator_norm_bounds(&sym(&[&[2, 1], &[1, 2]]), 8);
        assert!(iv.contains(&rat(3, 1)) && iv.width() <= pow2_neg(8));

        let iv = operator_norm_bounds(&sym(&[&[-5, 0], &[0, 1]]), 6);
        assert!(iv.contains(&rat(5, 1)));

        assert!(operator_norm_bounds(&HermitianMatrix::zeros(3), 4).is_point());
    }

    #[test]
    fn min_eigen_sign_examples() {
        assert_eq!(min_eigenvalue_sign(&HermitianMatrix::identity(2)), Ordering::Greater);
        assert_eq!(min_eigenvalue_sign(&sym(&[&[1, 1], &[1, 1]])), Ordering::Equal);
        assert_eq!(min_eigenvalue_sign(&sym(&[&[0, 1], &[1, 0]])), Ordering::Less);
        assert_eq!(min_eigenvalue_sign(&HermitianMatrix::zeros(2)), Ordering::Equal);
    }

    #[test]
    fn enclosures_are_disjoint_and_cover_simple_spectrum() {
        let eig = eigenvalue_enclosures(&sym(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]), 20);
        // 2 - √2, 2, 2 + √2
        assert_eq!(eig.len(), 3);
        assert!(eig[1].contains(&rat(2, 1)));
        assert!(eig[0].hi() < eig[1].lo() && eig[1].hi() < eig[2].lo());
    }
}
