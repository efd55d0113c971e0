//! Exact random test objects: Hermitian matrices, density matrices, unit
//! vectors and unitaries with rational entries.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::linalg::{rat, ComplexMatrix, ComplexRational, HermitianMatrix};
use crate::povm::OperatorMap;
use crate::ait::BitString;

fn small_rational<R: Rng + ?Sized>(rng: &mut R, range: i64) -> BigRational {
    let num = rng.gen_range(-range..=range);
    let den = rng.gen_range(1..=4);
    rat(num, den)
}

fn small_complex<R: Rng + ?Sized>(rng: &mut R, range: i64) -> ComplexRational {
    ComplexRational::new(small_rational(rng, range), small_rational(rng, range))
}

/// A Hermitian matrix with entries `p/q`, `|p| <= range`, `q <= 4`. Some
/// draws are made deliberately singular or rank-deficient so PSD boundary
/// cases are exercised.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, range: i64) -> HermitianMatrix {
    match rng.gen_range(0..4) {
        // A A† is PSD, possibly singular when A has zero columns.
        0 => {
            let rank = rng.gen_range(0..=dim);
            let a = ComplexMatrix::from_fn(dim, |_, c| if c < rank { small_complex(rng, range) } else { ComplexRational::zero() });
            let p = a.mul(&a.adjoint()).expect("square");
            HermitianMatrix::new(p).expect("A A† is Hermitian")
        }
        // A A† shifted by a small multiple of the identity.
        1 => {
            let a = ComplexMatrix::from_fn(dim, |_, _| small_complex(rng, 1));
            let p = HermitianMatrix::new(a.mul(&a.adjoint()).expect("square")).expect("A A† is Hermitian");
            p.shift(&small_rational(rng, 2))
        }
        _ => {
            let mut rows = vec![vec![ComplexRational::zero(); dim]; dim];
            for i in 0..dim {
                rows[i][i] = ComplexRational::real(small_rational(rng, range));
                for j in i + 1..dim {
                    let z = small_complex(rng, range);
                    rows[j][i] = z.conj();
                    rows[i][j] = z;
                }
            }
            HermitianMatrix::new(ComplexMatrix::from_rows(rows).expect("square")).expect("built Hermitian")
        }
    }
}

/// A PSD matrix `A A†` with small complex entries.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    let rank = rng.gen_range(1..=dim);
    let a = ComplexMatrix::from_fn(dim, |_, c| if c < rank { small_complex(rng, 3) } else { ComplexRational::zero() });
    HermitianMatrix::new(a.mul(&a.adjoint()).expect("square")).expect("A A† is Hermitian")
}

/// `A A† / tr(A A†)` for a nonzero random `A`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    loop {
        let p = random_psd(rng, dim);
        let t = p.trace();
        if !t.is_zero() {
            return p.scale(&(BigRational::one() / t));
        }
    }
}

/// A point on the rational unit circle, `((1 - t²) + 2t i) / (1 + t²)`.
fn unit_complex<R: Rng + ?Sized>(rng: &mut R) -> ComplexRational {
    let t = rat(rng.gen_range(-6..=6), rng.gen_range(1..=5));
    let d = BigRational::one() + &t * &t;
    ComplexRational::new((BigRational::one() - &t * &t) / &d, (&t + &t) / &d)
}

/// An exactly normalized vector in `Q(i)^dim`, by inverse stereographic
/// projection of a random rational point onto the unit sphere in `R^(2 dim)`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<ComplexRational> {
    let reals = 2 * dim;
    let t: Vec<BigRational> = (0..reals - 1).map(|_| small_rational(rng, 4)).collect();
    let norm: BigRational = t.iter().map(|x| x * x).sum();
    let d = BigRational::one() + &norm;
    let mut coords: Vec<BigRational> = t.iter().map(|x| (x + x) / &d).collect();
    coords.push((&norm - BigRational::one()) / &d);
    coords.chunks(2).map(|c| ComplexRational::new(c[0].clone(), c[1].clone())).collect()
}

/// A unitary built from Givens rotations with rational cosines/sines and
/// rational unit phases; `U†U = I` holds exactly.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::from_fn(dim, |r, c| if r == c { unit_complex(rng) } else { ComplexRational::zero() });
    if dim < 2 {
        return u;
    }
    for _ in 0..dim * 2 {
        let i = rng.gen_range(0..dim);
        let mut j = rng.gen_range(0..dim - 1);
        if j >= i {
            j += 1;
        }
        let cs = unit_complex(rng);
        let phase = unit_complex(rng);
        let (c, s) = (ComplexRational::real(cs.re.clone()), ComplexRational::real(cs.im.clone()));
        let rot = ComplexMatrix::from_fn(dim, |r, col| {
            if (r, col) == (i, i) {
                c.clone()
            } else if (r, col) == (j, j) {
                &c * &phase
            } else if (r, col) == (i, j) {
                -&s
            } else if (r, col) == (j, i) {
                &s * &phase
            } else if r == col {
                ComplexRational::one()
            } else {
                ComplexRational::zero()
            }
        });
        u = u.mul(&rot).expect("square");
    }
    u
}

/// `count` random PSD elements on the first `count` strings, scaled so the
/// sum is at most the identity. Sometimes the sum is exactly `I - D` for a
/// nonzero PSD `D`, sometimes a scalar multiple of the sum's trace bound.
pub fn random_semi_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> OperatorMap {
    let parts: Vec<HermitianMatrix> = (0..count).map(|_| random_psd(rng, dim)).collect();
    let total = HermitianMatrix::sum(dim, parts.iter()).expect("shared dimension");
    let t = total.trace();
    let scale = if t.is_zero() { BigRational::zero() } else { rat(rng.gen_range(1..=4), 4) / t };
    OperatorMap::from_elements(dim, BitString::first(count as u64).into_iter().zip(parts.iter().map(|p| p.scale(&scale))))
        .expect("distinct labels")
}
