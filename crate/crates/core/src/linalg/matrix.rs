use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::complex::ComplexRational;
use crate::error::{Error, Result};

/// Dense square matrix over complex rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<ComplexRational>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ComplexRational::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ComplexRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ComplexRational>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare { rows: dim, cols: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real rational rows.
    pub fn from_real_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        Self::from_rows(rows.into_iter().map(|r| r.into_iter().map(ComplexRational::real).collect()).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> ComplexRational) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexRational {
        &self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<ComplexRational>> {
        self.data.chunks(self.dim.max(1)).take(self.dim).map(|c| c.to_vec()).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut data = vec![ComplexRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        data[i * n + j] += &(a * b);
                    }
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.scale(k)).collect() }
    }

    pub fn scale_complex(&self, k: &ComplexRational) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> ComplexRational {
        let mut t = ComplexRational::zero();
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_hermitian(&self) -> bool {
        self.first_non_hermitian().is_none()
    }

    fn first_non_hermitian(&self) -> Option<(usize, usize)> {
        for i in 0..self.dim {
            for j in i..self.dim {
                if *self.get(i, j) != self.get(j, i).conj() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Exact check of `U†U = I`.
    pub fn is_unitary(&self) -> bool {
        self.adjoint().mul(self).map(|p| p == Self::identity(self.dim)).unwrap_or(false)
    }

    /// Square submatrix on the given (sorted) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    /// Exact determinant by Gaussian elimination over the complex rationals.
    pub fn determinant(&self) -> ComplexRational {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ComplexRational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return ComplexRational::zero();
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det = &det * &p;
            let p_inv = p.inv().expect("nonzero pivot");
            for r in (col + 1)..n {
                let factor = &a[r * n + col] * &p_inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let delta = &factor * &a[col * n + j];
                    a[r * n + j] -= &delta;
                }
            }
        }
        det
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Returns `(G + G†) / 2`.
pub fn hermitize(g: &ComplexMatrix) -> HermitianMatrix {
    let half = BigRational::new(1.into(), 2.into());
    let h = g.add(&g.adjoint()).expect("same dimension").scale(&half);
    HermitianMatrix(h)
}

/// Returns `AB - BA`.
pub fn commutator(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<ComplexMatrix> {
    a.0.mul(&b.0)?.sub(&b.0.mul(&a.0)?)
}

/// Returns `U† A U` after checking that `U` is exactly unitary.
pub fn conjugate(u: &ComplexMatrix, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    if u.dim() != a.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: u.dim() });
    }
    if !u.is_unitary() {
        return Err(Error::NotUnitary);
    }
    let c = u.adjoint().mul(&a.0)?.mul(u)?;
    Ok(HermitianMatrix(c))
}

/// Square matrix known to satisfy `A = A†`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if let Some((row, col)) = m.first_non_hermitian() {
            return Err(Error::NotHermitian { row, col });
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn scalar(dim: usize, k: &BigRational) -> Self {
        Self(ComplexMatrix::identity(dim).scale(k))
    }

    pub fn diag(values: &[BigRational]) -> Self {
        let n = values.len();
        Self(ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                ComplexRational::real(values[i].clone())
            } else {
                ComplexRational::zero()
            }
        }))
    }

    pub fn from_real_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexRational {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Diagonal entries, which are real.
    pub fn diagonal(&self) -> Vec<BigRational> {
        (0..self.dim()).map(|i| self.get(i, i).re.clone()).collect()
    }

    /// The trace of a Hermitian matrix is real.
    pub fn trace(&self) -> BigRational {
        self.0.trace().re
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self(self.0.scale(k))
    }

    /// `A - k I`.
    pub fn shift(&self, k: &BigRational) -> Self {
        let n = self.dim();
        Self(ComplexMatrix::from_fn(n, |i, j| {
            let z = self.get(i, j).clone();
            if i == j {
                ComplexRational::new(&z.re - k, z.im)
            } else {
                z
            }
        }))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `tr(self * other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> Result<BigRational> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        let n = self.dim();
        let mut t = ComplexRational::zero();
        for i in 0..n {
            for k in 0..n {
                t += &(self.get(i, k) * other.get(k, i));
            }
        }
        debug_assert!(t.is_real());
        Ok(t.re)
    }

    pub fn sum<'a>(dim: usize, items: impl IntoIterator<Item = &'a HermitianMatrix>) -> Result<Self> {
        items.into_iter().try_fold(Self::zeros(dim), |acc, m| acc.add(m))
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    dim: usize,
    entries: Vec<Vec<ComplexRational>>,
}

impl MatrixWire {
    fn into_matrix(self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: self.entries.len() });
        }
        ComplexMatrix::from_rows(self.entries)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire { dim: self.dim, entries: self.rows() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        MatrixWire::deserialize(deserializer)?.into_matrix().map_err(serde::de::Error::custom)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        HermitianMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
