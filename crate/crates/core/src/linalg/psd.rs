//! Positive semi-definiteness and the Löwner order, decided exactly from
//! principal minors.

use num_traits::{Signed, Zero};

use super::matrix::HermitianMatrix;
use crate::error::{Error, Result};

/// Determinants of every principal submatrix, indexed by the bitmask of the
/// retained rows. Entry 0 (the empty minor) is unused.
fn principal_minor_signs(a: &HermitianMatrix) -> impl Iterator<Item = (u32, std::cmp::Ordering)> + '_ {
    let n = a.dim();
    (1u32..(1u32 << n)).map(move |mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let det = a.as_matrix().principal_submatrix(&idx).determinant();
        debug_assert!(det.is_real(), "principal minor of a Hermitian matrix is real");
        let sign = if det.re.is_zero() {
            std::cmp::Ordering::Equal
        } else if det.re.is_positive() {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Less
        };
        (mask, sign)
    })
}

/// True iff all `2^N - 1` principal minors are non-negative.
pub fn is_psd(a: &HermitianMatrix) -> bool {
    // Diagonal entries are the 1x1 minors; reject cheaply first.
    if a.diagonal().iter().any(Signed::is_negative) {
        return false;
    }
    principal_minor_signs(a).all(|(_, s)| s != std::cmp::Ordering::Less)
}

/// Strict positivity via Sylvester's criterion on the leading minors.
pub fn is_positive_definite(a: &HermitianMatrix) -> bool {
    let n = a.dim();
    (1..=n).all(|k| {
        let idx: Vec<usize> = (0..k).collect();
        let det = a.as_matrix().principal_submatrix(&idx).determinant();
        det.re.is_positive()
    })
}

/// `A ⩽ B` in the Löwner order.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: b.dim() });
    }
    Ok(is_psd(&b.sub(a)?))
}

#[cfg(test)]
mod tests {
    use super::super::complex::{rat, ComplexRational};
    use super::super::matrix::ComplexMatrix;
    use super::*;

    fn sym(rows: &[&[i64]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&HermitianMatrix::diag(&[rat(1, 1), rat(2, 1)])));
        assert!(!is_psd(&sym(&[&[0, 1], &[1, 0]])));
        let m = HermitianMatrix::new(
            ComplexMatrix::from_rows(vec![
                vec![ComplexRational::from_ints(2, 0), ComplexRational::from_ints(1, -1)],
                vec![ComplexRational::from_ints(1, 1), ComplexRational::from_ints(2, 0)],
            ])
            .unwrap(),
        )
        .unwrap();
        assert!(is_psd(&m));
    }

    #[test]
    fn leading_minors_alone_are_not_enough() {
        // Leading minors 0, 0 but the (2,2) entry is negative.
        let m = sym(&[&[0, 0], &[0, -1]]);
        assert!(!is_psd(&m));
        // All leading minors of this 3x3 are zero; the trailing 2x2 is indefinite.
        let m = sym(&[&[0, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        assert!(!is_psd(&m));
    }

    #[test]
    fn loewner_examples() {
        assert!(loewner_leq(&HermitianMatrix::zeros(2), &HermitianMatrix::identity(2)).unwrap());
        assert!(loewner_leq(
            &HermitianMatrix::diag(&[rat(1, 1), rat(2, 1)]),
            &HermitianMatrix::diag(&[rat(2, 1), rat(2, 1)])
        )
        .unwrap());
        assert!(!loewner_leq(&sym(&[&[1, 2], &[2, 1]]), &HermitianMatrix::identity(2)).unwrap());
        assert!(loewner_leq(&HermitianMatrix::identity(2), &HermitianMatrix::identity(3)).is_err());
    }

    #[test]
    fn positive_definite_is_strict() {
        assert!(is_positive_definite(&HermitianMatrix::identity(3)));
        assert!(!is_positive_definite(&HermitianMatrix::diag(&[rat(1, 1), rat(0, 1)])));
    }
}
