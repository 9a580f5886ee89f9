use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-10;

/// Fails with the name of the first column that is (numerically) a linear
/// combination of the columns before it.
pub fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let (n, p) = x.shape();
    if n < p {
        return Err(Error::Invalid(format!("{n} rows cannot identify {p} coefficients")));
    }
    let r = x.clone().qr().r();
    for j in 0..p {
        let norm = x.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm.max(1.0) {
            return Err(Error::Singular(names[j].clone()));
        }
    }
    Ok(())
}

/// Solves `a · v = b` for a symmetric positive definite `a`.
pub(crate) fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().cholesky().map(|c| c.solve(b))
}

pub(crate) fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().cholesky().map(|c| c.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn detects_dependent_column() {
        let x = DMatrix::from_row_slice(4, 3, &[1., 1., 2., 1., 2., 3., 1., 3., 4., 1., 5., 6.]);
        assert!(matches!(check_rank(&x, &names(3)), Err(Error::Singular(c)) if c == "c2"));
        let x = DMatrix::from_row_slice(3, 2, &[1., 0., 1., 0., 1., 0.]);
        assert!(matches!(check_rank(&x, &names(2)), Err(Error::Singular(c)) if c == "c1"));
        let x = DMatrix::from_row_slice(3, 2, &[1., 0., 1., 1., 1., 5.]);
        assert!(check_rank(&x, &names(2)).is_ok());
    }
}
