use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue floor that keeps the projection invertible.
const JITTER: f64 = 1e-8;

/// Nearest symmetric positive definite matrix in Frobenius norm.
///
/// Symmetrizes, then clips the eigenvalues from below at `1e-8 · λ_max`
/// (or `1e-8` when no eigenvalue is positive).
pub fn nearest_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Input(format!("matrix is {}×{}, expected square", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let floor = if max > 0.0 { JITTER * max } else { JITTER };
    let clipped = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| l.max(floor)));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    #[test]
    fn fixed_point_on_spd_input() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let r = nearest_spd(&a).unwrap();
        assert!(max_abs(&(r - a)) < 1e-8);
    }

    #[test]
    fn clips_negative_eigenvalue() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let r = nearest_spd(&a).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-8]);
        assert!(max_abs(&(&r - want)) < 1e-12);
        assert!(r.clone().cholesky().is_some());
    }

    #[test]
    fn symmetrizes_then_clips() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        let r = nearest_spd(&a).unwrap();
        // eigenpairs of [[0,1],[1,0]]: +1 on (1,1)/√2, -1 → 1e-8 on (1,-1)/√2
        let j = 0.5e-8;
        let want = DMatrix::from_row_slice(2, 2, &[0.5 + j, 0.5 - j, 0.5 - j, 0.5 + j]);
        assert!(max_abs(&(&r - want)) < 1e-12);
        assert!(r.cholesky().is_some());
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(nearest_spd(&DMatrix::zeros(2, 3)), Err(Error::Input(_))));
    }

    #[test]
    fn negative_definite_input_still_positive() {
        let a = DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -1.0]);
        let r = nearest_spd(&a).unwrap();
        assert!(r.cholesky().is_some());
    }
}
