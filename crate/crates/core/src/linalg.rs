//! Small dense-matrix helpers shared by the information-matrix code.

use nalgebra::DMatrix;

/// Reciprocal condition number threshold below which a matrix is treated as
/// singular.
pub const RCOND_SINGULAR: f64 = 1e-12;

/// Inverse via Cholesky when symmetric positive definite, LU otherwise.
/// Returns `None` when the matrix is singular by the rcond threshold.
pub fn robust_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() != m.ncols() || m.is_empty() {
        return None;
    }
    if rcond(m) < RCOND_SINGULAR {
        return None;
    }
    if is_symmetric(m) {
        if let Some(chol) = nalgebra::Cholesky::new(m.clone()) {
            return Some(chol.inverse());
        }
    }
    m.clone().lu().try_inverse()
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    (m - m.transpose()).amax() <= 1e-8 * (1.0 + m.amax())
}

/// Reciprocal condition number from singular values.
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if max <= 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Spectral radius (largest eigenvalue magnitude) of a general square matrix.
///
/// Numerically triangular matrices short-circuit to the diagonal: the
/// upstream Schur iteration does not terminate on exactly triangular inputs
/// such as the zero rate matrix of a supervised problem.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let tiny = 1e-14 * scale;
    let lower_clear = (1..m.nrows()).all(|r| (0..r).all(|c| m[(r, c)].abs() <= tiny));
    let upper_clear = (0..m.nrows()).all(|r| (r + 1..m.ncols()).all(|c| m[(r, c)].abs() <= tiny));
    if lower_clear || upper_clear {
        return m.diagonal().amax();
    }
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max)
}

/// Spectral radius of `a^{-1} b` for symmetric positive definite `a` and
/// symmetric `b`, through the similar symmetric matrix `L^{-1} b L^{-T}`
/// (`a = L L^T`). Returns `None` when `a` has no Cholesky factor.
pub fn pencil_spectral_radius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    if a.is_empty() {
        return Some(0.0);
    }
    let chol = nalgebra::Cholesky::new(a.clone())?;
    let l = chol.l();
    // solve L x = b, then L y^T = x^T
    let x = l.solve_lower_triangular(b)?;
    let y = l.solve_lower_triangular(&x.transpose())?;
    let sym = (&y + y.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    Some(eig.eigenvalues.amax())
}
