use faer::prelude::Solve;
use faer::Side;

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Largest matrix handed to the dense general eigensolver.
pub const DENSE_EIG_CAP: usize = 4096;
/// Relative residual bound checked for every eigenpair.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;
/// Eigenvector condition numbers above this mark a decomposition as near-defective.
pub const NEAR_DEFECTIVE_COND: f64 = 1e8;

/// Eigenvalues and right eigenvectors of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors stored as columns.
    pub right_eigenvectors: ComplexMatrix,
    /// 2-norm condition number of the eigenvector matrix.
    pub condition_estimate: f64,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn near_defective(&self) -> bool {
        !(self.condition_estimate <= NEAR_DEFECTIVE_COND)
    }

    /// `V diag(lambda) V^-1`.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let v = &self.right_eigenvectors;
        let n = self.dim();
        let vl = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * self.eigenvalues[j]);
        // Solve X V = V L for X via V^T X^T = (V L)^T.
        let lu = v.transpose().as_faer().partial_piv_lu();
        let xt = lu.solve(vl.transpose().as_faer());
        let x = ComplexMatrix::from_faer(xt).transpose();
        x.check_finite()?;
        Ok(x)
    }

    /// Coefficients `c` with `V c = y`.
    pub fn coefficients(&self, y: &[C64]) -> Result<Vec<C64>> {
        solve_dense(&self.right_eigenvectors, y)
    }
}

/// Real spectrum and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Shape(format!("{what} needs a square matrix, got {}x{}", m.rows(), m.cols())))
    }
}

fn require_dense_cap(m: &ComplexMatrix) -> Result<()> {
    if m.rows() > DENSE_EIG_CAP {
        return Err(Error::Dimension(format!(
            "dense eigensolver limited to dimension {DENSE_EIG_CAP}, got {}",
            m.rows()
        )));
    }
    Ok(())
}

/// Full eigendecomposition with residual and conditioning checks.
pub fn eig_general(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    require_square(m, "eig_general")?;
    require_dense_cap(m)?;
    m.check_finite()?;
    let n = m.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![],
            right_eigenvectors: ComplexMatrix::zeros(0, 0),
            condition_estimate: 1.0,
        });
    }
    let evd = m
        .as_faer()
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge ({e:?}) at dimension {n}")))?;
    let eigenvalues: Vec<C64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    let u = evd.U();
    finish_decomposition(m, eigenvalues, ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}

fn finish_decomposition(m: &ComplexMatrix, eigenvalues: Vec<C64>, mut v: ComplexMatrix) -> Result<EigenDecomposition> {
    let n = m.rows();
    for j in 0..n {
        let norm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Numerical(format!("eigenvector {j} vanished")));
        }
        for i in 0..n {
            v[(i, j)] /= norm;
        }
    }
    v.check_finite()?;

    let a_norm = m.frobenius_norm();
    let av = m * &v;
    let mut worst = 0.0_f64;
    for j in 0..n {
        let r = (0..n).map(|i| (av[(i, j)] - eigenvalues[j] * v[(i, j)]).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    if worst > EIG_RESIDUAL_TOL * a_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "eigenpair residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.0e} x |A| = {:.3e}",
            EIG_RESIDUAL_TOL * a_norm
        )));
    }

    let sv = singular_values(&v)?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition_estimate = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(EigenDecomposition { eigenvalues, right_eigenvectors: v, condition_estimate })
}

/// Eigenvalues only; much cheaper than [`eig_general`] for large matrices.
pub fn eigenvalues_general(m: &ComplexMatrix) -> Result<Vec<C64>> {
    require_square(m, "eigenvalues_general")?;
    require_dense_cap(m)?;
    m.check_finite()?;
    if m.rows() == 0 {
        return Ok(vec![]);
    }
    m.as_faer()
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge ({e:?}) at dimension {}", m.rows())))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    require_square(m, "eig_hermitian")?;
    m.check_finite()?;
    let defect = m.hermiticity_defect();
    let scale = m.frobenius_norm();
    if defect > 1e-10 * scale {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian: |m - m^dag| = {defect:.3e} vs |m| = {scale:.3e}"
        )));
    }
    let n = m.rows();
    let evd = m
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed ({e:?})")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let eigenvalues = order.iter().map(|&k| s[k].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.check_finite()?;
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(vec![]);
    }
    let mut s = m.as_faer().singular_values().map_err(|e| Error::Numerical(format!("SVD failed ({e:?})")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Orthonormal basis of the right kernel: right singular vectors whose
/// singular value is at most `tol * sigma_max`.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<C64>>> {
    require_square(m, "null_space")?;
    m.check_finite()?;
    let n = m.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let svd = m.as_faer().svd().map_err(|e| Error::Numerical(format!("SVD failed ({e:?})")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let smax = (0..n).map(|i| s[i].re).fold(0.0, f64::max);
    Ok((0..n).filter(|&k| s[k].re <= tol * smax).map(|k| (0..n).map(|i| v[(i, k)]).collect()).collect())
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve_dense(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    require_square(a, "solve_dense")?;
    if b.len() != a.rows() {
        return Err(Error::Shape(format!("rhs length {} vs matrix {}", b.len(), a.rows())));
    }
    let rhs = faer::Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = a.as_faer().partial_piv_lu().solve(&rhs);
    let out: Vec<C64> = (0..b.len()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("singular linear system".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut v: Vec<C64>) -> Vec<f64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v.into_iter().map(|z| z.re).collect()
    }

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
        let e = eig_general(&m).unwrap();
        let re = sorted_re(e.eigenvalues.clone());
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((e.condition_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_x_spectrum() {
        let sx = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let re = sorted_re(eig_general(&sx).unwrap().eigenvalues);
        assert!((re[0] + 1.0).abs() < 1e-14 && (re[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_round_trip() {
        let m =
            ComplexMatrix::from_fn(6, 6, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64));
        let e = eig_general(&m).unwrap();
        assert!(e.condition_estimate < 1e6);
        let r = e.reconstruct().unwrap();
        assert!((&r - &m).frobenius_norm() <= 1e-8 * m.frobenius_norm());
    }

    #[test]
    fn jordan_block_is_flagged() {
        let j = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = eig_general(&j).unwrap();
        assert!(e.near_defective());
    }

    #[test]
    fn hermitian_examples() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert_eq!(eig_hermitian(&half).unwrap().eigenvalues, vec![0.5, 0.5]);
        let sz = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert_eq!(eig_hermitian(&sz).unwrap().eigenvalues, vec![-1.0, 1.0]);
        let s = 0.5f64.sqrt();
        let bell = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)];
        let rho = ComplexMatrix::outer(&bell, &bell);
        let ev = eig_hermitian(&rho).unwrap().eigenvalues;
        for (a, b) in ev.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_precondition() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn null_space_examples() {
        assert!(null_space(&ComplexMatrix::identity(3), 1e-12).unwrap().is_empty());
        let m = ComplexMatrix::from_real_diag(&[0.0, -1.0, 0.0]);
        assert_eq!(null_space(&m, 1e-12).unwrap().len(), 2);
    }

    #[test]
    fn shape_errors() {
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eig_general(&r), Err(Error::Shape(_))));
        assert!(matches!(null_space(&r, 1e-9), Err(Error::Shape(_))));
    }
}
