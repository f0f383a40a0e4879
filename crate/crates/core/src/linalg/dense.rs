use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::{Mat, MatRef};

use super::C64;
use crate::error::{Error, Result};

/// Largest allowed size of either axis produced by [`kron`].
pub const KRON_AXIS_LIMIT: usize = 1_000_000;

/// Dense complex matrix.
///
/// Thin wrapper over a `faer` matrix so the rest of the crate never touches the
/// backend directly.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: Mat::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { inner: Mat::from_fn(rows, cols, f) }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Shape("ragged row lengths".into()));
        }
        let m = Self::from_fn(n_rows, n_cols, |i, j| rows[i][j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Rebuilds a square matrix from a column-stacked vector.
    pub fn unvec(n: usize, v: &[C64]) -> Result<Self> {
        if v.len() != n * n {
            return Err(Error::Shape(format!("vector of length {} is not {n}x{n}", v.len())));
        }
        Ok(Self::from_fn(n, n, |i, j| v[j * n + i]))
    }

    pub fn from_faer(inner: Mat<C64>) -> Self {
        Self { inner }
    }

    pub fn as_faer(&self) -> MatRef<'_, C64> {
        self.inner.as_ref()
    }

    pub fn into_faer(self) -> Mat<C64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows()).map(|i| self[(i, j)]).collect()
    }

    /// Column-stacked copy of the entries.
    pub fn vec(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose().to_owned() }
    }

    pub fn conj(&self) -> Self {
        Self { inner: self.inner.conjugate().to_owned() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| s * self[(i, j)])
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows().min(self.cols())).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0_f64;
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                m = m.max(self[(i, j)].norm());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..self.cols()).all(|j| {
            (0..self.rows()).all(|i| {
                let z = self[(i, j)];
                z.re.is_finite() && z.im.is_finite()
            })
        })
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Numerical("matrix contains NaN or infinite entries".into()))
        }
    }

    /// Frobenius norm of `self - self^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= rel_tol * self.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    pub fn mat_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols(), "mat_vec dimension mismatch");
        let mut y = vec![C64::new(0.0, 0.0); self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.inner.col(j);
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += col[i] * xj;
            }
        }
        y
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self { inner: &self.inner * &rhs.inner })
    }

    /// Square matrix power by repeated multiplication.
    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::identity(self.rows());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Commutator `[self, rhs]`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &(self * rhs) - &(rhs * self)
    }

    /// Entries with magnitude above `drop_tol`, as `(row, col, value)`.
    pub fn nonzeros(&self, drop_tol: f64) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                let z = self[(i, j)];
                if z.norm() > drop_tol {
                    out.push((i, j, z));
                }
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= KRON_AXIS_LIMIT && c <= KRON_AXIS_LIMIT => {
            let (br, bc) = (b.rows(), b.cols());
            Ok(ComplexMatrix::from_fn(r, c, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)]))
        }
        _ => Err(Error::Dimension(format!(
            "kron of {}x{} and {}x{} exceeds {} per axis",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            KRON_AXIS_LIMIT
        ))),
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.inner[(i, j)]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.inner[(i, j)]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()), "add shape mismatch");
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()), "sub shape mismatch");
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "mul shape mismatch");
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let sz = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let k = kron(&sz, &i2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| k[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn kron_block_layout() {
        // a on a 3-level space, index (n, atom) = n*2 + atom
        let a = ComplexMatrix::from_fn(3, 3, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) });
        let k = kron(&a, &ComplexMatrix::identity(2)).unwrap();
        let mut e = vec![c(0.0); 6];
        e[4] = c(1.0); // |2> ⊗ |0>
        let out = k.mat_vec(&e);
        assert!((out[2] - c(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn kron_rejects_huge_axes() {
        let big = ComplexMatrix::zeros(1001, 1);
        let err = kron(&big, &big).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn vec_roundtrip_is_column_major() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let v = m.vec();
        assert_eq!(v, vec![c(1.0), c(3.0), c(2.0), c(4.0)]);
        assert_eq!(ComplexMatrix::unvec(2, &v).unwrap(), m);
    }

    #[test]
    fn from_rows_rejects_nan() {
        assert!(ComplexMatrix::from_real_rows(&[vec![f64::NAN]]).is_err());
        assert!(ComplexMatrix::from_real_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
