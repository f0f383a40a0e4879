use std::collections::HashMap;

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{eig_general, solve_dense, ComplexMatrix, EigenDecomposition, SparseMatrix, C64};

/// Structural defects of the real generator (imaginary leakage, trace row)
/// above this fraction of `|L|_F` mean the generator is not a valid
/// Hermiticity- and trace-preserving map.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Modes with `|mu| <= STATIONARY_TOL |A|_F` are treated as exactly stationary.
pub const STATIONARY_TOL: f64 = 1e-12;

/// Spectral propagator in a real orthonormal basis of Hermitian matrices.
///
/// The first coordinate is the trace and is exactly conserved; the rest obey
/// `y' = A y + b x0` and are propagated through the eigenvectors of `A`. Reconstructed states are real combinations of Hermitian basis
/// matrices, so they are exactly Hermitian with exactly conserved trace at
/// every time.
#[derive(Debug, Clone)]
pub struct HermitianPropagator {
    /// Sparse basis vectors over sector positions.
    basis: Vec<Vec<(usize, C64)>>,
    sector_dim: usize,
    has_trace: bool,
    b: Vec<f64>,
    decomp: EigenDecomposition,
    stationary: Vec<bool>,
}

fn phi(mu: C64, t: f64) -> C64 {
    // (e^{mu t} - 1) / mu without cancellation for small |mu t|
    let z = mu * t;
    if z.norm() < 1e-3 {
        let mut term = C64::new(t, 0.0);
        let mut sum = term;
        for k in 2..8 {
            term *= z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / mu
    }
}

impl HermitianPropagator {
    /// Builds the propagator for the generator `l` restricted to the vectorized
    /// positions `idx` of a `d x d` matrix. Returns `None` when the sector is not
    /// closed under transposition or `l` does not preserve Hermiticity and trace.
    pub fn new(l: &SparseMatrix, idx: &[usize], d: usize) -> Result<Option<Self>> {
        let n = idx.len();
        if l.rows() != n || l.cols() != n {
            return Err(Error::Shape("generator does not match the sector".into()));
        }
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(p, &k)| (k, p)).collect();
        let mut diag = Vec::new();
        let mut pairs = Vec::new();
        for (p, &k) in idx.iter().enumerate() {
            let (i, j) = (k % d, k / d);
            if i == j {
                diag.push(p);
            } else if i < j {
                match pos.get(&(i * d + j)) {
                    Some(&q) => pairs.push((p, q)),
                    None => return Ok(None),
                }
            } else if !pos.contains_key(&(i * d + j)) {
                return Ok(None);
            }
        }

        let mut basis: Vec<Vec<(usize, C64)>> = Vec::with_capacity(n);
        let nd = diag.len();
        if nd > 0 {
            let w = 1.0 / (nd as f64).sqrt();
            basis.push(diag.iter().map(|&p| (p, C64::new(w, 0.0))).collect());
            for k in 1..nd {
                let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
                let mut col: Vec<(usize, C64)> = diag[..k].iter().map(|&p| (p, C64::new(s, 0.0))).collect();
                col.push((diag[k], C64::new(-(k as f64) * s, 0.0)));
                basis.push(col);
            }
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for &(p, q) in &pairs {
            basis.push(vec![(p, C64::new(r, 0.0)), (q, C64::new(r, 0.0))]);
            basis.push(vec![(p, C64::new(0.0, r)), (q, C64::new(0.0, -r))]);
        }

        let norm = l.frobenius_norm().max(f64::MIN_POSITIVE);
        let mut lr = Mat::<f64>::zeros(n, n);
        let mut dense = vec![C64::new(0.0, 0.0); n];
        for (c, col) in basis.iter().enumerate() {
            for &(p, v) in col {
                dense[p] = v;
            }
            let y = l.mul_vec(&dense);
            for &(p, _) in col {
                dense[p] = C64::new(0.0, 0.0);
            }
            for (row, b) in basis.iter().enumerate() {
                let z: C64 = b.iter().map(|&(p, v)| v.conj() * y[p]).sum();
                if z.im.abs() > STRUCTURE_TOL * norm {
                    return Ok(None);
                }
                lr[(row, c)] = z.re;
            }
        }

        let has_trace = nd > 0;
        let off = usize::from(has_trace);
        if has_trace && (0..n).any(|c| lr[(0, c)].abs() > STRUCTURE_TOL * norm) {
            return Ok(None);
        }
        let m = n - off;
        let a = Mat::<f64>::from_fn(m, m, |i, j| lr[(i + off, j + off)]);
        let b: Vec<f64> = if has_trace { (0..m).map(|i| lr[(i + 1, 0)]).collect() } else { vec![0.0; m] };
        let decomp = eig_general(&ComplexMatrix::from_fn(m, m, |i, j| C64::new(a[(i, j)], 0.0)))?;
        let a_norm =
            (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum::<f64>().sqrt();
        let stationary = decomp.eigenvalues.iter().map(|mu| mu.norm() <= STATIONARY_TOL * a_norm).collect();
        Ok(Some(Self { basis, sector_dim: n, has_trace, b, decomp, stationary }))
    }

    pub fn condition_estimate(&self) -> f64 {
        self.decomp.condition_estimate
    }

    pub fn near_defective(&self) -> bool {
        self.decomp.near_defective()
    }

    /// Eigenvalues of the traceless block.
    pub fn eigenvalues(&self) -> &[C64] {
        &self.decomp.eigenvalues
    }

    fn coordinates(&self, z: &[C64]) -> Vec<f64> {
        self.basis.iter().map(|b| b.iter().map(|&(p, v)| (v.conj() * z[p]).re).sum()).collect()
    }

    fn assemble(&self, x: &[f64]) -> Vec<C64> {
        let mut z = vec![C64::new(0.0, 0.0); self.sector_dim];
        for (b, &xk) in self.basis.iter().zip(x) {
            for &(p, v) in b {
                z[p] += v * xk;
            }
        }
        z
    }

    /// Sector vectors at each time of `t_grid`, starting from the Hermitian sector vector `y0`.
    pub fn propagate(&self, y0: &[C64], t_grid: &[f64]) -> Result<Vec<Vec<C64>>> {
        if y0.len() != self.sector_dim {
            return Err(Error::Shape("initial vector does not match the sector".into()));
        }
        if self.near_defective() {
            return Err(Error::Precondition(format!(
                "eigenvector condition {:.3e} marks the generator as near-defective; use evolve_ode",
                self.decomp.condition_estimate
            )));
        }
        let x = self.coordinates(y0);
        let off = usize::from(self.has_trace);
        let x0 = if self.has_trace { x[0] } else { 0.0 };
        let rest: Vec<C64> = x[off..].iter().map(|&v| C64::new(v, 0.0)).collect();
        let drive: Vec<C64> = self.b.iter().map(|&v| C64::new(v * x0, 0.0)).collect();
        let gamma = solve_dense(&self.decomp.right_eigenvectors, &rest)?;
        let beta = solve_dense(&self.decomp.right_eigenvectors, &drive)?;
        let drive_norm = drive.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = self.decomp.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-8 * drive_norm + STRUCTURE_TOL * scale * x0.abs();
        for (k, &s) in self.stationary.iter().enumerate() {
            if s && beta[k].norm() > tol {
                return Err(Error::Numerical(format!(
                    "stationary mode {k} is driven ({:.3e}); the generator has no bounded solution",
                    beta[k].norm()
                )));
            }
        }
        let v = &self.decomp.right_eigenvectors;
        let m = self.decomp.dim();
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let w: Vec<C64> = (0..m)
                .map(|k| {
                    let mu = self.decomp.eigenvalues[k];
                    if self.stationary[k] {
                        gamma[k]
                    } else {
                        gamma[k] * (mu * t).exp() + beta[k] * phi(mu, t)
                    }
                })
                .collect();
            let mut xt = vec![0.0; self.sector_dim];
            if self.has_trace {
                xt[0] = x0;
            }
            for (i, xi) in xt[off..].iter_mut().enumerate() {
                *xi = (0..m).map(|k| v[(i, k)] * w[k]).sum::<C64>().re;
            }
            out.push(self.assemble(&xt));
        }
        Ok(out)
    }
}
