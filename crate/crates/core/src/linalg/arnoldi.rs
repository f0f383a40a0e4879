//! Shift-invert Arnoldi for eigenvalues of a sparse matrix near a target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eig::eig_general;
use super::sparse::{ShiftedLu, SparseMatrix};
use super::{ComplexMatrix, LinearOperator, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ShiftInvertOptions {
    /// Number of eigenvalues nearest to `shift` that must converge.
    pub count: usize,
    pub shift: C64,
    /// Relative Ritz residual required in the inverted spectrum.
    pub tol: f64,
    /// Hard limit on the Krylov basis size.
    pub max_basis: usize,
    pub seed: u64,
    pub want_vectors: bool,
}

impl Default for ShiftInvertOptions {
    fn default() -> Self {
        Self { count: 10, shift: C64::new(0.0, 0.0), tol: 1e-10, max_basis: 800, seed: 0x5eed, want_vectors: false }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    /// Unit-norm right eigenvector, when requested.
    pub vector: Option<Vec<C64>>,
    /// `|A x - value x|` for the returned vector, when available.
    pub residual: Option<f64>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

struct Krylov {
    basis: Vec<Vec<C64>>,
    // h[j] holds column j of the Hessenberg matrix (length j + 2)
    h: Vec<Vec<C64>>,
}

impl Krylov {
    /// Orthogonalizes `w` against the basis twice (classical Gram-Schmidt with
    /// reorthogonalization); returns the coefficients and the remaining norm.
    fn orthogonalize(&self, w: &mut [C64]) -> (Vec<C64>, f64) {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.basis.len()];
        for _ in 0..2 {
            let proj: Vec<C64> = self.basis.iter().map(|v| dot(v, w)).collect();
            for (v, p) in self.basis.iter().zip(&proj) {
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= p * vi;
                }
            }
            for (c, p) in coeffs.iter_mut().zip(proj) {
                *c += p;
            }
        }
        (coeffs, norm(w))
    }
}

/// Eigenvalues of `a` closest to `opts.shift`, sorted by distance to it.
///
/// A single Krylov sequence sees one copy of each semisimple eigenvalue, so
/// repeated eigenvalues may be reported with lower multiplicity.
pub fn eigs_near(a: &SparseMatrix, opts: &ShiftInvertOptions) -> Result<Vec<EigenPair>> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Shape("eigs_near needs a square matrix".into()));
    }
    if opts.count == 0 || n == 0 {
        return Ok(vec![]);
    }
    let k = opts.count.min(n);
    let lu = ShiftedLu::new(a, opts.shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_unit = |kr: &Krylov| -> Result<Vec<C64>> {
        for _ in 0..8 {
            let mut v: Vec<C64> =
                (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let (_, nv) = kr.orthogonalize(&mut v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|z| *z /= nv);
                return Ok(v);
            }
        }
        Err(Error::Numerical("could not extend the Krylov basis".into()))
    };

    let cap = opts.max_basis.min(n).max(k);
    let mut target = (2 * k + 20).max(40).min(cap);
    let mut kr = Krylov { basis: Vec::new(), h: Vec::new() };
    let first = random_unit(&kr)?;
    kr.basis.push(first);
    loop {
        while kr.h.len() < target {
            let j = kr.h.len();
            let mut w = kr.basis[j].clone();
            lu.solve_in_place(&mut w)?;
            let (mut col, beta) = kr.orthogonalize(&mut w);
            let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max).max(beta);
            if kr.basis.len() == n {
                col.push(C64::new(0.0, 0.0));
                kr.h.push(col);
                break;
            }
            if beta <= 1e-12 * scale {
                // invariant subspace found: restart in the orthogonal complement
                col.push(C64::new(0.0, 0.0));
                kr.h.push(col);
                let v = random_unit(&kr)?;
                kr.basis.push(v);
            } else {
                col.push(C64::new(beta, 0.0));
                kr.h.push(col);
                w.iter_mut().for_each(|z| *z /= beta);
                kr.basis.push(w);
            }
        }
        let m = kr.h.len();
        let hm = ComplexMatrix::from_fn(m, m, |i, j| kr.h[j].get(i).copied().unwrap_or(C64::new(0.0, 0.0)));
        let beta_last = kr.h[m - 1].get(m).copied().unwrap_or(C64::new(0.0, 0.0)).norm();
        let evd = eig_general(&hm)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&p, &q| evd.eigenvalues[q].norm().total_cmp(&evd.eigenvalues[p].norm()));
        let theta_max = evd.eigenvalues[order[0]].norm();
        let converged = order.iter().take(k).all(|&i| {
            let y_last = evd.right_eigenvectors[(m - 1, i)].norm();
            beta_last * y_last <= opts.tol * theta_max.max(evd.eigenvalues[i].norm())
        });
        if converged || m >= cap {
            if !converged {
                log::warn!("shift-invert Arnoldi hit the basis cap {cap} before all {k} Ritz values converged");
            }
            let mut out = Vec::with_capacity(k);
            for &i in order.iter().take(k) {
                let theta = evd.eigenvalues[i];
                if theta.norm() == 0.0 {
                    return Err(Error::Numerical("zero Ritz value in shift-invert iteration".into()));
                }
                let value = opts.shift + C64::new(1.0, 0.0) / theta;
                let (vector, residual) = if opts.want_vectors {
                    let mut x = vec![C64::new(0.0, 0.0); n];
                    for (r, v) in kr.basis.iter().take(m).enumerate() {
                        let y = evd.right_eigenvectors[(r, i)];
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi += y * vi;
                        }
                    }
                    let nx = norm(&x);
                    x.iter_mut().for_each(|z| *z /= nx);
                    let ax = a.mul_vec(&x);
                    let res = norm(&ax.iter().zip(&x).map(|(p, q)| p - value * q).collect::<Vec<_>>());
                    (Some(x), Some(res))
                } else {
                    (None, None)
                };
                out.push(EigenPair { value, vector, residual });
            }
            return Ok(out);
        }
        target = (2 * m).min(cap);
    }
}

/// Checks `|A x - lambda x|` for an eigenpair against any linear operator.
pub fn eigen_residual(op: &dyn LinearOperator, value: C64, x: &[C64]) -> f64 {
    let mut y = vec![C64::new(0.0, 0.0); op.dim()];
    op.apply(x, &mut y);
    norm(&y.iter().zip(x).map(|(p, q)| p - value * q).collect::<Vec<_>>())
}
