use super::density::{DensityMatrix, StateSlack};
use super::evolve::reachable_sector;
use crate::error::{Error, Result};
use crate::linalg::{null_space, solve_dense, ComplexMatrix, ShiftedLu, SparseMatrix, C64};
use crate::models::Superoperator;

/// Largest (sector-reduced) generator handled by dense kernel computations.
pub const STEADY_DENSE_LIMIT: usize = 2048;
/// Singular values below this fraction of the largest span the kernel.
pub const KERNEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    pub state: DensityMatrix,
    pub kernel_dim: usize,
    /// Size of the invariant subspace the computation was restricted to.
    pub sector_dim: usize,
    /// `|L vec(rho_ss)| / |L|_F`.
    pub residual: f64,
}

/// Long-time limit of the dynamics. With a unique stationary state `rho0` is
/// not needed; with a degenerate kernel `rho0` is projected onto it.
pub fn steady_state(sup: &Superoperator, rho0: Option<&DensityMatrix>) -> Result<DensityMatrix> {
    Ok(steady_state_report(sup, rho0)?.state)
}

pub fn steady_state_report(sup: &Superoperator, rho0: Option<&DensityMatrix>) -> Result<SteadyStateReport> {
    let d = sup.hilbert_dim();
    if let Some(r) = rho0 {
        if r.dim() != d {
            return Err(Error::Shape(format!("state dimension {} vs generator dimension {d}", r.dim())));
        }
    }
    let l = sup.to_sparse();
    let full = sup.dim();
    let idx: Vec<usize> = match rho0 {
        Some(r) => reachable_sector(&l, r),
        None => (0..full).collect(),
    };
    let lr = if idx.len() == full { l.clone() } else { l.restrict(&idx)? };
    let y0: Option<Vec<C64>> = rho0.map(|r| {
        let v = r.vec();
        idx.iter().map(|&k| v[k]).collect()
    });

    let (x, kernel_dim) = if idx.len() <= STEADY_DENSE_LIMIT {
        dense_kernel_solution(&lr, y0.as_deref())?
    } else {
        (sparse_unique_solution(&lr, &idx, d)?, 1)
    };

    let mut v = vec![C64::new(0.0, 0.0); full];
    for (&k, &val) in idx.iter().zip(&x) {
        v[k] = val;
    }
    let mut m = ComplexMatrix::unvec(d, &v)?;
    if rho0.is_none() || kernel_dim == 1 {
        let tr = m.trace();
        if tr.norm() < 1e-300 {
            return Err(Error::Numerical("kernel element has zero trace".into()));
        }
        m = m.scale(C64::new(1.0, 0.0) / tr);
    }
    let space = match rho0 {
        Some(r) => r.space(),
        None => infer_space(d)?,
    };
    let residual = {
        let lv = l.mul_vec(&m.vec());
        lv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / l.frobenius_norm().max(f64::MIN_POSITIVE)
    };
    let state = DensityMatrix::with_slack(m, space, &StateSlack::INTEGRATION)
        .map_err(|e| Error::Numerical(format!("steady state is not a valid density matrix: {e}")))?;
    Ok(SteadyStateReport { state, kernel_dim, sector_dim: idx.len(), residual })
}

fn infer_space(d: usize) -> Result<super::density::StateSpace> {
    use crate::operators::{SystemSpace, ATOM_DIM};
    if d % ATOM_DIM != 0 {
        return Err(Error::Shape(format!("dimension {d} is not a two-atom space")));
    }
    Ok(super::density::StateSpace::System(SystemSpace::new(d / ATOM_DIM)?))
}

/// Kernel from SVD; projection `R (Lh† R)^-1 Lh† y0` when it is degenerate.
fn dense_kernel_solution(l: &SparseMatrix, y0: Option<&[C64]>) -> Result<(Vec<C64>, usize)> {
    let ld = l.to_dense();
    let right = null_space(&ld, KERNEL_TOL)?;
    let left = null_space(&ld.adjoint(), KERNEL_TOL)?;
    let k = right.len();
    if k == 0 {
        return Err(Error::Numerical("generator has no kernel; not trace preserving?".into()));
    }
    if left.len() != k {
        return Err(Error::Numerical(format!("left and right kernels differ in dimension ({} vs {k})", left.len())));
    }
    if k == 1 {
        return Ok((right[0].clone(), 1));
    }
    let y0 = y0.ok_or_else(|| {
        Error::Ambiguity(format!("stationary states form a {k}-dimensional family; supply an initial state"))
    })?;
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let g = ComplexMatrix::from_fn(k, k, |i, j| dot(&left[i], &right[j]));
    let b: Vec<C64> = left.iter().map(|w| dot(w, y0)).collect();
    let c = solve_dense(&g, &b)?;
    let n = y0.len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    for (cj, rj) in c.iter().zip(&right) {
        for (xi, ri) in x.iter_mut().zip(rj) {
            *xi += cj * ri;
        }
    }
    Ok((x, k))
}

/// Unique kernel element of a large generator: one equation of `L x = 0` is
/// replaced by the trace condition and the system solved by sparse LU.
fn sparse_unique_solution(l: &SparseMatrix, idx: &[usize], d: usize) -> Result<Vec<C64>> {
    let m = l.rows();
    let diag_rows: Vec<usize> = idx.iter().enumerate().filter(|(_, k)| *k % (d + 1) == 0).map(|(p, _)| p).collect();
    let Some(&replace) = diag_rows.first() else {
        return Err(Error::Numerical("sector contains no populations".into()));
    };
    let trips = l
        .triplets()
        .filter(|&(i, _, _)| i != replace)
        .chain(diag_rows.iter().map(|&p| (replace, p, C64::new(1.0, 0.0))));
    let a = SparseMatrix::from_triplets(m, m, trips)?;
    let lu = ShiftedLu::new(&a, C64::new(0.0, 0.0))?;
    let mut x = vec![C64::new(0.0, 0.0); m];
    x[replace] = C64::new(1.0, 0.0);
    lu.solve_in_place(&mut x).map_err(|_| {
        Error::Ambiguity(
            "bordered system is singular; the kernel is probably degenerate, supply an initial state".into(),
        )
    })?;
    Ok(x)
}
