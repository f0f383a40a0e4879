use super::density::{DensityMatrix, StateSlack, StateSpace, Trajectory};
use super::propagator::HermitianPropagator;
use crate::error::{Error, Result};
use crate::linalg::{eig_general, integrate_ode, ComplexMatrix, EigenDecomposition, OdeOptions, SparseMatrix, C64};
use crate::models::Superoperator;

fn check_dims(sup: &Superoperator, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != sup.hilbert_dim() {
        return Err(Error::Shape(format!(
            "state dimension {} does not match generator dimension {}",
            rho0.dim(),
            sup.hilbert_dim()
        )));
    }
    Ok(())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::Argument("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Argument("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Rebuilds and validates a state; invariant breaches are accuracy failures,
/// never silently repaired.
fn to_state(v: &[C64], space: StateSpace, t: f64) -> Result<DensityMatrix> {
    let m = ComplexMatrix::unvec(space.dim(), v)?;
    DensityMatrix::with_slack(m, space, &StateSlack::INTEGRATION).map_err(|e| match e {
        Error::StateValidity(msg) => Error::IntegrationAccuracy(format!(
            "state left the density-matrix set at t = {t:.6e} ({msg}); tighten rtol/atol"
        )),
        other => other,
    })
}

/// Adaptive Runge-Kutta evolution of `rho0` under `sup`.
pub fn evolve_ode(sup: &Superoperator, rho0: &DensityMatrix, t_grid: &[f64], opts: &OdeOptions) -> Result<Trajectory> {
    check_dims(sup, rho0)?;
    check_grid(t_grid)?;
    let ys = integrate_ode(sup, &rho0.vec(), t_grid, opts)?;
    let states = ys.iter().zip(t_grid).map(|(y, &t)| to_state(y, rho0.space(), t)).collect::<Result<_>>()?;
    Ok(Trajectory { times: t_grid.to_vec(), states, model: sup.label().to_string() })
}

fn spectral_vectors(decomp: &EigenDecomposition, y0: &[C64], t_grid: &[f64]) -> Result<Vec<Vec<C64>>> {
    if decomp.near_defective() {
        return Err(Error::Precondition(format!(
            "eigenvector condition {:.3e} marks the generator as near-defective; use evolve_ode",
            decomp.condition_estimate
        )));
    }
    let c = decomp.coefficients(y0)?;
    let v = &decomp.right_eigenvectors;
    let n = y0.len();
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let w: Vec<C64> = c.iter().zip(&decomp.eigenvalues).map(|(ck, lk)| ck * (lk * t).exp()).collect();
        let mut y = vec![C64::new(0.0, 0.0); n];
        for (k, wk) in w.iter().enumerate() {
            if *wk == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += v[(i, k)] * wk;
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Evolution through the eigendecomposition `rho(t) = Σ c_k e^{λ_k t} v_k`.
pub fn evolve_spectral(decomp: &EigenDecomposition, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Trajectory> {
    if decomp.dim() != rho0.dim() * rho0.dim() {
        return Err(Error::Shape("decomposition does not match the state dimension".into()));
    }
    check_grid(t_grid)?;
    let ys = spectral_vectors(decomp, &rho0.vec(), t_grid)?;
    let states = ys.iter().zip(t_grid).map(|(y, &t)| to_state(y, rho0.space(), t)).collect::<Result<_>>()?;
    Ok(Trajectory { times: t_grid.to_vec(), states, model: "spectral".into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMethod {
    /// Spectral when the reduced generator is small and well conditioned, ODE otherwise.
    Auto,
    Spectral,
    Ode,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub method: EvolutionMethod,
    pub ode: OdeOptions,
    /// Restrict the generator to the subspace reachable from the initial state.
    pub reduce: bool,
    /// Largest reduced dimension diagonalized densely.
    pub dense_limit: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { method: EvolutionMethod::Auto, ode: OdeOptions::default(), reduce: true, dense_limit: 2048 }
    }
}

/// Indices of `L` that the vectorized `rho0` can ever populate.
pub fn reachable_sector(l: &SparseMatrix, rho0: &DensityMatrix) -> Vec<usize> {
    let support: Vec<usize> =
        rho0.vec().iter().enumerate().filter(|(_, z)| **z != C64::new(0.0, 0.0)).map(|(k, _)| k).collect();
    l.reachable_from(&support)
}

/// How a trajectory was actually computed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionInfo {
    pub sector_dim: usize,
    pub method: EvolutionMethod,
    pub condition_estimate: Option<f64>,
}

/// Evolution that first restricts the generator to the invariant subspace
/// reachable from `rho0`, then picks a propagation method. The spectral route
/// uses [`HermitianPropagator`] whenever the generator preserves Hermiticity
/// and trace.
pub fn evolve(
    sup: &Superoperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<(Trajectory, EvolutionInfo)> {
    check_dims(sup, rho0)?;
    check_grid(t_grid)?;
    let l = sup.to_sparse();
    let full = sup.dim();
    let idx: Vec<usize> = if opts.reduce { reachable_sector(&l, rho0) } else { (0..full).collect() };
    let lr = if idx.len() == full { l } else { l.restrict(&idx)? };
    let y_full = rho0.vec();
    let y0: Vec<C64> = idx.iter().map(|&k| y_full[k]).collect();

    let mut info = EvolutionInfo { sector_dim: idx.len(), method: EvolutionMethod::Ode, condition_estimate: None };
    let try_spectral =
        matches!(opts.method, EvolutionMethod::Auto | EvolutionMethod::Spectral) && idx.len() <= opts.dense_limit;
    if opts.method == EvolutionMethod::Spectral && !try_spectral {
        return Err(Error::Dimension(format!(
            "reduced generator of size {} is above the dense limit {}",
            idx.len(),
            opts.dense_limit
        )));
    }
    let ys = if try_spectral {
        if let Some(prop) = HermitianPropagator::new(&lr, &idx, rho0.dim())? {
            info.condition_estimate = Some(prop.condition_estimate());
            if prop.near_defective() && opts.method == EvolutionMethod::Auto {
                log::info!("generator near-defective (cond {:.3e}); integrating instead", prop.condition_estimate());
                integrate_ode(&lr, &y0, t_grid, &opts.ode)?
            } else {
                info.method = EvolutionMethod::Spectral;
                prop.propagate(&y0, t_grid)?
            }
        } else {
            let decomp = eig_general(&lr.to_dense())?;
            info.condition_estimate = Some(decomp.condition_estimate);
            if decomp.near_defective() && opts.method == EvolutionMethod::Auto {
                log::info!("generator near-defective (cond {:.3e}); integrating instead", decomp.condition_estimate);
                integrate_ode(&lr, &y0, t_grid, &opts.ode)?
            } else {
                info.method = EvolutionMethod::Spectral;
                spectral_vectors(&decomp, &y0, t_grid)?
            }
        }
    } else {
        integrate_ode(&lr, &y0, t_grid, &opts.ode)?
    };

    let mut states = Vec::with_capacity(ys.len());
    for (y, &t) in ys.iter().zip(t_grid) {
        let mut v = vec![C64::new(0.0, 0.0); full];
        for (&k, &val) in idx.iter().zip(y) {
            v[k] = val;
        }
        states.push(to_state(&v, rho0.space(), t)?);
    }
    Ok((Trajectory { times: t_grid.to_vec(), states, model: sup.label().to_string() }, info))
}

/// `0` followed by `points` log-spaced times from `t_min` to `t_max`.
pub fn log_time_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && points >= 2) {
        return Err(Error::Argument(format!("bad log grid ({t_min}, {t_max}, {points})")));
    }
    let (a, b) = (t_min.log10(), t_max.log10());
    let mut g = vec![0.0];
    g.extend((0..points).map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)));
    Ok(g)
}

/// `points` evenly spaced times from 0 to `t_max`.
pub fn linear_time_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && points >= 2) {
        return Err(Error::Argument(format!("bad linear grid ({t_max}, {points})")));
    }
    Ok((0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect())
}
