//! Model construction and the spectral and dynamical quantities the
//! scenarios report.

use cavity_relax::dynamics::{
    check_truncation, evolve, steady_state, DensityMatrix, EvolutionInfo, EvolveOptions, TruncationOptions,
};
use cavity_relax::linalg::C64;
use cavity_relax::models::{vectorize, vectorize_auto, MasterEquation, ModelParams, Superoperator};
use cavity_relax::observables::atomic_mutual_information;
use cavity_relax::operators::SystemSpace;
use cavity_relax::spectra::{analyze_with, AnalyzeOptions, SpectrumMethod, SpectrumReport};
use cavity_relax::{Error, Result};

use crate::config::Cutoff;

/// Normalization of the dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `D[O] rho = 2 O rho O† - O†O rho - rho O†O`.
    #[default]
    Standard,
    /// Half of the above. Only used to check that the acceptance suite notices.
    Halved,
}

impl Convention {
    pub fn apply(self, mut me: MasterEquation) -> MasterEquation {
        if self == Convention::Halved {
            for d in &mut me.dissipators {
                d.rate *= 0.5;
            }
            for c in &mut me.cross_terms {
                c.weight *= 0.5;
            }
        }
        me
    }
}

/// Eigenvalues requested from shift-invert for the slow part of an exact spectrum.
pub const SLOW_COUNT: usize = 24;
/// Shift used for the slow part of exact spectra.
pub const SLOW_SHIFT: f64 = 1e-3;
/// Largest cutoff tried by automatic truncation.
pub const AUTO_CUTOFF_CAP: usize = 64;
/// Largest cutoff diagonalized densely by [`converged_dense`].
pub const DENSE_CUTOFF_CAP: usize = 16;
/// Relative change of gap and second rate accepted by [`converged_dense`].
pub const DENSE_CUTOFF_TOL: f64 = 1e-2;

/// Full spectrum of a small (effective) model.
pub fn full_spectrum(me: &MasterEquation) -> Result<SpectrumReport> {
    let sup = vectorize(me, true)?;
    analyze_with(&sup, &AnalyzeOptions { method: SpectrumMethod::Dense, ..Default::default() })
}

/// Every eigenvalue of an exact model, without conditioning estimates.
pub fn exact_spectrum(me: &MasterEquation) -> Result<SpectrumReport> {
    let sup = vectorize(me, true)?;
    analyze_with(
        &sup,
        &AnalyzeOptions { zero_tol: 1e-12, method: SpectrumMethod::Dense, want_condition: false, ..Default::default() },
    )
}

/// Eigenvalues nearest the origin of a large model, by shift-invert.
pub fn slow_spectrum(me: &MasterEquation, count: usize) -> Result<SpectrumReport> {
    let sup = vectorize(me, false)?;
    let method = SpectrumMethod::ShiftInvert { count: count.min(sup.dim()), shift: C64::new(SLOW_SHIFT, 0.0) };
    analyze_with(&sup, &AnalyzeOptions { zero_tol: 1e-12, method, want_condition: false, ..Default::default() })
}

/// A cutoff together with how it was chosen.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChosenCutoff {
    pub cutoff: usize,
    /// The observable agreed with the next doubling within tolerance.
    pub converged: bool,
    pub history: Vec<(usize, f64)>,
}

/// Resolves `cutoff`, doubling from 4 while `extract` still changes when it is `Auto`.
pub fn choose_cutoff<B, E>(cutoff: Cutoff, build: B, params: &ModelParams, extract: E) -> Result<ChosenCutoff>
where
    B: Fn(&SystemSpace, &ModelParams) -> Result<MasterEquation>,
    E: Fn(&MasterEquation) -> Result<f64>,
{
    match cutoff {
        Cutoff::Fixed(n) => Ok(ChosenCutoff { cutoff: n, converged: false, history: vec![] }),
        Cutoff::Auto => {
            let opts = TruncationOptions { cap: AUTO_CUTOFF_CAP, ..Default::default() };
            match check_truncation(build, params, extract, &opts) {
                Ok(r) => Ok(ChosenCutoff { cutoff: r.cutoff, converged: true, history: r.history }),
                Err(Error::NonConvergence(msg)) => {
                    log::warn!("{msg}");
                    Ok(ChosenCutoff { cutoff: AUTO_CUTOFF_CAP, converged: false, history: vec![] })
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Full spectrum at the first cutoff, doubling from 4, whose gap and second
/// rate changed by at most [`DENSE_CUTOFF_TOL`] from half that cutoff.
pub fn converged_dense<B, S>(build: B, p: &ModelParams, spectrum: S) -> Result<(usize, SpectrumReport)>
where
    B: Fn(&SystemSpace, &ModelParams) -> Result<MasterEquation>,
    S: Fn(MasterEquation) -> Result<SpectrumReport>,
{
    let mut n = 4;
    let mut prev = spectrum(build(&SystemSpace::new(n)?, p)?)?;
    let second = |r: &SpectrumReport| r.second_rate.unwrap_or(f64::NAN);
    while 2 * n <= DENSE_CUTOFF_CAP {
        n *= 2;
        let next = spectrum(build(&SystemSpace::new(n)?, p)?)?;
        if rel_change(prev.gap, next.gap) <= DENSE_CUTOFF_TOL
            && rel_change(second(&prev), second(&next)) <= DENSE_CUTOFF_TOL
        {
            return Ok((n, next));
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!("spectrum still changing at cutoff {n}")))
}

/// Gap of the slow part of an exact spectrum.
pub fn slow_gap(me: &MasterEquation) -> Result<f64> {
    let r = slow_spectrum(me, SLOW_COUNT)?;
    if r.gap > 0.0 {
        Ok(r.gap)
    } else {
        Err(Error::Unavailable("no nonzero eigenvalue among the slow ones".into()))
    }
}

/// Mutual information of the steady state reached from the ground state.
pub fn steady_mi(me: &MasterEquation) -> Result<f64> {
    let sup = vectorize_auto(me)?;
    let rho = steady_state(&sup, Some(&DensityMatrix::ground(&me.space)))?;
    atomic_mutual_information(&rho)
}

/// Atomic mutual information along a trajectory.
#[derive(Debug, Clone)]
pub struct MiCurve {
    pub times: Vec<f64>,
    pub mi: Vec<f64>,
    pub info: EvolutionInfo,
}

pub fn mi_curve(sup: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<MiCurve> {
    let (traj, info) = evolve(sup, rho0, times, &EvolveOptions::default())?;
    Ok(MiCurve { times: times.to_vec(), mi: traj.map(atomic_mutual_information)?, info })
}

/// Largest `|a - b|` over samples with `t > t_min`.
pub fn max_deviation(times: &[f64], a: &[f64], b: &[f64], t_min: f64) -> f64 {
    times.iter().zip(a.iter().zip(b)).filter(|(t, _)| **t > t_min).map(|(_, (x, y))| (x - y).abs()).fold(0.0, f64::max)
}

/// Exact model for a parameter point: displaced frame when only a coherent
/// drive is present, lab frame otherwise.
pub fn build_exact(space: &SystemSpace, p: &ModelParams) -> Result<MasterEquation> {
    use cavity_relax::models::{build_coherent_displaced, build_full, build_full_displaced, build_incoherent};
    match (p.eps > 0.0, p.n_th > 0.0, p.gamma > 0.0) {
        (_, false, true) => build_full_displaced(space, p),
        (true, false, false) => build_coherent_displaced(space, p),
        (false, true, false) => build_incoherent(space, p),
        _ => build_full(space, p),
    }
}
