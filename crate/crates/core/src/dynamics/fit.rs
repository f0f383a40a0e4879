use serde::Serialize;

use super::density::{DensityMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::observables::trace_distance;
use crate::spectra::SpectrumReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxationMethod {
    Spectral,
    TrajectoryFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationEstimate {
    pub tau_fit: f64,
    pub fit_window: (f64, f64),
    /// RMS deviation of `ln |rho(t) - rho_ss|` from the fitted line; 0 for spectral estimates.
    pub residual: f64,
    pub method: RelaxationMethod,
}

impl RelaxationEstimate {
    /// `tau = 1 / gap` read off a spectrum.
    pub fn from_spectrum(report: &SpectrumReport) -> Result<Self> {
        let tau = report.relaxation_time().ok_or_else(|| Error::Unavailable("spectrum has no positive gap".into()))?;
        Ok(Self { tau_fit: tau, fit_window: (0.0, f64::INFINITY), residual: 0.0, method: RelaxationMethod::Spectral })
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Largest acceptable RMS log residual.
    pub residual_bound: f64,
    /// Distances below `noise_floor * d(0)` are dropped from the fit.
    pub noise_floor: f64,
    /// The window never starts before this fraction of the last time.
    pub tail_fraction: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { residual_bound: 0.1, noise_floor: 1e-8, tail_fraction: 0.5 }
    }
}

/// Trace distances `|rho(t) - rho_ss|` along a trajectory.
pub fn distances(traj: &Trajectory, rho_ss: &DensityMatrix) -> Result<Vec<f64>> {
    traj.map(|s| trace_distance(s, rho_ss))
}

/// Relaxation time from a log-linear fit of the distance to the steady state.
pub fn fit_relaxation(traj: &Trajectory, rho_ss: &DensityMatrix) -> Result<RelaxationEstimate> {
    fit_relaxation_with(traj, rho_ss, &FitOptions::default())
}

pub fn fit_relaxation_with(traj: &Trajectory, rho_ss: &DensityMatrix, opts: &FitOptions) -> Result<RelaxationEstimate> {
    if traj.len() < 3 {
        return Err(Error::FitWindow("trajectory has fewer than three samples".into()));
    }
    let d = distances(traj, rho_ss)?;
    fit_distance_series(&traj.times, &d, opts)
}

/// Fit of `d(t) ~ C e^{-t/tau}` on the tail window.
pub fn fit_distance_series(times: &[f64], d: &[f64], opts: &FitOptions) -> Result<RelaxationEstimate> {
    if times.len() != d.len() || times.len() < 3 {
        return Err(Error::FitWindow("need at least three matching samples".into()));
    }
    let d0 = d[0];
    let last = *d.last().unwrap();
    if !(d0 > 0.0) {
        return Err(Error::FitWindow("initial state already equals the steady state".into()));
    }
    if !(last < 0.1 * d0) {
        return Err(Error::FitWindow(format!(
            "distance only decayed from {d0:.3e} to {last:.3e}; extend the trajectory"
        )));
    }
    let t_last = *times.last().unwrap();
    let t_half = times.iter().zip(d).find(|(_, &x)| x < 0.5 * d0).map(|(&t, _)| t).unwrap_or(t_last);
    let t_start = t_half.max(opts.tail_fraction * t_last);
    let floor = opts.noise_floor * d0;
    let pts: Vec<(f64, f64)> =
        times.iter().zip(d).filter(|(&t, &x)| t >= t_start && x > floor).map(|(&t, &x)| (t, x.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::FitWindow(format!(
            "only {} usable samples above the noise floor in the tail window",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::FitWindow(format!("tail is not decaying (slope {slope:.3e})")));
    }
    let intercept = my - slope * mt;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let window = (pts[0].0, pts[pts.len() - 1].0);
    if residual > opts.residual_bound {
        return Err(Error::FitWindow(format!(
            "log-linear residual {residual:.3e} exceeds {:.3e} on [{:.3e}, {:.3e}]",
            opts.residual_bound, window.0, window.1
        )));
    }
    Ok(RelaxationEstimate {
        tau_fit: -1.0 / slope,
        fit_window: window,
        residual,
        method: RelaxationMethod::TrajectoryFit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.5).collect();
        let d: Vec<f64> = t.iter().map(|&x| 2.0 * (-x / 7.0).exp()).collect();
        let e = fit_distance_series(&t, &d, &FitOptions::default()).unwrap();
        assert!((e.tau_fit - 7.0).abs() < 1e-9);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn insufficient_decay() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let d: Vec<f64> = t.iter().map(|&x| (-x / 100.0).exp()).collect();
        assert!(matches!(fit_distance_series(&t, &d, &FitOptions::default()), Err(Error::FitWindow(_))));
    }
}
