use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{MasterEquation, ModelParams};
use crate::operators::SystemSpace;

#[derive(Debug, Clone)]
pub struct TruncationOptions {
    pub rel_tol: f64,
    /// Changes below this absolute amount always count as converged.
    pub abs_tol: f64,
    pub start: usize,
    pub cap: usize,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-3, abs_tol: 1e-12, start: 4, cap: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationResult {
    /// Smaller cutoff of the first pair whose values agree.
    pub cutoff: usize,
    pub value: f64,
    /// `(cutoff, value)` for every cutoff tried.
    pub history: Vec<(usize, f64)>,
}

/// Doubles the Fock cutoff until `extract` stops changing by more than `rel_tol`.
pub fn check_truncation<B, E>(
    build: B,
    params: &ModelParams,
    extract: E,
    opts: &TruncationOptions,
) -> Result<TruncationResult>
where
    B: Fn(&SystemSpace, &ModelParams) -> Result<MasterEquation>,
    E: Fn(&MasterEquation) -> Result<f64>,
{
    if opts.start < 1 || opts.cap < opts.start {
        return Err(Error::Argument(format!("bad cutoff range {}..{}", opts.start, opts.cap)));
    }
    let eval = |n: usize| -> Result<f64> { extract(&build(&SystemSpace::new(n)?, params)?) };
    let mut n = opts.start;
    let mut prev = eval(n)?;
    let mut history = vec![(n, prev)];
    loop {
        let next = 2 * n;
        if next > opts.cap {
            return Err(Error::NonConvergence(format!(
                "observable still changing at cutoff {n} (cap {}); history {history:?}",
                opts.cap
            )));
        }
        let v = eval(next)?;
        history.push((next, v));
        log::debug!("cutoff {next}: {v:.12e}");
        if (v - prev).abs() <= opts.rel_tol * v.abs() + opts.abs_tol {
            return Ok(TruncationResult { cutoff: n, value: prev, history });
        }
        n = next;
        prev = v;
    }
}
