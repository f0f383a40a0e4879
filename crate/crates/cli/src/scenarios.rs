//! The scenario catalog: sweeps over parameter points, tables, summaries and plots.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cavity_relax::dynamics::{
    detect_plateau, fit_relaxation, linear_time_grid, steady_state, steady_state_report, DensityMatrix, PlateauWindow,
    RelaxationEstimate, StateSpace,
};
use cavity_relax::models::{
    build_coherent_displaced, build_effective_coherent, build_effective_incoherent, build_incoherent, vectorize,
    vectorize_auto, MasterEquation, ModelParams,
};
use cavity_relax::observables::atomic_mutual_information;
use cavity_relax::operators::SystemSpace;
use cavity_relax::spectra::{
    analytic_coherent, analytic_incoherent, splitting_diagnostic, SpectrumReport, Splitting,
    DEFAULT_SPLITTING_THRESHOLD,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Cutoff, Scenario, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::{schema_markdown, to_json, write_file, Cell, Table, UNITS_LINE};
use crate::physics::{
    build_exact, choose_cutoff, converged_dense, exact_spectrum, full_spectrum, mi_curve, slow_gap, ChosenCutoff,
    MiCurve,
};
use crate::plot::{write_svg, Figure, Series};
use crate::verify::{run_suite, Check, VerifyOptions};

/// Files written by a run and the process exit code it asks for.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
    /// Acceptance checks, for the verify scenario.
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct Summary<'a, P: Serialize> {
    scenario: Scenario,
    units: &'static str,
    config: &'a ScenarioConfig,
    points: Vec<P>,
}

/// Applies `f` to every item on a pool of worker threads; results keep the input order.
fn par_map<T, R, F>(items: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> CliResult<R> + Sync,
{
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len()).max(1);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CliResult<R>>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let r = f(k, &items[k]);
                slots.lock().unwrap()[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap_or_else(|| Err(CliError::Numerical("numerical failure: a worker thread panicked".into()))))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn param_cells(p: &ModelParams, cutoff: usize) -> Vec<Cell> {
    vec![p.g0.into(), p.eps.into(), p.n_th.into(), p.gamma.into(), cutoff.into()]
}

fn label(p: &ModelParams) -> String {
    format!("g0={} eps={:.4} n_th={} gamma={}", p.g0, p.eps, p.n_th, p.gamma)
}

/// Effective atomic model: driven when `eps > 0`, thermal otherwise.
fn effective(p: &ModelParams) -> cavity_relax::Result<MasterEquation> {
    if p.eps > 0.0 {
        build_effective_coherent(p)
    } else {
        build_effective_incoherent(p)
    }
}

/// Relaxation time fitted to the effective dynamics from a seeded random atomic state.
fn effective_fit(me: &MasterEquation, gap: f64, seed: u64) -> Option<RelaxationEstimate> {
    let run = || -> cavity_relax::Result<RelaxationEstimate> {
        let sup = vectorize(me, true)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho0 = DensityMatrix::random(StateSpace::System(SystemSpace::atomic()), &mut rng);
        let times = linear_time_grid(10.0 / gap, 400)?;
        let (traj, _) = cavity_relax::dynamics::evolve(&sup, &rho0, &times, &Default::default())?;
        fit_relaxation(&traj, &steady_state(&sup, Some(&rho0))?)
    };
    run().map_err(|e| log::warn!("relaxation fit failed: {e}")).ok()
}

/// Exact value at the chosen cutoff: read from the convergence history, computed
/// for a fixed cutoff, NaN when automatic truncation did not converge.
fn exact_value<E>(chosen: &ChosenCutoff, fixed: bool, eval: E) -> CliResult<f64>
where
    E: FnOnce(usize) -> cavity_relax::Result<f64>,
{
    if fixed {
        return Ok(eval(chosen.cutoff)?);
    }
    if !chosen.converged {
        return Ok(f64::NAN);
    }
    Ok(chosen.history.iter().find(|(n, _)| *n == chosen.cutoff).map_or(f64::NAN, |h| h.1))
}

#[derive(Serialize)]
struct GapPoint {
    params: ModelParams,
    cutoff: ChosenCutoff,
    gap_exact: f64,
    gap_effective: f64,
    gap_analytic: f64,
    rel_err_exact: f64,
    rel_err_effective: f64,
    tau_exact: f64,
    tau_effective: f64,
    fit: Option<RelaxationEstimate>,
}

fn gap_point(cfg: &ScenarioConfig, k: usize, p: &ModelParams) -> CliResult<GapPoint> {
    let coherent = cfg.scenario == Scenario::GapCoherent;
    let me = effective(p)?;
    let eff = full_spectrum(&me)?;
    let analytic = if coherent { analytic_coherent(p)? } else { analytic_incoherent(p)? }.gap();
    let build = if coherent { build_coherent_displaced } else { build_incoherent };
    let chosen = choose_cutoff(cfg.cutoff, build, p, slow_gap)?;
    let fixed = matches!(cfg.cutoff, Cutoff::Fixed(_));
    let gap_exact = exact_value(&chosen, fixed, |n| slow_gap(&build(&SystemSpace::new(n)?, p)?))?;
    log::info!("{}: gap exact {gap_exact:.6e}, effective {:.6e} (N={})", label(p), eff.gap, chosen.cutoff);
    Ok(GapPoint {
        params: *p,
        gap_exact,
        gap_effective: eff.gap,
        gap_analytic: analytic,
        rel_err_exact: rel(gap_exact, analytic),
        rel_err_effective: rel(eff.gap, analytic),
        tau_exact: 1.0 / gap_exact,
        tau_effective: 1.0 / eff.gap,
        fit: effective_fit(&me, eff.gap, cfg.seeds.wrapping_add(k as u64)),
        cutoff: chosen,
    })
}

fn gap_scenario(cfg: &ScenarioConfig) -> CliResult<(Table, String, Vec<Figure>)> {
    let points = cfg.points()?;
    let results = par_map(&points, |k, p| gap_point(cfg, k, p))?;
    let coherent = cfg.scenario == Scenario::GapCoherent;
    let mut table = Table::new(cfg.scenario);
    for r in &results {
        let mut row = param_cells(&r.params, r.cutoff.cutoff);
        row.extend([r.gap_exact.into(), r.gap_effective.into(), r.gap_analytic.into()]);
        row.extend([r.rel_err_exact.into(), r.rel_err_effective.into()]);
        row.push(if coherent { r.tau_exact } else { r.tau_effective }.into());
        row.push(r.cutoff.converged.into());
        table.push(row);
    }
    let x = |p: &ModelParams| if coherent { p.eps } else { p.n_th };
    let mut series = Vec::new();
    let mut g0s: Vec<f64> = results.iter().map(|r| r.params.g0).collect();
    g0s.dedup();
    for g0 in g0s {
        let of = |name: &str, f: &dyn Fn(&GapPoint) -> f64| Series {
            label: format!("{name}, g0={g0}"),
            points: results.iter().filter(|r| r.params.g0 == g0).map(|r| (x(&r.params), f(r))).collect(),
        };
        series.push(of("exact", &|r| r.gap_exact));
        series.push(of("effective", &|r| r.gap_effective));
        series.push(of("analytic", &|r| r.gap_analytic));
    }
    let fig = Figure {
        title: format!("Spectral gap ({})", cfg.scenario),
        x_label: if coherent { "eps / kappa" } else { "n_th" }.into(),
        y_label: "gap / kappa".into(),
        log_x: true,
        log_y: true,
        series,
    };
    let json = to_json(&Summary { scenario: cfg.scenario, units: UNITS_LINE, config: cfg, points: results })?;
    Ok((table, json, vec![fig]))
}

#[derive(Serialize)]
struct SecondRatePoint {
    params: ModelParams,
    cutoff: ChosenCutoff,
    gap_exact: f64,
    second_rate_exact: f64,
    second_rate_effective: f64,
    second_rate_analytic: f64,
    rel_err_exact: f64,
    rel_err_effective: f64,
    splitting: Option<Splitting>,
}

fn exact_second_rate(cutoff: Cutoff, p: &ModelParams) -> CliResult<(ChosenCutoff, Option<SpectrumReport>)> {
    match cutoff {
        Cutoff::Fixed(n) => {
            let r = exact_spectrum(&build_coherent_displaced(&SystemSpace::new(n)?, p)?)?;
            Ok((ChosenCutoff { cutoff: n, converged: false, history: vec![] }, Some(r)))
        }
        Cutoff::Auto => match converged_dense(build_coherent_displaced, p, |me| exact_spectrum(&me)) {
            Ok((n, r)) => {
                let history = vec![(n, r.second_rate.unwrap_or(f64::NAN))];
                Ok((ChosenCutoff { cutoff: n, converged: true, history }, Some(r)))
            }
            Err(cavity_relax::Error::NonConvergence(msg)) => {
                log::warn!("{}: {msg}", label(p));
                Ok((ChosenCutoff { cutoff: crate::physics::DENSE_CUTOFF_CAP, converged: false, history: vec![] }, None))
            }
            Err(e) => Err(e.into()),
        },
    }
}

fn second_rate_point(cfg: &ScenarioConfig, p: &ModelParams) -> CliResult<SecondRatePoint> {
    let eff = full_spectrum(&build_effective_coherent(p)?)?;
    let analytic = analytic_coherent(p)?
        .entry("λ3")
        .map(|e| -e.value)
        .ok_or_else(|| CliError::Numerical("numerical failure: analytic spectrum has no λ3 entry".into()))?;
    let (cutoff, exact) = exact_second_rate(cfg.cutoff, p)?;
    let second_exact = exact.as_ref().and_then(|r| r.second_rate).unwrap_or(f64::NAN);
    let second_eff = eff.second_rate.unwrap_or(f64::NAN);
    log::info!("{}: second rate exact {second_exact:.6e}, effective {second_eff:.6e}", label(p));
    Ok(SecondRatePoint {
        params: *p,
        cutoff,
        gap_exact: exact.as_ref().map_or(f64::NAN, |r| r.gap),
        second_rate_exact: second_exact,
        second_rate_effective: second_eff,
        second_rate_analytic: analytic,
        rel_err_exact: rel(second_exact, analytic),
        rel_err_effective: rel(second_eff, analytic),
        splitting: splitting_diagnostic(&eff, DEFAULT_SPLITTING_THRESHOLD).ok(),
    })
}

fn second_rate_scenario(cfg: &ScenarioConfig) -> CliResult<(Table, String, Vec<Figure>)> {
    let points = cfg.points()?;
    let results = par_map(&points, |_, p| second_rate_point(cfg, p))?;
    let mut table = Table::new(cfg.scenario);
    for r in &results {
        let mut row = param_cells(&r.params, r.cutoff.cutoff);
        row.extend([r.second_rate_exact.into(), r.second_rate_effective.into(), r.second_rate_analytic.into()]);
        row.extend([r.rel_err_exact.into(), r.rel_err_effective.into()]);
        row.push(r.splitting.map_or(f64::NAN, |s| s.ratio).into());
        row.push(r.cutoff.converged.into());
        table.push(row);
    }
    let mut series = Vec::new();
    let mut g0s: Vec<f64> = results.iter().map(|r| r.params.g0).collect();
    g0s.dedup();
    for g0 in g0s {
        let of = |name: &str, f: &dyn Fn(&SecondRatePoint) -> f64| Series {
            label: format!("{name}, g0={g0}"),
            points: results.iter().filter(|r| r.params.g0 == g0).map(|r| (r.params.eps, f(r))).collect(),
        };
        series.push(of("exact", &|r| r.second_rate_exact));
        series.push(of("effective", &|r| r.second_rate_effective));
        series.push(of("analytic", &|r| r.second_rate_analytic));
    }
    let fig = Figure {
        title: "Second relaxation rate (second-rate-coherent)".into(),
        x_label: "eps / kappa".into(),
        y_label: "rate / kappa".into(),
        log_x: true,
        log_y: true,
        series,
    };
    let json = to_json(&Summary { scenario: cfg.scenario, units: UNITS_LINE, config: cfg, points: results })?;
    Ok((table, json, vec![fig]))
}

#[derive(Serialize)]
struct CurveSummary {
    model: &'static str,
    peak_mi: f64,
    final_mi: f64,
    steady_mi: f64,
    kernel_dim: usize,
    sector_dim: usize,
    plateaus: Vec<PlateauWindow>,
}

#[derive(Serialize)]
struct MiPoint {
    params: ModelParams,
    cutoff: ChosenCutoff,
    gap_effective: f64,
    tau_effective: f64,
    splitting: Option<Splitting>,
    curves: Vec<CurveSummary>,
    #[serde(skip)]
    data: Vec<(&'static str, MiCurve)>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn summarize_curve(
    model: &'static str,
    curve: &MiCurve,
    sup: &cavity_relax::models::Superoperator,
    rho0: &DensityMatrix,
) -> CliResult<CurveSummary> {
    let ss = steady_state_report(sup, Some(rho0))?;
    Ok(CurveSummary {
        model,
        peak_mi: curve.mi.iter().copied().fold(0.0, f64::max),
        final_mi: curve.mi.last().copied().unwrap_or(f64::NAN),
        steady_mi: atomic_mutual_information(&ss.state)?,
        kernel_dim: ss.kernel_dim,
        sector_dim: curve.info.sector_dim,
        plateaus: detect_plateau(&curve.times, &curve.mi, None)?,
    })
}

fn mi_point(cfg: &ScenarioConfig, times: &[f64], p: &ModelParams) -> CliResult<MiPoint> {
    let me = effective(p)?;
    let eff = full_spectrum(&me)?;
    let sup = vectorize(&me, true)?;
    let ground = DensityMatrix::ground(&SystemSpace::atomic());
    let eff_curve = mi_curve(&sup, &ground, times)?;
    let mut curves = vec![summarize_curve("effective", &eff_curve, &sup, &ground)?];
    let mut data = vec![("effective", eff_curve)];

    let exact_curve =
        |n: usize| -> cavity_relax::Result<(MiCurve, cavity_relax::models::Superoperator, DensityMatrix)> {
            let space = SystemSpace::new(n)?;
            let sup = vectorize_auto(&build_exact(&space, p)?)?;
            let rho0 = DensityMatrix::ground(&space);
            Ok((mi_curve(&sup, &rho0, times)?, sup, rho0))
        };
    let chosen = choose_cutoff(cfg.cutoff, build_exact, p, |me| {
        let sup = vectorize_auto(me)?;
        Ok(mean(&mi_curve(&sup, &DensityMatrix::ground(&me.space), times)?.mi))
    })?;
    if chosen.converged || matches!(cfg.cutoff, Cutoff::Fixed(_)) {
        let (curve, sup, rho0) = exact_curve(chosen.cutoff)?;
        curves.push(summarize_curve("exact", &curve, &sup, &rho0)?);
        data.push(("exact", curve));
    } else {
        log::warn!("{}: no converged cutoff up to {}, exact curve skipped", label(p), chosen.cutoff);
    }
    log::info!("{}: {} curves (N={})", label(p), data.len(), chosen.cutoff);
    Ok(MiPoint {
        params: *p,
        cutoff: chosen,
        gap_effective: eff.gap,
        tau_effective: 1.0 / eff.gap,
        splitting: splitting_diagnostic(&eff, DEFAULT_SPLITTING_THRESHOLD).ok(),
        curves,
        data,
    })
}

fn mi_scenario(cfg: &ScenarioConfig) -> CliResult<(Table, String, Vec<Figure>)> {
    let points = cfg.points()?;
    let times = cfg.time_grid.times()?;
    let results = par_map(&points, |_, p| mi_point(cfg, &times, p))?;
    let mut table = Table::new(cfg.scenario);
    let mut series = Vec::new();
    for r in &results {
        for (model, curve) in &r.data {
            for (t, mi) in curve.times.iter().zip(&curve.mi) {
                let mut row = param_cells(&r.params, r.cutoff.cutoff);
                row.extend([Cell::from(*model), (*t).into(), (*mi).into()]);
                table.push(row);
            }
            series.push(Series {
                label: format!("{model}, {}", label(&r.params)),
                points: curve.times.iter().copied().zip(curve.mi.iter().copied()).collect(),
            });
        }
    }
    let fig = Figure {
        title: format!("Atomic mutual information ({})", cfg.scenario),
        x_label: "kappa t".into(),
        y_label: "mutual information (bits)".into(),
        log_x: true,
        log_y: false,
        series,
    };
    let json = to_json(&Summary { scenario: cfg.scenario, units: UNITS_LINE, config: cfg, points: results })?;
    Ok((table, json, vec![fig]))
}

fn verify_scenario(cfg: &ScenarioConfig, opts: &VerifyOptions) -> (Table, Vec<Check>) {
    let checks = run_suite(&VerifyOptions { seed: cfg.seeds, ..opts.clone() });
    let mut table = Table::new(Scenario::Verify);
    for c in &checks {
        table.push(vec![usize::from(c.id).into(), c.passed.into(), c.metric.into(), c.bound.into()]);
    }
    (table, checks)
}

/// Runs one scenario and writes its CSV, JSON summary, schema and optional plots
/// into the output directory.
pub fn run(cfg: &ScenarioConfig, verify: &VerifyOptions) -> CliResult<RunOutcome> {
    let dir = &cfg.output;
    let name = cfg.scenario.name();
    let mut checks = Vec::new();
    let (table, json, figures) = match cfg.scenario {
        Scenario::GapCoherent | Scenario::GapIncoherent => gap_scenario(cfg)?,
        Scenario::SecondRateCoherent => second_rate_scenario(cfg)?,
        Scenario::MiCoherent | Scenario::MiIncoherent | Scenario::RealDetector => mi_scenario(cfg)?,
        Scenario::Verify => {
            let (table, c) = verify_scenario(cfg, verify);
            let json = to_json(&Summary { scenario: cfg.scenario, units: UNITS_LINE, config: cfg, points: c.clone() })?;
            checks = c;
            (table, json, vec![])
        }
    };
    let mut files = vec![
        write_file(dir, &format!("{name}.csv"), &table.to_csv())?,
        write_file(dir, &format!("{name}.json"), &json)?,
        write_file(dir, "SCHEMA.md", &schema_markdown())?,
    ];
    if cfg.plot {
        for (k, fig) in figures.iter().enumerate() {
            let file = if k == 0 { format!("{name}.svg") } else { format!("{name}-{k}.svg") };
            let path = dir.join(file);
            write_svg(fig, &path)?;
            files.push(path);
        }
    }
    let exit_code = if checks.iter().any(|c| !c.passed) { 1 } else { 0 };
    Ok(RunOutcome { files, exit_code, checks })
}
