//! Liouvillian spectra: gap, relaxation rates, clustering, closed-form
//! spectra of the effective atomic models and metastability diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_general, eigenvalues_general, eigs_near, ComplexMatrix, ShiftInvertOptions, SparseMatrix, C64, DENSE_EIG_CAP,
};
use crate::models::{ModelParams, Representation, Superoperator};

/// Side length up to which [`SpectrumMethod::Auto`] diagonalizes densely.
pub const AUTO_DENSE_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumMethod {
    /// Dense when small, block-diagonal when the sparsity graph splits into
    /// small components, shift-invert otherwise.
    Auto,
    Dense,
    /// Dense diagonalization of each connected component of the sparsity graph.
    Blocks,
    /// `count` eigenvalues nearest to `shift`.
    ShiftInvert {
        count: usize,
        shift: C64,
    },
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Eigenvalues within `zero_tol * max|λ|` of the origin count as zero.
    pub zero_tol: f64,
    /// Relative distance under which eigenvalues are merged into one cluster.
    pub cluster_tol: f64,
    /// A rate belongs to the gap's family when it is at most this multiple of the gap.
    pub family_factor: f64,
    pub method: SpectrumMethod,
    /// Compute eigenvectors to estimate their conditioning (dense paths only).
    pub want_condition: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            zero_tol: 1e-9,
            cluster_tol: 1e-7,
            family_factor: 4.0,
            method: SpectrumMethod::Auto,
            want_condition: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub value: C64,
    pub count: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Sorted by `|Re λ|`, then by imaginary part.
    pub eigenvalues: Vec<C64>,
    pub clusters: Vec<Cluster>,
    /// Smallest `-Re λ` over the nonzero eigenvalues; 0 if there are none.
    pub gap: f64,
    /// Distinct relaxation rates `-Re λ` of the nonzero eigenvalues, ascending.
    pub rates: Vec<f64>,
    /// Slowest rate outside the gap's family (see [`AnalyzeOptions::family_factor`]).
    pub second_rate: Option<f64>,
    pub kernel_dim: usize,
    pub near_defective: bool,
    pub condition_estimate: Option<f64>,
    /// Largest `|λ|` found.
    pub scale: f64,
    /// False when only part of the spectrum was computed.
    pub complete: bool,
}

impl SpectrumReport {
    pub fn relaxation_time(&self) -> Option<f64> {
        (self.gap > 0.0).then(|| 1.0 / self.gap)
    }

    /// The `k` eigenvalues with the smallest `-Re λ`.
    pub fn slowest(&self, k: usize) -> Vec<C64> {
        self.eigenvalues.iter().take(k).copied().collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.eigenvalues.len() - self.kernel_dim
    }
}

/// Spectral analysis with default tolerances.
pub fn analyze(sup: &Superoperator, zero_tol: f64, cluster_tol: f64) -> Result<SpectrumReport> {
    analyze_with(sup, &AnalyzeOptions { zero_tol, cluster_tol, ..Default::default() })
}

pub fn analyze_with(sup: &Superoperator, opts: &AnalyzeOptions) -> Result<SpectrumReport> {
    let n = sup.dim();
    let method = match &opts.method {
        SpectrumMethod::Auto => {
            if n <= AUTO_DENSE_LIMIT {
                SpectrumMethod::Dense
            } else {
                let comps = sup.to_sparse().connected_components();
                if comps.iter().map(Vec::len).max().unwrap_or(0) <= AUTO_DENSE_LIMIT {
                    SpectrumMethod::Blocks
                } else {
                    SpectrumMethod::ShiftInvert { count: 40, shift: C64::new(1e-3, 0.0) }
                }
            }
        }
        m => m.clone(),
    };
    let (eigs, cond, complete) = match method {
        SpectrumMethod::Dense => {
            let m = match sup.representation() {
                Representation::Dense(m) => m.clone(),
                Representation::Sparse(_) => sup.to_dense()?,
            };
            dense_eigs(&m, opts.want_condition)?
        }
        SpectrumMethod::Blocks => {
            let s = sup.to_sparse();
            let mut all = Vec::with_capacity(n);
            let mut worst: Option<f64> = None;
            for comp in s.connected_components() {
                if comp.len() > DENSE_EIG_CAP {
                    return Err(Error::Dimension(format!("block of size {} exceeds the dense cap", comp.len())));
                }
                let block = s.restrict(&comp)?.to_dense();
                let (e, c, _) = dense_eigs(&block, opts.want_condition)?;
                all.extend(e);
                if let Some(c) = c {
                    worst = Some(worst.map_or(c, |w: f64| w.max(c)));
                }
            }
            (all, worst, true)
        }
        SpectrumMethod::ShiftInvert { count, shift } => {
            let s = sup.to_sparse();
            let si = ShiftInvertOptions { count, shift, ..Default::default() };
            let pairs = eigs_near(&s, &si)?;
            (pairs.into_iter().map(|p| p.value).collect(), None, count >= n)
        }
        SpectrumMethod::Auto => unreachable!("resolved above"),
    };
    Ok(summarize(eigs, cond, complete, opts))
}

fn dense_eigs(m: &ComplexMatrix, want_condition: bool) -> Result<(Vec<C64>, Option<f64>, bool)> {
    if want_condition {
        let d = eig_general(m)?;
        Ok((d.eigenvalues, Some(d.condition_estimate), true))
    } else {
        Ok((eigenvalues_general(m)?, None, true))
    }
}

/// Analysis of an explicit list of eigenvalues.
pub fn summarize(mut eigs: Vec<C64>, condition: Option<f64>, complete: bool, opts: &AnalyzeOptions) -> SpectrumReport {
    eigs.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()).then(a.im.total_cmp(&b.im)));
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let zero_abs = opts.zero_tol * scale;
    let is_zero = |z: &C64| z.re.abs() <= zero_abs && z.im.abs() <= zero_abs;
    let kernel_dim = eigs.iter().filter(|z| is_zero(z)).count();

    let mut raw_rates: Vec<f64> = eigs.iter().filter(|z| !is_zero(z)).map(|z| (-z.re).max(0.0)).collect();
    raw_rates.sort_by(f64::total_cmp);
    let mut rates: Vec<f64> = Vec::new();
    for r in raw_rates {
        match rates.last() {
            Some(&last) if (r - last).abs() <= (opts.cluster_tol * r.abs()).max(zero_abs) => {}
            _ => rates.push(r),
        }
    }
    let gap = rates.first().copied().unwrap_or(0.0);
    let second_rate = rates.iter().copied().find(|&r| r > opts.family_factor * gap && gap > 0.0);

    let clusters = cluster(&eigs, opts.cluster_tol, zero_abs);
    let near_defective = condition.is_some_and(|c| !(c <= crate::linalg::NEAR_DEFECTIVE_COND));
    SpectrumReport {
        eigenvalues: eigs,
        clusters,
        gap,
        rates,
        second_rate,
        kernel_dim,
        near_defective,
        condition_estimate: condition,
        scale,
        complete,
    }
}

/// Single-linkage clustering in the complex plane.
fn cluster(eigs: &[C64], rel_tol: f64, abs_floor: f64) -> Vec<Cluster> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let tol = (rel_tol * eigs[i].norm().max(eigs[j].norm())).max(abs_floor);
            if (eigs[i] - eigs[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, m)) => m.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let value = members.iter().map(|&k| eigs[k]).sum::<C64>() / members.len() as f64;
            Cluster { value, count: members.len(), members }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnalyticCase {
    Coherent,
    Incoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticEntry {
    pub label: String,
    pub value: f64,
    pub multiplicity: usize,
}

/// Closed-form spectrum of one of the 16x16 effective atomic Liouvillians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSpectrum {
    pub case: AnalyticCase,
    pub entries: Vec<AnalyticEntry>,
    pub params: ModelParams,
}

impl AnalyticSpectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Smallest nonzero `-λ`.
    pub fn gap(&self) -> f64 {
        self.entries.iter().map(|e| -e.value).filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min)
    }

    pub fn entry(&self, label: &str) -> Option<&AnalyticEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// Entries whose values coincide within `rel_tol` merged, multiplicities added.
    pub fn merged(&self, rel_tol: f64) -> Vec<AnalyticEntry> {
        let scale = self.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max);
        let mut out: Vec<AnalyticEntry> = Vec::new();
        for e in &self.entries {
            let hit = out
                .iter_mut()
                .find(|o| (o.value - e.value).abs() <= rel_tol * o.value.abs().max(e.value.abs()).max(scale * 1e-15));
            match hit {
                Some(o) => {
                    o.label = format!("{}+{}", o.label, e.label);
                    o.multiplicity += e.multiplicity;
                }
                None => out.push(e.clone()),
            }
        }
        out
    }

    /// Expanded list of eigenvalues (each repeated by multiplicity).
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity)).collect()
    }
}

fn entry(label: &str, value: f64, multiplicity: usize) -> AnalyticEntry {
    AnalyticEntry { label: label.into(), value, multiplicity }
}

/// Spectrum of the effective coherent model in terms of `Γ_ε` and `Γ_g0`.
pub fn analytic_coherent(params: &ModelParams) -> Result<AnalyticSpectrum> {
    params.validate()?;
    if !(params.eps > 0.0) {
        return Err(Error::Domain("the coherent spectrum needs eps > 0".into()));
    }
    let ge = params.gamma_eps()?;
    let gg = params.gamma_g0();
    Ok(AnalyticSpectrum {
        case: AnalyticCase::Coherent,
        entries: vec![
            entry("λ0", 0.0, 2),
            entry("λ1", -4.0 * ge, 3),
            entry("λ2", -12.0 * ge, 1),
            entry("λ3", -4.0 * gg - 2.0 * ge, 6),
            entry("λ4", -4.0 * gg - 10.0 * ge, 2),
            entry("λ5", -4.0 * (4.0 * gg + ge), 2),
        ],
        params: *params,
    })
}

/// Spectrum of the effective thermal model in terms of `Γ` and `n_th`.
pub fn analytic_incoherent(params: &ModelParams) -> Result<AnalyticSpectrum> {
    params.validate()?;
    let g = params.gamma_collective();
    let n = params.n_th;
    let root_a = (1.0 + 16.0 * n * (n + 1.0)).sqrt();
    let root_b = (n * (n + 1.0)).sqrt();
    Ok(AnalyticSpectrum {
        case: AnalyticCase::Incoherent,
        entries: vec![
            entry("λ0", 0.0, 2),
            entry("λ1", -2.0 * n * g, 2),
            entry("λ2", (-3.0 * (2.0 * n + 1.0) + root_a) * g, 2),
            entry("λ3", -2.0 * (n + 1.0) * g, 2),
            entry("λ4", -2.0 * (2.0 * n + 1.0) * g, 4),
            entry("λ5", (-4.0 * (2.0 * n + 1.0) + 4.0 * root_b) * g, 1),
            entry("λ6", (-3.0 * (2.0 * n + 1.0) - root_a) * g, 2),
            entry("λ7", (-4.0 * (2.0 * n + 1.0) - 4.0 * root_b) * g, 1),
        ],
        params: *params,
    })
}

/// References smaller than this fraction of the spectral scale are treated as zero.
pub const RELATIVE_ZERO_FLOOR: f64 = 1e-9;

/// Relative error of `numeric` against `reference`; references that are
/// numerically zero are measured against `scale` instead.
pub fn relative_error(numeric: C64, reference: C64, scale: f64) -> f64 {
    let d = (numeric - reference).norm();
    if reference.norm() > RELATIVE_ZERO_FLOOR * scale {
        d / reference.norm()
    } else {
        d / scale.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryMatch {
    pub label: String,
    pub analytic: f64,
    pub expected_multiplicity: usize,
    /// Numeric eigenvalues assigned to this entry.
    pub matched: Vec<C64>,
    /// Numeric eigenvalues (assigned or not) within tolerance of the entry.
    pub found_multiplicity: usize,
    pub rel_error: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumMatch {
    pub entries: Vec<EntryMatch>,
    /// Numeric eigenvalues left over after matching.
    pub unmatched: Vec<C64>,
    pub max_rel_error: f64,
    pub multiplicities_exact: bool,
    pub all_match: bool,
}

impl SpectrumMatch {
    pub fn entry(&self, label: &str) -> Option<&EntryMatch> {
        self.entries.iter().find(|e| e.label.split('+').any(|l| l == label))
    }
}

/// Greedy assignment of numeric eigenvalues to analytic entries.
///
/// Entries that coincide analytically are merged first; each entry then takes
/// the nearest unassigned numeric eigenvalues, as many as its multiplicity.
pub fn compare_spectra(numeric: &SpectrumReport, analytic: &AnalyticSpectrum, rel_tol: f64) -> SpectrumMatch {
    let mut groups = analytic.merged(1e-12);
    groups.sort_by(|a, b| a.value.abs().total_cmp(&b.value.abs()));
    let scale = numeric.scale.max(analytic.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max));
    let mut used = vec![false; numeric.eigenvalues.len()];
    let mut entries = Vec::new();
    for g in groups {
        let target = C64::new(g.value, 0.0);
        let mut candidates: Vec<usize> = (0..numeric.eigenvalues.len()).filter(|&k| !used[k]).collect();
        candidates.sort_by(|&p, &q| {
            (numeric.eigenvalues[p] - target).norm().total_cmp(&(numeric.eigenvalues[q] - target).norm())
        });
        let take: Vec<usize> = candidates.into_iter().take(g.multiplicity).collect();
        for &k in &take {
            used[k] = true;
        }
        let matched: Vec<C64> = take.iter().map(|&k| numeric.eigenvalues[k]).collect();
        let rel_error = matched.iter().map(|&z| relative_error(z, target, scale)).fold(0.0, f64::max);
        let found_multiplicity =
            numeric.eigenvalues.iter().filter(|&&z| relative_error(z, target, scale) <= rel_tol).count();
        let ok = matched.len() == g.multiplicity && rel_error <= rel_tol && found_multiplicity == g.multiplicity;
        entries.push(EntryMatch {
            label: g.label,
            analytic: g.value,
            expected_multiplicity: g.multiplicity,
            matched,
            found_multiplicity,
            rel_error: if take.len() == g.multiplicity { rel_error } else { f64::INFINITY },
            ok,
        });
    }
    let unmatched: Vec<C64> = (0..used.len()).filter(|&k| !used[k]).map(|k| numeric.eigenvalues[k]).collect();
    let max_rel_error = entries.iter().map(|e| e.rel_error).fold(0.0, f64::max);
    let multiplicities_exact = entries.iter().all(|e| e.found_multiplicity == e.expected_multiplicity);
    let all_match = entries.iter().all(|e| e.ok) && unmatched.is_empty();
    SpectrumMatch { entries, unmatched, max_rel_error, multiplicities_exact, all_match }
}

/// For each value in `a`, the relative distance to the nearest value in `b`.
pub fn nearest_match_errors(a: &[C64], b: &[C64], scale: f64) -> Vec<(C64, C64, f64)> {
    a.iter()
        .map(|&x| {
            let best = b
                .iter()
                .copied()
                .min_by(|p, q| (p - x).norm().total_cmp(&(q - x).norm()))
                .unwrap_or(C64::new(f64::NAN, f64::NAN));
            (x, best, relative_error(best, x, scale))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Splitting {
    pub gap: f64,
    pub second_rate: f64,
    pub ratio: f64,
    pub metastable: bool,
}

pub const DEFAULT_SPLITTING_THRESHOLD: f64 = 10.0;

/// Ratio of the second rate to the gap; large ratios mean metastability.
pub fn splitting_diagnostic(report: &SpectrumReport, threshold: f64) -> Result<Splitting> {
    let second = report
        .second_rate
        .ok_or_else(|| Error::Unavailable("spectrum has fewer than two separated nonzero rates".into()))?;
    if !(report.gap > 0.0) {
        return Err(Error::Unavailable("spectrum has no positive gap".into()));
    }
    let ratio = second / report.gap;
    Ok(Splitting { gap: report.gap, second_rate: second, ratio, metastable: ratio > threshold })
}

/// Spectrum of an explicit sparse matrix by shift-invert; see [`eigs_near`].
pub fn eigenvalues_near(m: &SparseMatrix, count: usize, shift: C64) -> Result<Vec<C64>> {
    let opts = ShiftInvertOptions { count, shift, ..Default::default() };
    Ok(eigs_near(m, &opts)?.into_iter().map(|p| p.value).collect())
}
