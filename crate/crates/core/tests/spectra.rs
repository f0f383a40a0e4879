use cavity_relax::linalg::C64;
use cavity_relax::models::*;
use cavity_relax::operators::SystemSpace;
use cavity_relax::spectra::*;
use proptest::prelude::*;

fn effective_coherent_report(g0: f64, eps: f64) -> SpectrumReport {
    let sup = vectorize(&build_effective_coherent(&ModelParams::coherent(g0, eps).unwrap()).unwrap(), true).unwrap();
    analyze(&sup, 1e-9, 1e-7).unwrap()
}

fn effective_incoherent_report(g0: f64, n_th: f64) -> SpectrumReport {
    let sup = vectorize(&build_effective_incoherent(&ModelParams::thermal(g0, n_th).unwrap()).unwrap(), true).unwrap();
    analyze(&sup, 1e-9, 1e-7).unwrap()
}

#[test]
fn coherent_gap_and_kernel() {
    let r = effective_coherent_report(0.25, 10.0);
    assert!((r.gap - 2.5e-3).abs() < 1e-12);
    assert_eq!(r.kernel_dim, 2);
    assert!(!r.near_defective);
    assert!((r.relaxation_time().unwrap() - 400.0).abs() < 1e-6);
}

#[test]
fn incoherent_gap() {
    let r = effective_incoherent_report(0.1, 1.0);
    assert!((r.gap - 0.02).abs() < 1e-12);
    assert_eq!(r.kernel_dim, 2);
    let r = effective_incoherent_report(0.01, 10.0);
    assert!((r.gap - 2e-3).abs() < 1e-12);
}

#[test]
fn analytic_table_values() {
    let a = analytic_coherent(&ModelParams::coherent(0.25, 100.0).unwrap()).unwrap();
    assert!((a.entry("λ3").unwrap().value + 0.0625125).abs() < 1e-12);
    assert!((a.gap() - 2.5e-5).abs() < 1e-15);
    let a = analytic_incoherent(&ModelParams::thermal(1.0, 1.0).unwrap()).unwrap();
    assert!((a.entry("λ2").unwrap().value - (-9.0 + 33f64.sqrt())).abs() < 1e-12);
    let a = analytic_incoherent(&ModelParams::thermal(1.0, 0.0).unwrap()).unwrap();
    assert_eq!(a.entry("λ1").unwrap().value, 0.0);
    assert!((a.entry("λ2").unwrap().value + 2.0).abs() < 1e-12);
    assert!((a.entry("λ5").unwrap().value + 4.0).abs() < 1e-12);
    assert!((a.entry("λ7").unwrap().value + 4.0).abs() < 1e-12);
    let a = analytic_incoherent(&ModelParams::thermal(0.01, 10.0).unwrap()).unwrap();
    assert!((1.0 / a.gap() - 500.0).abs() < 1e-9);
}

#[test]
fn incoherent_tables_match_at_listed_temperatures() {
    for n in [0.5, 1.0, 2.0] {
        let p = ModelParams::thermal(0.3, n).unwrap();
        let m = compare_spectra(&effective_incoherent_report(0.3, n), &analytic_incoherent(&p).unwrap(), 1e-10);
        assert!(m.all_match && m.multiplicities_exact, "n_th = {n}: {m:?}");
    }
}

#[test]
fn displaced_gap_approaches_formula() {
    let space = SystemSpace::new(8).unwrap();
    let p = ModelParams::coherent(0.25, 100.0).unwrap();
    let sup = vectorize(&build_coherent_displaced(&space, &p).unwrap(), true).unwrap();
    let r =
        analyze_with(&sup, &AnalyzeOptions { zero_tol: 1e-12, want_condition: false, ..Default::default() }).unwrap();
    let exact = analytic_coherent(&p).unwrap().gap();
    assert!(((r.gap - exact) / exact).abs() < 0.1, "gap {} vs {exact}", r.gap);
    // the atomic singlet is dark, so it carries its own stationary state
    assert_eq!(r.kernel_dim, 2);
}

#[test]
fn lab_frame_spectrum_is_stable_and_conjugate_symmetric() {
    let space = SystemSpace::new(4).unwrap();
    for me in [
        build_coherent(&space, &ModelParams::coherent(0.25, 1.0).unwrap()).unwrap(),
        build_incoherent(&space, &ModelParams::thermal(0.3, 0.5).unwrap()).unwrap(),
        build_full(&space, &ModelParams::new(0.2, 0.7, 0.3, 0.1).unwrap()).unwrap(),
    ] {
        let r = analyze(&vectorize(&me, true).unwrap(), 1e-9, 1e-7).unwrap();
        assert!(r.kernel_dim >= 1);
        assert_eq!(r.clusters.iter().map(|c| c.count).sum::<usize>(), r.eigenvalues.len());
        for z in &r.eigenvalues {
            assert!(z.re <= 1e-9 * r.scale, "{z}");
            let partner = r.eigenvalues.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(partner < 1e-8 * r.scale, "{z} has no conjugate partner");
        }
    }
}

#[test]
fn shift_invert_agrees_with_dense() {
    let space = SystemSpace::new(6).unwrap();
    let sup = vectorize(&build_coherent_displaced(&space, &ModelParams::coherent(0.25, 2.0).unwrap()).unwrap(), false)
        .unwrap();
    let dense = analyze_with(
        &sup,
        &AnalyzeOptions { method: SpectrumMethod::Dense, want_condition: false, ..Default::default() },
    )
    .unwrap();
    let method = SpectrumMethod::ShiftInvert { count: 12, shift: C64::new(1e-3, 0.0) };
    let si = analyze_with(&sup, &AnalyzeOptions { method, ..Default::default() }).unwrap();
    assert!(!si.complete);
    for (_, _, err) in nearest_match_errors(&si.eigenvalues, &dense.eigenvalues, dense.scale) {
        assert!(err < 1e-8, "{err}");
    }
    // every dense eigenvalue closer to the shift than the farthest one found is found
    let radius = si.eigenvalues.iter().map(|z| (z - C64::new(1e-3, 0.0)).norm()).fold(0.0, f64::max);
    let inner: Vec<C64> =
        dense.eigenvalues.iter().copied().filter(|z| (z - C64::new(1e-3, 0.0)).norm() < 0.99 * radius).collect();
    for (_, _, err) in nearest_match_errors(&inner, &si.eigenvalues, dense.scale) {
        assert!(err < 1e-8, "{err}");
    }
    assert!(((si.gap - dense.gap) / dense.gap).abs() < 1e-8);
}

#[test]
fn gaps_are_monotone() {
    let gaps: Vec<f64> =
        [2.0, 5.0, 10.0, 50.0, 200.0].iter().map(|&e| effective_coherent_report(0.25, e).gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    let gaps: Vec<f64> = [0.1, 0.5, 1.0, 3.0, 10.0].iter().map(|&n| effective_incoherent_report(0.1, n).gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
}

#[test]
fn metastability_diagnostic() {
    let s = splitting_diagnostic(&effective_coherent_report(0.25, 1000.0), DEFAULT_SPLITTING_THRESHOLD).unwrap();
    assert!(s.metastable);
    assert!((s.ratio / 2.5e5 - 1.0).abs() < 1e-3, "{}", s.ratio);
    let weak = splitting_diagnostic(&effective_coherent_report(0.125, 10.0), DEFAULT_SPLITTING_THRESHOLD).unwrap();
    assert!(weak.ratio < s.ratio);
    let inc = effective_incoherent_report(0.01, 10.0);
    assert!(inc.second_rate.is_none_or(|r| r / inc.gap < DEFAULT_SPLITTING_THRESHOLD));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn coherent_table_matches_numerics(g0 in 0.05f64..1.0, eps in 2.0f64..50.0) {
        let p = ModelParams::coherent(g0, eps).unwrap();
        let m = compare_spectra(&effective_coherent_report(g0, eps), &analytic_coherent(&p).unwrap(), 1e-10);
        prop_assert!(m.all_match && m.multiplicities_exact, "{:?}", m);
    }

    #[test]
    fn incoherent_table_matches_numerics(g0 in 0.05f64..1.0, n_th in 0.1f64..5.0) {
        let p = ModelParams::thermal(g0, n_th).unwrap();
        let m = compare_spectra(&effective_incoherent_report(g0, n_th), &analytic_incoherent(&p).unwrap(), 1e-10);
        prop_assert!(m.all_match && m.multiplicities_exact, "{:?}", m);
    }
}
