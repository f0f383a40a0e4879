use cavity_relax::dynamics::*;
use cavity_relax::linalg::{eig_general, ComplexMatrix, OdeOptions, C64};
use cavity_relax::models::*;
use cavity_relax::observables::{atomic_mutual_information, mutual_information, photon_number, trace_distance};
use cavity_relax::operators::{annihilation, basis_ket, LabeledOperator, SystemSpace};
use cavity_relax::spectra::{analyze, analyze_with, AnalyzeOptions, SpectrumMethod};
use cavity_relax::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn atomic() -> StateSpace {
    StateSpace::System(SystemSpace::atomic())
}

fn cavity_decay(space: &SystemSpace) -> Superoperator {
    let zero = LabeledOperator::named("0", ComplexMatrix::zeros(space.dim(), space.dim()), *space).unwrap();
    let mut me = MasterEquation::new(ModelKind::Custom, *space, zero).unwrap();
    me.add_dissipator(annihilation(space), 1.0).unwrap();
    vectorize(&me, true).unwrap()
}

fn singlet() -> DensityMatrix {
    let s = 0.5f64.sqrt();
    DensityMatrix::pure(&[c(0.0), c(s), c(-s), c(0.0)], atomic()).unwrap()
}

fn gg() -> DensityMatrix {
    DensityMatrix::ground(&SystemSpace::atomic())
}

#[test]
fn photon_number_decays_at_twice_kappa() {
    let space = SystemSpace::new(3).unwrap();
    let sup = cavity_decay(&space);
    let rho0 = DensityMatrix::pure(&basis_ket(&space, 0, 0, 1).unwrap(), StateSpace::System(space)).unwrap();
    let grid = linear_time_grid(3.0, 31).unwrap();
    let traj = evolve_ode(&sup, &rho0, &grid, &OdeOptions::default()).unwrap();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        assert!((photon_number(s).unwrap() - (-2.0 * t).exp()).abs() < 1e-8, "t = {t}");
    }
    let ss = steady_state(&sup, Some(&rho0)).unwrap();
    assert!((ss.matrix() - DensityMatrix::ground(&space).matrix()).max_abs() < 1e-10);
}

#[test]
fn zero_generator_keeps_state() {
    let sup = Superoperator::from_dense(4, ComplexMatrix::zeros(16, 16)).unwrap();
    let rho0 = DensityMatrix::random(atomic(), &mut ChaCha8Rng::seed_from_u64(3));
    let traj = evolve_ode(&sup, &rho0, &[0.0, 1.0, 10.0], &OdeOptions::default()).unwrap();
    assert!(traj.states.iter().all(|s| s == &rho0));
}

#[test]
fn grids_are_validated() {
    let sup = Superoperator::from_dense(4, ComplexMatrix::zeros(16, 16)).unwrap();
    assert!(matches!(evolve_ode(&sup, &gg(), &[1.0, 2.0], &OdeOptions::default()), Err(Error::Argument(_))));
    assert!(matches!(evolve_ode(&sup, &gg(), &[0.0, 2.0, 1.0], &OdeOptions::default()), Err(Error::Argument(_))));
    let g = log_time_grid(0.1, 1e3, 5).unwrap();
    assert_eq!(g[0], 0.0);
    assert_eq!(g.len(), 6);
    assert!((g[5] - 1e3).abs() < 1e-9);
}

#[test]
fn spectral_and_ode_paths_agree() {
    let me = build_effective_coherent(&ModelParams::coherent(0.25, 10.0).unwrap()).unwrap();
    let sup = vectorize(&me, true).unwrap();
    let decomp = eig_general(&sup.to_dense().unwrap()).unwrap();
    let grid = log_time_grid(0.1, 2e3, 25).unwrap();
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let rho0 = DensityMatrix::random(atomic(), &mut rng);
        let a = evolve_spectral(&decomp, &rho0, &grid).unwrap();
        let b = evolve_ode(&sup, &rho0, &grid, &opts).unwrap();
        assert!(trace_distance(&a.states[0], &rho0).unwrap() < 1e-12);
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(trace_distance(x, y).unwrap() < 1e-6);
        }
    }
}

#[test]
fn sector_reduced_evolution_matches_full() {
    let space = SystemSpace::new(4).unwrap();
    let sup = vectorize(&build_incoherent(&space, &ModelParams::thermal(0.3, 0.5).unwrap()).unwrap(), true).unwrap();
    let rho0 = DensityMatrix::ground(&space);
    let grid = linear_time_grid(20.0, 11).unwrap();
    let (reduced, info) = evolve(&sup, &rho0, &grid, &EvolveOptions::default()).unwrap();
    assert!(info.sector_dim < sup.dim());
    assert_eq!(info.method, EvolutionMethod::Spectral);
    let full = evolve_ode(&sup, &rho0, &grid, &OdeOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() }).unwrap();
    for (x, y) in reduced.states.iter().zip(&full.states) {
        assert!(trace_distance(x, y).unwrap() < 1e-7);
    }
    assert_eq!(reduced.model, "incoherent");
}

#[test]
fn dark_singlet_is_stationary() {
    let sup = vectorize(&build_effective_incoherent(&ModelParams::thermal(0.5, 0.0).unwrap()).unwrap(), true).unwrap();
    let ss = steady_state(&sup, Some(&singlet())).unwrap();
    assert!(trace_distance(&ss, &singlet()).unwrap() < 1e-9);
}

#[test]
fn thermal_steady_state_from_ground() {
    // collective jumps keep the triplet; detailed balance on its ladder gives
    // populations proportional to r^m with r = n/(n+1)
    let n = 10.0;
    let sup = vectorize(&build_effective_incoherent(&ModelParams::thermal(0.1, n).unwrap()).unwrap(), true).unwrap();
    let rep = steady_state_report(&sup, Some(&gg())).unwrap();
    let r = n / (n + 1.0);
    let z = 1.0 + r + r * r;
    let s = 0.5f64.sqrt();
    let t_plus = DensityMatrix::pure(&[c(0.0), c(s), c(s), c(0.0)], atomic()).unwrap();
    let ee = DensityMatrix::pure(&[c(0.0), c(0.0), c(0.0), c(1.0)], atomic()).unwrap();
    let oracle = ComplexMatrix::from_fn(4, 4, |i, j| {
        gg().matrix()[(i, j)] * (1.0 / z) + t_plus.matrix()[(i, j)] * (r / z) + ee.matrix()[(i, j)] * (r * r / z)
    });
    assert!((rep.state.matrix() - &oracle).max_abs() < 1e-9);
    assert!(rep.residual < 1e-10);
    assert_eq!(rep.kernel_dim, 2);
    let mi = mutual_information(&rep.state).unwrap();
    let mi_oracle = mutual_information(&DensityMatrix::new(oracle, atomic()).unwrap()).unwrap();
    assert!(mi > 0.0 && (mi - mi_oracle).abs() < 1e-8);
}

#[test]
fn degenerate_kernel_needs_initial_state() {
    let sup = vectorize(&build_effective_coherent(&ModelParams::coherent(0.25, 10.0).unwrap()).unwrap(), true).unwrap();
    assert!(matches!(steady_state(&sup, None), Err(Error::Ambiguity(_))));
    let rho0 = DensityMatrix::random(atomic(), &mut ChaCha8Rng::seed_from_u64(1));
    let rep = steady_state_report(&sup, Some(&rho0)).unwrap();
    assert!(rep.residual < 1e-10);
    // the projection is the long-time limit of the evolution
    let late = evolve(&sup, &rho0, &[0.0, 2e4], &EvolveOptions::default()).unwrap().0;
    assert!(trace_distance(&late.states[1], &rep.state).unwrap() < 1e-9);
}

#[test]
fn detector_decay_removes_correlations() {
    let space = SystemSpace::new(6).unwrap();
    let p = ModelParams::new(0.1, 10f64.sqrt(), 0.0, 1e-3).unwrap();
    let sup = vectorize(&build_full_displaced(&space, &p).unwrap(), true).unwrap();
    let rep = steady_state_report(&sup, None).unwrap();
    assert_eq!(rep.kernel_dim, 1);
    assert!(rep.residual < 1e-10);
    assert!(atomic_mutual_information(&rep.state).unwrap() < 1e-3);
}

fn fit_case(sup: &Superoperator, gap: f64, seed: u64) -> RelaxationEstimate {
    let rho0 = DensityMatrix::random(atomic(), &mut ChaCha8Rng::seed_from_u64(seed));
    let rho_ss = steady_state(sup, Some(&rho0)).unwrap();
    let grid = linear_time_grid(10.0 / gap, 400).unwrap();
    let (traj, _) = evolve(sup, &rho0, &grid, &EvolveOptions::default()).unwrap();
    fit_relaxation(&traj, &rho_ss).unwrap()
}

#[test]
fn fitted_relaxation_times() {
    let coh = vectorize(&build_effective_coherent(&ModelParams::coherent(0.25, 10.0).unwrap()).unwrap(), true).unwrap();
    let est = fit_case(&coh, 2.5e-3, 11);
    assert_eq!(est.method, RelaxationMethod::TrajectoryFit);
    assert!((est.tau_fit / 400.0 - 1.0).abs() < 0.05, "{est:?}");
    let inc = vectorize(&build_effective_incoherent(&ModelParams::thermal(0.1, 1.0).unwrap()).unwrap(), true).unwrap();
    let est = fit_case(&inc, 0.02, 12);
    assert!((est.tau_fit / 50.0 - 1.0).abs() < 0.05, "{est:?}");
    let spectral = RelaxationEstimate::from_spectrum(&analyze(&inc, 1e-9, 1e-7).unwrap()).unwrap();
    assert!((spectral.tau_fit - 50.0).abs() < 1e-8);
}

#[test]
fn short_trajectories_are_rejected() {
    let coh = vectorize(&build_effective_coherent(&ModelParams::coherent(0.25, 10.0).unwrap()).unwrap(), true).unwrap();
    let rho0 = DensityMatrix::random(atomic(), &mut ChaCha8Rng::seed_from_u64(2));
    let rho_ss = steady_state(&coh, Some(&rho0)).unwrap();
    let (traj, _) = evolve(&coh, &rho0, &linear_time_grid(50.0, 20).unwrap(), &EvolveOptions::default()).unwrap();
    assert!(matches!(fit_relaxation(&traj, &rho_ss), Err(Error::FitWindow(_))));
}

fn mi_series(sup: &Superoperator, t_max: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = log_time_grid(0.1, t_max, 300).unwrap();
    let (traj, _) = evolve(sup, &gg(), &grid, &EvolveOptions::default()).unwrap();
    (traj.times.clone(), traj.map(mutual_information).unwrap())
}

#[test]
fn plateau_only_with_time_scale_separation() {
    let coh =
        vectorize(&build_effective_coherent(&ModelParams::coherent(0.125, 1000.0).unwrap()).unwrap(), true).unwrap();
    let (t, mi) = mi_series(&coh, 1e9);
    let w = detect_plateau(&t, &mi, None).unwrap();
    assert_eq!(w.len(), 1, "{w:?}");
    assert!(w[0].decades >= 1.0 && w[0].level > 0.1, "{w:?}");
    assert!(w[0].t_start > 64.0 && w[0].t_end < 4e6, "{w:?}");

    let inc = vectorize(&build_effective_incoherent(&ModelParams::thermal(0.1, 10.0).unwrap()).unwrap(), true).unwrap();
    let (t, mi) = mi_series(&inc, 1e5);
    assert!(detect_plateau(&t, &mi, None).unwrap().is_empty());
}

fn displaced_gap(me: &MasterEquation) -> cavity_relax::Result<f64> {
    let sup = vectorize(me, false)?;
    let method = SpectrumMethod::ShiftInvert { count: 8, shift: C64::new(1e-3, 0.0) };
    Ok(analyze_with(&sup, &AnalyzeOptions { method, zero_tol: 1e-12, ..Default::default() })?.gap)
}

#[test]
fn truncation_convergence() {
    let opts = TruncationOptions::default();
    let off =
        check_truncation(build_coherent_displaced, &ModelParams::coherent(0.0, 5.0).unwrap(), displaced_gap, &opts)
            .unwrap();
    assert_eq!(off.cutoff, 4);
    let on =
        check_truncation(build_coherent_displaced, &ModelParams::coherent(0.5, 5.0).unwrap(), displaced_gap, &opts)
            .unwrap();
    assert!(on.cutoff <= 16, "{on:?}");
    let tight = TruncationOptions { rel_tol: 0.0, abs_tol: 0.0, cap: 16, ..Default::default() };
    assert!(matches!(
        check_truncation(build_coherent_displaced, &ModelParams::coherent(0.5, 5.0).unwrap(), displaced_gap, &tight),
        Err(Error::NonConvergence(_))
    ));
}

#[test]
fn hermitian_propagator_matches_plain_spectral_evolution() {
    let space = SystemSpace::new(3).unwrap();
    let sup = vectorize(&build_coherent_displaced(&space, &ModelParams::coherent(0.25, 3.0).unwrap()).unwrap(), true)
        .unwrap();
    let rho0 = DensityMatrix::random(StateSpace::System(space), &mut ChaCha8Rng::seed_from_u64(21));
    let grid = log_time_grid(0.1, 1e4, 25).unwrap();
    let (a, info) = evolve(&sup, &rho0, &grid, &EvolveOptions::default()).unwrap();
    assert_eq!(info.method, EvolutionMethod::Spectral);
    let b = evolve_spectral(&eig_general(&sup.to_dense().unwrap()).unwrap(), &rho0, &grid).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!(trace_distance(x, y).unwrap() < 1e-9);
    }
}

#[test]
fn long_times_keep_trace_and_hermiticity() {
    // fast coherent rotation on top of very slow relaxation
    let space = SystemSpace::new(3).unwrap();
    let sup =
        vectorize(&build_rwa_displaced(&space, &ModelParams::coherent(0.25, 1000.0).unwrap()).unwrap(), true).unwrap();
    let grid = log_time_grid(1.0, 1e9, 40).unwrap();
    let (traj, _) = evolve(&sup, &DensityMatrix::ground(&space), &grid, &EvolveOptions::default()).unwrap();
    for s in &traj.states {
        assert!((s.matrix().trace() - c(1.0)).norm() < 1e-13);
        assert!(s.matrix().hermiticity_defect() == 0.0);
    }
}

#[test]
fn propagator_needs_a_closed_sector() {
    let sup = cavity_decay(&SystemSpace::new(2).unwrap());
    let l = sup.to_sparse();
    // position (0, 1) without its transpose partner
    let idx = [8usize];
    let sub = l.restrict(&idx).unwrap();
    assert!(HermitianPropagator::new(&sub, &idx, 8).unwrap().is_none());
}

#[test]
fn weakly_driven_effective_model_evolves_from_ground() {
    let p = ModelParams::coherent(0.1, 10f64.sqrt()).unwrap();
    let sup = vectorize(&build_effective_coherent(&p).unwrap(), true).unwrap();
    let times = log_time_grid(0.1, 1e7, 161).unwrap();
    let (traj, _) = evolve(&sup, &gg(), &times, &EvolveOptions::default()).unwrap();
    let mi = traj.map(atomic_mutual_information).unwrap();
    assert!(mi.iter().all(|m| m.is_finite() && *m >= 0.0));
}
