//! Time evolution, stationary states, relaxation fits, plateau detection and
//! Fock-cutoff convergence.

pub mod density;
pub mod evolve;
pub mod fit;
pub mod plateau;
pub mod propagator;
pub mod steady;
pub mod truncation;

pub use density::{state_defects, DensityMatrix, StateDefects, StateSlack, StateSpace, Trajectory};
pub use evolve::{
    evolve, evolve_ode, evolve_spectral, linear_time_grid, log_time_grid, reachable_sector, EvolutionInfo,
    EvolutionMethod, EvolveOptions,
};
pub use fit::{
    distances, fit_distance_series, fit_relaxation, fit_relaxation_with, FitOptions, RelaxationEstimate,
    RelaxationMethod,
};
pub use plateau::{detect_plateau, PlateauWindow};
pub use propagator::HermitianPropagator;
pub use steady::{steady_state, steady_state_report, SteadyStateReport};
pub use truncation::{check_truncation, TruncationOptions, TruncationResult};
