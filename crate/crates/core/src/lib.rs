//! Numerical engine for two two-level atoms coupled to a leaky cavity mode.
//!
//! The crate builds Lindblad generators for the driven (coherent) and thermal
//! (incoherent) cases, their displaced-frame and adiabatically eliminated
//! variants, and analyses them through Liouvillian spectra, time evolution and
//! the mutual information between the atoms.
//!
//! Conventions used everywhere:
//!
//! * rates and times are in units of the cavity decay rate, `kappa = 1`;
//! * the dissipator is `D[O]rho = 2 O rho O^dag - O^dag O rho - rho O^dag O`;
//! * the Hilbert space is ordered `atom1 ⊗ atom2 ⊗ field`, with `|g> = 0` and
//!   `|e> = 1` for each atom;
//! * density matrices are vectorized by stacking columns.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod operators;
pub mod spectra;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
