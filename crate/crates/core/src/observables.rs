//! Reduced states, entropies, mutual information, distances and photon number.

use crate::dynamics::{DensityMatrix, StateSpace};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, singular_values, ComplexMatrix, C64};
use crate::operators::SystemSpace;

/// Eigenvalues more negative than this make an entropy evaluation fail.
pub const ENTROPY_NEGATIVITY_SLACK: f64 = 1e-8;
/// Mutual information below `-MI_SLACK` is an error; values in between are clipped to 0.
pub const MI_SLACK: f64 = 1e-9;
/// Clipped values smaller than this in magnitude are rounding noise and only logged at debug level.
pub const MI_ROUNDOFF: f64 = 1e-12;

/// State of the two atoms, a 4x4 density matrix on `atom1 ⊗ atom2`.
pub type AtomicState = DensityMatrix;

fn system_space(rho: &DensityMatrix) -> Result<SystemSpace> {
    match rho.space() {
        StateSpace::System(s) => Ok(s),
        StateSpace::Qubit => Err(Error::Shape("expected a two-atom state, got a single qubit".into())),
    }
}

/// Traces out the cavity. Atomic-only input is returned unchanged.
pub fn partial_trace_field(rho: &DensityMatrix) -> Result<AtomicState> {
    let space = system_space(rho)?;
    if space.is_atomic() {
        log::warn!("partial_trace_field called on an atomic-only state; returning it unchanged");
        return Ok(rho.clone());
    }
    Ok(reduce_to_atoms(rho.matrix(), &space))
}

/// Atomic block sum of a full-space matrix, without validation.
pub(crate) fn reduce_to_atoms(m: &ComplexMatrix, space: &SystemSpace) -> DensityMatrix {
    let n = space.fock_cutoff();
    let out = ComplexMatrix::from_fn(4, 4, |i, j| (0..n).map(|k| m[(i * n + k, j * n + k)]).sum());
    DensityMatrix::from_parts(out, StateSpace::System(SystemSpace::atomic()))
}

/// Reduced state of atom `keep` (1 or 2).
pub fn partial_trace_atom(rho_at: &AtomicState, keep: usize) -> Result<DensityMatrix> {
    let space = system_space(rho_at)?;
    if !space.is_atomic() {
        return Err(Error::Shape("partial_trace_atom needs an atomic state; trace out the field first".into()));
    }
    let m = rho_at.matrix();
    let out = match keep {
        // index = 2 a1 + a2
        1 => ComplexMatrix::from_fn(2, 2, |i, j| (0..2).map(|k| m[(2 * i + k, 2 * j + k)]).sum()),
        2 => ComplexMatrix::from_fn(2, 2, |i, j| (0..2).map(|k| m[(2 * k + i, 2 * k + j)]).sum()),
        _ => return Err(Error::Argument(format!("atom index must be 1 or 2, got {keep}"))),
    };
    Ok(DensityMatrix::from_parts(out, StateSpace::Qubit))
}

/// Von Neumann entropy `-Tr(rho log2 rho)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of(rho.matrix())
}

fn entropy_of(m: &ComplexMatrix) -> Result<f64> {
    let herm = (m + &m.adjoint()).scale_real(0.5);
    let ev = eig_hermitian(&herm)?.eigenvalues;
    let mut s = 0.0;
    for p in ev {
        if p < -ENTROPY_NEGATIVITY_SLACK {
            return Err(Error::StateValidity(format!("eigenvalue {p:.3e} is below the entropy slack")));
        }
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s.max(0.0))
}

/// `I = S(rho_1) + S(rho_2) - S(rho_at)` in bits.
pub fn mutual_information(rho_at: &AtomicState) -> Result<f64> {
    let s1 = von_neumann_entropy(&partial_trace_atom(rho_at, 1)?)?;
    let s2 = von_neumann_entropy(&partial_trace_atom(rho_at, 2)?)?;
    let s12 = von_neumann_entropy(rho_at)?;
    let mi = s1 + s2 - s12;
    if mi < -MI_SLACK {
        return Err(Error::StateValidity(format!("mutual information {mi:.3e} is negative beyond slack")));
    }
    if mi < 0.0 {
        if mi < -MI_ROUNDOFF {
            log::warn!("clipping mutual information {mi:.3e} to 0");
        } else {
            log::debug!("clipping mutual information {mi:.3e} to 0");
        }
        return Ok(0.0);
    }
    Ok(mi)
}

/// Mutual information of the atoms in a full-space state.
pub fn atomic_mutual_information(rho: &DensityMatrix) -> Result<f64> {
    let space = system_space(rho)?;
    if space.is_atomic() {
        mutual_information(rho)
    } else {
        mutual_information(&reduce_to_atoms(rho.matrix(), &space))
    }
}

/// Trace norm `Tr sqrt(X† X)`.
pub fn trace_norm(x: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(x)?.iter().sum())
}

/// `|rho - sigma|` in the trace norm (orthogonal pure states are at distance 2).
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!("states of dimension {} and {}", rho.dim(), sigma.dim())));
    }
    trace_norm(&(rho.matrix() - sigma.matrix()))
}

/// Mean photon number `Tr(rho a†a)`.
pub fn photon_number(rho: &DensityMatrix) -> Result<f64> {
    let space = system_space(rho)?;
    let n = space.fock_cutoff();
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..space.dim() {
        acc += m[(i, i)] * (i % n) as f64;
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::basis_ket;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn atomic() -> StateSpace {
        StateSpace::System(SystemSpace::atomic())
    }

    fn bell() -> AtomicState {
        let s = 0.5f64.sqrt();
        DensityMatrix::pure(&[c(s), c(0.0), c(0.0), c(s)], atomic()).unwrap()
    }

    #[test]
    fn field_trace_of_product_state() {
        let space = SystemSpace::new(3).unwrap();
        let eg0 = basis_ket(&space, 1, 0, 0).unwrap();
        let rho = DensityMatrix::pure(&eg0, StateSpace::System(space)).unwrap();
        let at = partial_trace_field(&rho).unwrap();
        assert_eq!(at.matrix()[(2, 2)], c(1.0));
        assert!((at.matrix().trace() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn field_trace_of_maximally_mixed() {
        let space = SystemSpace::new(5).unwrap();
        let at = partial_trace_field(&DensityMatrix::maximally_mixed(StateSpace::System(space))).unwrap();
        assert!((at.matrix() - &ComplexMatrix::identity(4).scale_real(0.25)).max_abs() < 1e-15);
    }

    #[test]
    fn atomic_input_passes_through() {
        let b = bell();
        assert_eq!(partial_trace_field(&b).unwrap(), b);
    }

    #[test]
    fn atom_traces() {
        let r1 = partial_trace_atom(&bell(), 1).unwrap();
        assert!((r1.matrix() - &ComplexMatrix::identity(2).scale_real(0.5)).max_abs() < 1e-15);
        let gg = DensityMatrix::pure(&[c(1.0), c(0.0), c(0.0), c(0.0)], atomic()).unwrap();
        let r = partial_trace_atom(&gg, 2).unwrap();
        assert_eq!(r.matrix()[(0, 0)], c(1.0));
        // |ge> keeps atom 1 in g and atom 2 in e
        let ge = DensityMatrix::pure(&[c(0.0), c(1.0), c(0.0), c(0.0)], atomic()).unwrap();
        assert_eq!(partial_trace_atom(&ge, 1).unwrap().matrix()[(0, 0)], c(1.0));
        assert_eq!(partial_trace_atom(&ge, 2).unwrap().matrix()[(1, 1)], c(1.0));
    }

    #[test]
    fn entropies() {
        assert!(von_neumann_entropy(&bell()).unwrap().abs() < 1e-12);
        let half = DensityMatrix::maximally_mixed(StateSpace::Qubit);
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() < 1e-14);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(atomic())).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mutual_information_limits() {
        assert!((mutual_information(&bell()).unwrap() - 2.0).abs() < 1e-12);
        let prod = DensityMatrix::maximally_mixed(atomic());
        assert!(mutual_information(&prod).unwrap().abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let space = SystemSpace::atomic();
        let a = DensityMatrix::pure(&basis_ket(&space, 0, 0, 0).unwrap(), atomic()).unwrap();
        let b = DensityMatrix::pure(&basis_ket(&space, 1, 1, 0).unwrap(), atomic()).unwrap();
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(trace_distance(&a, &b).unwrap(), trace_distance(&b, &a).unwrap());
        assert!(trace_distance(&a, &half_qubit()).is_err());
    }

    fn half_qubit() -> DensityMatrix {
        DensityMatrix::maximally_mixed(StateSpace::Qubit)
    }

    #[test]
    fn photon_numbers() {
        let space = SystemSpace::new(6).unwrap();
        assert_eq!(photon_number(&DensityMatrix::ground(&space)).unwrap(), 0.0);
        let three = DensityMatrix::pure(&basis_ket(&space, 0, 1, 3).unwrap(), StateSpace::System(space)).unwrap();
        assert!((photon_number(&three).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_states_are_rejected() {
        let bad = ComplexMatrix::from_real_diag(&[1.1, -0.1]);
        let rho = DensityMatrix::from_parts(bad, StateSpace::Qubit);
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::StateValidity(_))));
    }
}
