use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64};
use crate::operators::SystemSpace;

/// Which Hilbert space a state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// Two atoms and the cavity; cutoff 1 is the atoms alone.
    System(SystemSpace),
    /// One atom.
    Qubit,
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        match self {
            StateSpace::System(s) => s.dim(),
            StateSpace::Qubit => 2,
        }
    }
}

/// Tolerances used when validating a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSlack {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl StateSlack {
    pub const STRICT: StateSlack = StateSlack { hermiticity: 1e-10, trace: 1e-8, positivity: 1e-8 };
    /// Looser bound for states produced by numerical integration.
    pub const INTEGRATION: StateSlack = StateSlack { hermiticity: 1e-6, trace: 1e-6, positivity: 1e-6 };
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    space: StateSpace,
}

/// Worst violations of the density-matrix conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDefects {
    pub hermiticity: f64,
    pub trace: f64,
    /// `max(0, -lambda_min)`.
    pub negativity: f64,
}

impl StateDefects {
    pub fn within(&self, slack: &StateSlack) -> bool {
        self.hermiticity <= slack.hermiticity && self.trace <= slack.trace && self.negativity <= slack.positivity
    }
}

pub fn state_defects(m: &ComplexMatrix) -> Result<StateDefects> {
    let hermiticity = m.hermiticity_defect();
    let trace = (m.trace() - C64::new(1.0, 0.0)).norm();
    // positivity is judged on the Hermitian part
    let herm = (m + &m.adjoint()).scale_real(0.5);
    let lmin = eig_hermitian(&herm)?.eigenvalues.first().copied().unwrap_or(0.0);
    Ok(StateDefects { hermiticity, trace, negativity: (-lmin).max(0.0) })
}

impl DensityMatrix {
    /// Wraps a matrix without validation; callers guarantee the invariants.
    pub(crate) fn from_parts(matrix: ComplexMatrix, space: StateSpace) -> Self {
        debug_assert_eq!(matrix.rows(), space.dim());
        Self { matrix, space }
    }

    pub fn new(matrix: ComplexMatrix, space: StateSpace) -> Result<Self> {
        Self::with_slack(matrix, space, &StateSlack::STRICT)
    }

    pub fn with_slack(matrix: ComplexMatrix, space: StateSpace, slack: &StateSlack) -> Result<Self> {
        if matrix.rows() != space.dim() || matrix.cols() != space.dim() {
            return Err(Error::Shape(format!(
                "state is {}x{} but its space has dimension {}",
                matrix.rows(),
                matrix.cols(),
                space.dim()
            )));
        }
        matrix.check_finite()?;
        let d = state_defects(&matrix)?;
        if !d.within(slack) {
            return Err(Error::StateValidity(format!(
                "hermiticity defect {:.3e}, trace defect {:.3e}, negativity {:.3e}",
                d.hermiticity, d.trace, d.negativity
            )));
        }
        Ok(Self { matrix, space })
    }

    /// `|psi><psi|` for a normalized ket.
    pub fn pure(ket: &[C64], space: StateSpace) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Argument("zero ket".into()));
        }
        let psi: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&psi, &psi), space)
    }

    /// Both atoms in the ground state and the cavity in vacuum.
    pub fn ground(space: &SystemSpace) -> Self {
        let mut m = ComplexMatrix::zeros(space.dim(), space.dim());
        m[(0, 0)] = C64::new(1.0, 0.0);
        Self { matrix: m, space: StateSpace::System(*space) }
    }

    pub fn maximally_mixed(space: StateSpace) -> Self {
        let n = space.dim();
        Self { matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64), space }
    }

    /// Random full-rank state `G G† / Tr(G G†)` with Gaussian `G`.
    pub fn random<R: Rng + ?Sized>(space: StateSpace, rng: &mut R) -> Self {
        let n = space.dim();
        let g = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        let mut m = gg.scale_real(1.0 / tr);
        // exact Hermiticity despite rounding in the product
        m = (&m + &m.adjoint()).scale_real(0.5);
        Self { matrix: m, space }
    }

    /// Places an atomic state next to the cavity vacuum.
    pub fn atoms_with_vacuum(atoms: &DensityMatrix, space: &SystemSpace) -> Result<Self> {
        match atoms.space {
            StateSpace::System(s) if s.is_atomic() => {}
            _ => return Err(Error::Shape("expected a two-atom state".into())),
        }
        let n = space.fock_cutoff();
        let m = ComplexMatrix::from_fn(space.dim(), space.dim(), |i, j| {
            if i % n == 0 && j % n == 0 {
                atoms.matrix[(i / n, j / n)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { matrix: m, space: StateSpace::System(*space) })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn vec(&self) -> Vec<C64> {
        self.matrix.vec()
    }

    pub fn defects(&self) -> Result<StateDefects> {
        state_defects(&self.matrix)
    }

    /// Mixture `p self + (1 - p) other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Shape("cannot mix states on different spaces".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("mixing weight {p} outside [0, 1]")));
        }
        Ok(Self { matrix: &self.matrix.scale_real(p) + &other.matrix.scale_real(1.0 - p), space: self.space })
    }

    /// Conjugation `U rho U†` by a unitary.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::Shape("unitary has the wrong size".into()));
        }
        let m = &(u * &self.matrix) * &u.adjoint();
        Self::new(m, self.space)
    }
}

/// Time-ordered states of one evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub model: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Maps every state through `f`.
    pub fn map<T>(&self, f: impl FnMut(&DensityMatrix) -> Result<T>) -> Result<Vec<T>> {
        self.states.iter().map(f).collect()
    }
}
