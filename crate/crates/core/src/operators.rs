//! Operators on two qubits ⊗ a truncated cavity mode.
//!
//! Basis index of `|a1, a2, n>` is `(2 a1 + a2) * fock_cutoff + n` with
//! `|g> = 0`, `|e> = 1`. Single-atom dressed states are
//! `|±> = (|g> ± |e>) / sqrt(2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64};

/// Two atoms and a cavity mode keeping Fock states `0..fock_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemSpace {
    fock_cutoff: usize,
}

pub const N_ATOMS: usize = 2;
pub const ATOM_DIM: usize = 4;

impl SystemSpace {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 1 {
            return Err(Error::Argument("fock_cutoff must be at least 1".into()));
        }
        Ok(Self { fock_cutoff })
    }

    /// The pure atomic sector, used by the effective models.
    pub fn atomic() -> Self {
        Self { fock_cutoff: 1 }
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn n_atoms(&self) -> usize {
        N_ATOMS
    }

    pub fn dim(&self) -> usize {
        ATOM_DIM * self.fock_cutoff
    }

    pub fn is_atomic(&self) -> bool {
        self.fock_cutoff == 1
    }

    /// Basis index of `|a1, a2, n>`.
    pub fn index(&self, a1: usize, a2: usize, n: usize) -> usize {
        debug_assert!(a1 < 2 && a2 < 2 && n < self.fock_cutoff);
        (2 * a1 + a2) * self.fock_cutoff + n
    }
}

pub fn make_space(fock_cutoff: usize) -> Result<SystemSpace> {
    SystemSpace::new(fock_cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliKind {
    Plus,
    Minus,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollectiveKind {
    Plus,
    Minus,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DressedKind {
    Z,
    Plus,
    Minus,
    X,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OperatorLabel {
    Identity,
    A,
    ADag,
    Number,
    Collective(CollectiveKind),
    Atom(usize, PauliKind),
    Dressed(DressedKind),
    /// Products and other derived operators.
    Named(String),
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorLabel::Identity => write!(f, "I"),
            OperatorLabel::A => write!(f, "a"),
            OperatorLabel::ADag => write!(f, "a†"),
            OperatorLabel::Number => write!(f, "a†a"),
            OperatorLabel::Collective(CollectiveKind::Plus) => write!(f, "S₊"),
            OperatorLabel::Collective(CollectiveKind::Minus) => write!(f, "S₋"),
            OperatorLabel::Collective(CollectiveKind::X) => write!(f, "S_x"),
            OperatorLabel::Atom(j, k) => {
                let s = match k {
                    PauliKind::Plus => "σ₊",
                    PauliKind::Minus => "σ₋",
                    PauliKind::X => "σ_x",
                    PauliKind::Y => "σ_y",
                    PauliKind::Z => "σ_z",
                };
                write!(f, "{s}^{j}")
            }
            OperatorLabel::Dressed(DressedKind::Z) => write!(f, "J_z"),
            OperatorLabel::Dressed(DressedKind::Plus) => write!(f, "J₊"),
            OperatorLabel::Dressed(DressedKind::Minus) => write!(f, "J₋"),
            OperatorLabel::Dressed(DressedKind::X) => write!(f, "J_x"),
            OperatorLabel::Named(s) => write!(f, "{s}"),
        }
    }
}

/// An operator on a [`SystemSpace`] together with its symbolic name.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    pub label: OperatorLabel,
    pub matrix: ComplexMatrix,
    pub space: SystemSpace,
}

impl LabeledOperator {
    pub fn new(label: OperatorLabel, matrix: ComplexMatrix, space: SystemSpace) -> Result<Self> {
        if matrix.rows() != space.dim() || matrix.cols() != space.dim() {
            return Err(Error::Shape(format!(
                "operator {label} is {}x{} but the space has dimension {}",
                matrix.rows(),
                matrix.cols(),
                space.dim()
            )));
        }
        Ok(Self { label, matrix, space })
    }

    pub fn named(name: impl Into<String>, matrix: ComplexMatrix, space: SystemSpace) -> Result<Self> {
        Self::new(OperatorLabel::Named(name.into()), matrix, space)
    }

    pub fn dagger(&self) -> Self {
        let label = match &self.label {
            OperatorLabel::A => OperatorLabel::ADag,
            OperatorLabel::ADag => OperatorLabel::A,
            OperatorLabel::Collective(CollectiveKind::Plus) => OperatorLabel::Collective(CollectiveKind::Minus),
            OperatorLabel::Collective(CollectiveKind::Minus) => OperatorLabel::Collective(CollectiveKind::Plus),
            OperatorLabel::Atom(j, PauliKind::Plus) => OperatorLabel::Atom(*j, PauliKind::Minus),
            OperatorLabel::Atom(j, PauliKind::Minus) => OperatorLabel::Atom(*j, PauliKind::Plus),
            OperatorLabel::Dressed(DressedKind::Plus) => OperatorLabel::Dressed(DressedKind::Minus),
            OperatorLabel::Dressed(DressedKind::Minus) => OperatorLabel::Dressed(DressedKind::Plus),
            l @ (OperatorLabel::Identity
            | OperatorLabel::Number
            | OperatorLabel::Collective(CollectiveKind::X)
            | OperatorLabel::Atom(..)
            | OperatorLabel::Dressed(_)) => l.clone(),
            OperatorLabel::Named(s) => OperatorLabel::Named(format!("({s})†")),
        };
        Self { label, matrix: self.matrix.adjoint(), space: self.space }
    }

    /// Product `self * rhs` with a composed label.
    pub fn then(&self, rhs: &Self) -> Self {
        Self {
            label: OperatorLabel::Named(format!("{}{}", self.label, rhs.label)),
            matrix: &self.matrix * &rhs.matrix,
            space: self.space,
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn single_atom(kind: PauliKind) -> ComplexMatrix {
    let z = c(0.0);
    let rows = match kind {
        // sigma_+ = |e><g|, sigma_- = |g><e|
        PauliKind::Plus => [[z, z], [c(1.0), z]],
        PauliKind::Minus => [[z, c(1.0)], [z, z]],
        PauliKind::X => [[z, c(1.0)], [c(1.0), z]],
        // sigma_y = -i (sigma_+ - sigma_-)
        PauliKind::Y => [[z, C64::new(0.0, 1.0)], [C64::new(0.0, -1.0), z]],
        PauliKind::Z => [[c(-1.0), z], [z, c(1.0)]],
    };
    ComplexMatrix::from_fn(2, 2, |i, j| rows[i][j])
}

fn single_atom_dressed(kind: DressedKind) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [c(s), c(s)];
    let minus = [c(s), c(-s)];
    let pm = ComplexMatrix::outer(&plus, &minus);
    match kind {
        DressedKind::Plus => pm,
        DressedKind::Minus => pm.adjoint(),
        DressedKind::Z => &ComplexMatrix::outer(&plus, &plus) - &ComplexMatrix::outer(&minus, &minus),
        DressedKind::X => &pm + &pm.adjoint(),
    }
}

fn embed_atom(space: &SystemSpace, j: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let i2 = ComplexMatrix::identity(2);
    let atoms = match j {
        1 => kron(op, &i2)?,
        2 => kron(&i2, op)?,
        _ => return Err(Error::Argument(format!("atom index must be 1 or 2, got {j}"))),
    };
    kron(&atoms, &ComplexMatrix::identity(space.fock_cutoff()))
}

fn embed_field(op: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron(&ComplexMatrix::identity(ATOM_DIM), op)
}

pub fn identity(space: &SystemSpace) -> LabeledOperator {
    LabeledOperator { label: OperatorLabel::Identity, matrix: ComplexMatrix::identity(space.dim()), space: *space }
}

/// Cavity annihilation operator, `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(space: &SystemSpace) -> LabeledOperator {
    let n = space.fock_cutoff();
    let a = ComplexMatrix::from_fn(n, n, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) });
    let matrix = embed_field(&a).expect("field embedding stays within limits");
    LabeledOperator { label: OperatorLabel::A, matrix, space: *space }
}

pub fn creation(space: &SystemSpace) -> LabeledOperator {
    annihilation(space).dagger()
}

pub fn number(space: &SystemSpace) -> LabeledOperator {
    let n = space.fock_cutoff();
    let d: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let matrix = embed_field(&ComplexMatrix::from_real_diag(&d)).expect("field embedding stays within limits");
    LabeledOperator { label: OperatorLabel::Number, matrix, space: *space }
}

/// Pauli-type operator of atom `j` (1 or 2).
pub fn atom_operator(space: &SystemSpace, j: usize, kind: PauliKind) -> Result<LabeledOperator> {
    let matrix = embed_atom(space, j, &single_atom(kind))?;
    Ok(LabeledOperator { label: OperatorLabel::Atom(j, kind), matrix, space: *space })
}

/// `S± = σ±¹ + σ±²` and `S_x = S₊ + S₋`.
pub fn collective_spin(space: &SystemSpace, which: CollectiveKind) -> LabeledOperator {
    let kind = match which {
        CollectiveKind::Plus => PauliKind::Plus,
        CollectiveKind::Minus => PauliKind::Minus,
        CollectiveKind::X => PauliKind::X,
    };
    let one = single_atom(kind);
    let matrix = &embed_atom(space, 1, &one).expect("atom 1") + &embed_atom(space, 2, &one).expect("atom 2");
    LabeledOperator { label: OperatorLabel::Collective(which), matrix, space: *space }
}

/// Collective operators in the dressed basis: `J_z = Σ (|+><+| - |-><-|)`,
/// `J₊ = Σ |+><-|`, `J₋ = J₊†`, `J_x = J₊ + J₋`.
pub fn dressed_spin(space: &SystemSpace, which: DressedKind) -> LabeledOperator {
    let one = single_atom_dressed(which);
    let matrix = &embed_atom(space, 1, &one).expect("atom 1") + &embed_atom(space, 2, &one).expect("atom 2");
    LabeledOperator { label: OperatorLabel::Dressed(which), matrix, space: *space }
}

/// Basis ket `|a1, a2, n>` as a vector.
pub fn basis_ket(space: &SystemSpace, a1: usize, a2: usize, n: usize) -> Result<Vec<C64>> {
    if a1 > 1 || a2 > 1 || n >= space.fock_cutoff() {
        return Err(Error::Argument(format!("no basis state |{a1},{a2},{n}> in cutoff {}", space.fock_cutoff())));
    }
    let mut v = vec![c(0.0); space.dim()];
    v[space.index(a1, a2, n)] = c(1.0);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(op: &LabeledOperator, v: &[C64]) -> Vec<C64> {
        op.matrix.mat_vec(v)
    }

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-14)
    }

    #[test]
    fn space_dimensions() {
        assert_eq!(make_space(1).unwrap().dim(), 4);
        assert_eq!(make_space(10).unwrap().dim(), 40);
        assert_eq!(make_space(60).unwrap().dim(), 240);
        assert!(make_space(0).is_err());
    }

    #[test]
    fn annihilation_cutoff_two() {
        let s = make_space(2).unwrap();
        let a = annihilation(&s);
        let nz = a.matrix.nonzeros(0.0);
        // one entry per atomic block, each at Fock (0, 1)
        assert_eq!(nz.len(), 4);
        for (i, j, v) in nz {
            assert_eq!((i % 2, j % 2, i / 2), (0, 1, j / 2));
            assert_eq!(v, c(1.0));
        }
    }

    #[test]
    fn number_and_commutator() {
        let s = make_space(5).unwrap();
        let a = annihilation(&s);
        let ad = creation(&s);
        let n = &ad.matrix * &a.matrix;
        assert!((&n - &number(&s).matrix).max_abs() < 1e-14);
        let comm = a.matrix.commutator(&ad.matrix);
        for blk in 0..4 {
            for k in 0..5 {
                let i = blk * 5 + k;
                let expected = if k == 4 { -4.0 } else { 1.0 };
                assert!((comm[(i, i)].re - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn collective_lowering() {
        let s = make_space(1).unwrap();
        let sm = collective_spin(&s, CollectiveKind::Minus);
        let ee = basis_ket(&s, 1, 1, 0).unwrap();
        let ge = basis_ket(&s, 0, 1, 0).unwrap();
        let eg = basis_ket(&s, 1, 0, 0).unwrap();
        let sum: Vec<C64> = ge.iter().zip(&eg).map(|(x, y)| x + y).collect();
        assert!(close(&apply(&sm, &ee), &sum));
        let gg = basis_ket(&s, 0, 0, 0).unwrap();
        assert!(apply(&sm, &gg).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn raising_twice_and_cubed() {
        let s = make_space(1).unwrap();
        let sp = collective_spin(&s, CollectiveKind::Plus).matrix;
        let gg = basis_ket(&s, 0, 0, 0).unwrap();
        let ee = basis_ket(&s, 1, 1, 0).unwrap();
        let twice = sp.mat_vec(&sp.mat_vec(&gg));
        assert!(close(&twice, &ee.iter().map(|z| z * 2.0).collect::<Vec<_>>()));
        assert!(sp.powi(3).max_abs() == 0.0);
    }

    #[test]
    fn dressed_z_equals_bare_x() {
        for cutoff in [1, 3] {
            let s = make_space(cutoff).unwrap();
            let jz = dressed_spin(&s, DressedKind::Z).matrix;
            let sp = collective_spin(&s, CollectiveKind::Plus).matrix;
            let sm = collective_spin(&s, CollectiveKind::Minus).matrix;
            assert!((&jz - &(&sp + &sm)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn dressed_raising_on_minus_minus() {
        let s = make_space(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = [c(h), c(-h)];
        let plus = [c(h), c(h)];
        let kron2 = |u: &[C64; 2], v: &[C64; 2]| vec![u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
        let jp = dressed_spin(&s, DressedKind::Plus);
        let out = apply(&jp, &kron2(&minus, &minus));
        let expected: Vec<C64> = kron2(&plus, &minus).iter().zip(kron2(&minus, &plus)).map(|(x, y)| x + y).collect();
        assert!(close(&out, &expected));
        let jx = dressed_spin(&s, DressedKind::X).matrix;
        assert!(jx.hermiticity_defect() == 0.0);
    }

    #[test]
    fn adjoint_pairs() {
        let s = make_space(3).unwrap();
        assert_eq!(annihilation(&s).matrix.adjoint(), creation(&s).matrix);
        assert_eq!(
            collective_spin(&s, CollectiveKind::Plus).matrix.adjoint(),
            collective_spin(&s, CollectiveKind::Minus).matrix
        );
        assert_eq!(dressed_spin(&s, DressedKind::Plus).dagger().matrix, dressed_spin(&s, DressedKind::Minus).matrix);
        assert_eq!(dressed_spin(&s, DressedKind::Plus).dagger().label, OperatorLabel::Dressed(DressedKind::Minus));
    }

    #[test]
    fn different_atoms_commute() {
        let s = make_space(2).unwrap();
        for k1 in [PauliKind::Plus, PauliKind::Minus, PauliKind::Y] {
            for k2 in [PauliKind::Plus, PauliKind::Minus, PauliKind::Z] {
                let a = atom_operator(&s, 1, k1).unwrap().matrix;
                let b = atom_operator(&s, 2, k2).unwrap().matrix;
                assert_eq!(a.commutator(&b).max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn sigma_y_relation() {
        let s = make_space(1).unwrap();
        let y = atom_operator(&s, 1, PauliKind::Y).unwrap().matrix;
        let p = atom_operator(&s, 1, PauliKind::Plus).unwrap().matrix;
        let m = atom_operator(&s, 1, PauliKind::Minus).unwrap().matrix;
        let expected = (&p - &m).scale(C64::new(0.0, -1.0));
        assert!((&y - &expected).max_abs() < 1e-15);
    }
}
