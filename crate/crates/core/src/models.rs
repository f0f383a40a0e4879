//! Master equations for the driven and thermal cavity, and their Liouvillians.
//!
//! A [`MasterEquation`] is a Hamiltonian plus weighted jump operators, each
//! contributing `rate * D[O]` with `D[O]rho = 2 O rho O† - O†O rho - rho O†O`.
//! [`vectorize`] turns it into a [`Superoperator`] acting on column-stacked
//! density matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, LinearOperator, SparseMatrix, C64, DENSE_EIG_CAP};
use crate::operators::{
    annihilation, atom_operator, collective_spin, creation, dressed_spin, identity, CollectiveKind, DressedKind,
    LabeledOperator, OperatorLabel, PauliKind, SystemSpace,
};

/// Physical parameters in units of the cavity decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atom-field coupling.
    pub g0: f64,
    /// Coherent drive amplitude.
    pub eps: f64,
    /// Thermal photon number of the bath.
    pub n_th: f64,
    /// Atomic decay rate.
    pub gamma: f64,
}

impl ModelParams {
    /// Cavity decay rate; every rate and time in the crate is measured in it.
    pub const KAPPA: f64 = 1.0;

    pub fn new(g0: f64, eps: f64, n_th: f64, gamma: f64) -> Result<Self> {
        let p = Self { g0, eps, n_th, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn coherent(g0: f64, eps: f64) -> Result<Self> {
        Self::new(g0, eps, 0.0, 0.0)
    }

    pub fn thermal(g0: f64, n_th: f64) -> Result<Self> {
        Self::new(g0, 0.0, n_th, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("g0", self.g0), ("eps", self.eps), ("n_th", self.n_th), ("gamma", self.gamma)];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in &fields[1..] {
            if *v < 0.0 {
                return Err(Error::Argument(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Dressed-atom frequency `Ω = g0 ε / κ`.
    pub fn omega(&self) -> f64 {
        self.g0 * self.eps / Self::KAPPA
    }

    /// Drive-induced rate `Γ_ε = κ (κ / 4ε)²`.
    pub fn gamma_eps(&self) -> Result<f64> {
        if !(self.eps > 0.0) {
            return Err(Error::UnsupportedRegime("the effective coherent model needs eps > 0".into()));
        }
        Ok(Self::KAPPA * (Self::KAPPA / (4.0 * self.eps)).powi(2))
    }

    /// Dephasing rate `Γ_g0 = κ (g0 / 2κ)²`.
    pub fn gamma_g0(&self) -> f64 {
        Self::KAPPA * (self.g0 / (2.0 * Self::KAPPA)).powi(2)
    }

    /// Collective rate `Γ = κ (g0 / κ)²` of the thermal effective model.
    pub fn gamma_collective(&self) -> f64 {
        Self::KAPPA * (self.g0 / Self::KAPPA).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Full,
    Coherent,
    CoherentDisplaced,
    FullDisplaced,
    RwaDisplaced,
    EffectiveCoherent,
    Incoherent,
    EffectiveIncoherent,
    Custom,
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Coherent => "coherent",
            ModelKind::CoherentDisplaced => "coherent-displaced",
            ModelKind::FullDisplaced => "full-displaced",
            ModelKind::RwaDisplaced => "rwa-displaced",
            ModelKind::EffectiveCoherent => "effective-coherent",
            ModelKind::Incoherent => "incoherent",
            ModelKind::EffectiveIncoherent => "effective-incoherent",
            ModelKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub operator: LabeledOperator,
    pub rate: f64,
}

/// Bilinear dissipative term `weight * (2 A rho B† - B†A rho - rho B†A)`.
///
/// With `A = B` and a positive weight this is an ordinary dissipator; the
/// rotating-wave displaced model also needs pairs with `A != B` and negative
/// weight, which are not of Lindblad form on their own.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTerm {
    pub left: LabeledOperator,
    pub right: LabeledOperator,
    pub weight: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterEquation {
    pub kind: ModelKind,
    pub params: Option<ModelParams>,
    pub space: SystemSpace,
    pub hamiltonian: LabeledOperator,
    pub dissipators: Vec<Dissipator>,
    pub cross_terms: Vec<CrossTerm>,
}

impl MasterEquation {
    pub fn new(kind: ModelKind, space: SystemSpace, hamiltonian: LabeledOperator) -> Result<Self> {
        check_space(&hamiltonian, &space)?;
        Ok(Self { kind, params: None, space, hamiltonian, dissipators: vec![], cross_terms: vec![] })
    }

    /// Adds `rate * D[operator]`. Zero rates are skipped.
    pub fn add_dissipator(&mut self, operator: LabeledOperator, rate: f64) -> Result<()> {
        check_space(&operator, &self.space)?;
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Argument(format!(
                "rate for {} must be finite and nonnegative, got {rate}",
                operator.label
            )));
        }
        if rate > 0.0 {
            self.dissipators.push(Dissipator { operator, rate });
        }
        Ok(())
    }

    pub fn add_cross_term(&mut self, left: LabeledOperator, right: LabeledOperator, weight: C64) -> Result<()> {
        check_space(&left, &self.space)?;
        check_space(&right, &self.space)?;
        if weight != C64::new(0.0, 0.0) {
            self.cross_terms.push(CrossTerm { left, right, weight });
        }
        Ok(())
    }

    pub fn is_lindblad(&self) -> bool {
        self.cross_terms.is_empty()
    }
}

fn check_space(op: &LabeledOperator, space: &SystemSpace) -> Result<()> {
    if op.space != *space || op.matrix.rows() != space.dim() || op.matrix.cols() != space.dim() {
        return Err(Error::Shape(format!(
            "operator {} lives on dimension {}, expected {}",
            op.label,
            op.matrix.rows(),
            space.dim()
        )));
    }
    Ok(())
}

fn lin(terms: &[(C64, &ComplexMatrix)], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for (c, m) in terms {
        out = &out + &m.scale(*c);
    }
    out
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime(msg.into()))
    }
}

fn tavis_cummings(space: &SystemSpace, g0: f64) -> ComplexMatrix {
    let a = annihilation(space).matrix;
    let ad = creation(space).matrix;
    let sp = collective_spin(space, CollectiveKind::Plus).matrix;
    let sm = collective_spin(space, CollectiveKind::Minus).matrix;
    lin(&[(re(g0), &(&a * &sp)), (re(g0), &(&ad * &sm))], space.dim())
}

fn drive(space: &SystemSpace, eps: f64) -> ComplexMatrix {
    let a = annihilation(space).matrix;
    let ad = creation(space).matrix;
    (&ad - &a).scale(C64::new(0.0, eps))
}

fn push_atomic_bath(me: &mut MasterEquation, p: &ModelParams) -> Result<()> {
    for j in 1..=2 {
        me.add_dissipator(atom_operator(&me.space, j, PauliKind::Minus)?, p.gamma * (p.n_th + 1.0) / 2.0)?;
        me.add_dissipator(atom_operator(&me.space, j, PauliKind::Plus)?, p.gamma * p.n_th / 2.0)?;
    }
    Ok(())
}

fn push_cavity_bath(me: &mut MasterEquation, p: &ModelParams) -> Result<()> {
    me.add_dissipator(annihilation(&me.space), ModelParams::KAPPA * (p.n_th + 1.0))?;
    me.add_dissipator(creation(&me.space), ModelParams::KAPPA * p.n_th)
}

/// Lab-frame model: `H = g0 (a S₊ + a† S₋) + iε (a† - a)` with thermal cavity
/// and atomic baths.
pub fn build_full(space: &SystemSpace, params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    let h = &tavis_cummings(space, params.g0) + &drive(space, params.eps);
    let mut me = MasterEquation::new(ModelKind::Full, *space, LabeledOperator::named("H", h, *space)?)?;
    me.params = Some(*params);
    push_cavity_bath(&mut me, params)?;
    push_atomic_bath(&mut me, params)?;
    Ok(me)
}

/// Driven cavity at zero temperature without atomic decay.
pub fn build_coherent(space: &SystemSpace, params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    require(params.n_th == 0.0 && params.gamma == 0.0, "the coherent model needs n_th = 0 and gamma = 0")?;
    let h = &tavis_cummings(space, params.g0) + &drive(space, params.eps);
    let mut me = MasterEquation::new(ModelKind::Coherent, *space, LabeledOperator::named("H", h, *space)?)?;
    me.params = Some(*params);
    push_cavity_bath(&mut me, params)?;
    Ok(me)
}

fn displaced_hamiltonian(space: &SystemSpace, params: &ModelParams) -> ComplexMatrix {
    let a = annihilation(space).matrix;
    let ad = creation(space).matrix;
    let jz = dressed_spin(space, DressedKind::Z).matrix;
    let jp = dressed_spin(space, DressedKind::Plus).matrix;
    let jm = dressed_spin(space, DressedKind::Minus).matrix;
    let half = params.g0 / 2.0;
    lin(
        &[
            (re(params.omega()), &jz),
            (re(half), &(&jz * &(&ad + &a))),
            (re(half), &(&jp * &a)),
            (re(half), &(&jm * &ad)),
            (re(-half), &(&jp * &ad)),
            (re(-half), &(&jm * &a)),
        ],
        space.dim(),
    )
}

/// Driven model in the frame displaced by the mean cavity field:
/// `H₁ = Ω J_z + (g0/2) J_z (a† + a) + (g0/2)(J₊ a + J₋ a†) - (g0/2)(J₊ a† + J₋ a)`
/// with cavity decay only.
pub fn build_coherent_displaced(space: &SystemSpace, params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    require(params.n_th == 0.0 && params.gamma == 0.0, "the displaced coherent model needs n_th = 0 and gamma = 0")?;
    let h = displaced_hamiltonian(space, params);
    let mut me = MasterEquation::new(ModelKind::CoherentDisplaced, *space, LabeledOperator::named("H₁", h, *space)?)?;
    me.params = Some(*params);
    me.add_dissipator(annihilation(space), ModelParams::KAPPA)?;
    Ok(me)
}

/// Displaced driven model with atomic decay at zero temperature.
///
/// The displacement acts on the field only, so the atomic dissipators are
/// unchanged and atomic observables agree with [`build_full`].
pub fn build_full_displaced(space: &SystemSpace, params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    require(params.n_th == 0.0, "the displaced frame is only available at n_th = 0")?;
    let h = displaced_hamiltonian(space, params);
    let mut me = MasterEquation::new(ModelKind::FullDisplaced, *space, LabeledOperator::named("H₁", h, *space)?)?;
    me.params = Some(*params);
    me.add_dissipator(annihilation(space), ModelParams::KAPPA)?;
    push_atomic_bath(&mut me, params)?;
    Ok(me)
}

/// Displaced model after the second-order expansion in `g0/4Ω` and the
/// rotating-wave approximation.
pub fn build_rwa_displaced(space: &SystemSpace, params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    require(
        params.n_th == 0.0 && params.gamma == 0.0,
        "the rotating-wave displaced model needs n_th = 0 and gamma = 0",
    )?;
    require(params.eps > 0.0, "the rotating-wave displaced model needs eps > 0")?;
    if 4.0 * params.eps / ModelParams::KAPPA < 10.0 {
        log::warn!("rotating-wave displaced model used outside its regime (4 eps / kappa = {})", 4.0 * params.eps);
    }
    let a = annihilation(space);
    let ad = creation(space);
    let jz = dressed_spin(space, DressedKind::Z);
    let omega = params.omega();
    // g0 / 4Ω = κ / 4ε, finite even when g0 = 0
    let ratio = ModelParams::KAPPA / (4.0 * params.eps);
    let w = ModelParams::KAPPA * ratio * ratio;
    let quad_coeff = params.g0 * ratio / 2.0; // g0² / 8Ω
    let amad = &a.matrix - &ad.matrix;
    let h = lin(
        &[
            (re(omega), &jz.matrix),
            (re(params.g0 / 2.0), &(&jz.matrix * &(&a.matrix + &ad.matrix))),
            (re(-quad_coeff), &(&jz.matrix * &(&amad * &amad))),
        ],
        space.dim(),
    );
    let mut me = MasterEquation::new(ModelKind::RwaDisplaced, *space, LabeledOperator::named("H₃", h, *space)?)?;
    me.params = Some(*params);
    me.add_dissipator(a.clone(), ModelParams::KAPPA)?;
    me.add_dissipator(dressed_spin(space, DressedKind::Minus), w)?;
    me.add_dissipator(dressed_spin(space, DressedKind::Plus), w)?;
    // -w (2 J_z a† rho a† - J_z a†² rho - rho J_z a†²)
    me.add_cross_term(jz.then(&ad), a.clone(), re(-w))?;
    // -w (2 a rho J_z a - J_z a² rho - rho J_z a²)
    me.add_cross_term(a.clone(), ad.then(&jz), re(-w))?;
    Ok(me)
}

/// Atomic model obtained by eliminating the strongly driven cavity:
/// `Γ_ε (D[J₋] + D[J₊]) + Γ_g0 D[J_z]` with no Hamiltonian.
pub fn build_effective_coherent(params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    let gamma_eps = params.gamma_eps()?;
    let space = SystemSpace::atomic();
    let zero = LabeledOperator::named("0", ComplexMatrix::zeros(4, 4), space)?;
    let mut me = MasterEquation::new(ModelKind::EffectiveCoherent, space, zero)?;
    me.params = Some(*params);
    me.add_dissipator(dressed_spin(&space, DressedKind::Minus), gamma_eps)?;
    me.add_dissipator(dressed_spin(&space, DressedKind::Plus), gamma_eps)?;
    me.add_dissipator(dressed_spin(&space, DressedKind::Z), params.gamma_g0())?;
    Ok(me)
}

/// Thermal cavity without drive: `H = H_TC` with cavity bath only.
pub fn build_incoherent(space: &SystemSpace, params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    require(params.eps == 0.0, "the incoherent model needs eps = 0")?;
    require(params.gamma == 0.0, "the incoherent model has no atomic decay; use build_full for gamma > 0")?;
    let h = tavis_cummings(space, params.g0);
    let mut me = MasterEquation::new(ModelKind::Incoherent, *space, LabeledOperator::named("H_TC", h, *space)?)?;
    me.params = Some(*params);
    push_cavity_bath(&mut me, params)?;
    Ok(me)
}

/// Atoms coupled to a common thermal bath after eliminating the cavity:
/// `Γ (n_th + 1) D[S₋] + Γ n_th D[S₊]` with `Γ = g0²/κ`.
pub fn build_effective_incoherent(params: &ModelParams) -> Result<MasterEquation> {
    params.validate()?;
    let space = SystemSpace::atomic();
    let g = params.gamma_collective();
    let zero = LabeledOperator::named("0", ComplexMatrix::zeros(4, 4), space)?;
    let mut me = MasterEquation::new(ModelKind::EffectiveIncoherent, space, zero)?;
    me.params = Some(*params);
    me.add_dissipator(collective_spin(&space, CollectiveKind::Minus), g * (params.n_th + 1.0))?;
    me.add_dissipator(collective_spin(&space, CollectiveKind::Plus), g * params.n_th)?;
    Ok(me)
}

/// How a [`Superoperator`] stores its matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Dense(ComplexMatrix),
    /// Compressed rows; used as the matrix-free applier for large spaces.
    Sparse(SparseMatrix),
}

/// Liouvillian acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    hilbert_dim: usize,
    repr: Representation,
    label: String,
}

impl Superoperator {
    pub fn from_dense(hilbert_dim: usize, m: ComplexMatrix) -> Result<Self> {
        if m.rows() != hilbert_dim * hilbert_dim || !m.is_square() {
            return Err(Error::Shape(format!("superoperator must be {0}x{0}", hilbert_dim * hilbert_dim)));
        }
        Ok(Self { hilbert_dim, repr: Representation::Dense(m), label: ModelKind::Custom.tag().into() })
    }

    pub fn from_sparse(hilbert_dim: usize, m: SparseMatrix) -> Result<Self> {
        if m.rows() != hilbert_dim * hilbert_dim || m.rows() != m.cols() {
            return Err(Error::Shape(format!("superoperator must be {0}x{0}", hilbert_dim * hilbert_dim)));
        }
        Ok(Self { hilbert_dim, repr: Representation::Sparse(m), label: ModelKind::Custom.tag().into() })
    }

    /// Side length `D²` of the matrix.
    pub fn dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Name of the model this generator came from.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Representation::Dense(_))
    }

    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        match &self.repr {
            Representation::Dense(m) => Ok(m.clone()),
            Representation::Sparse(s) => {
                if s.rows() > DENSE_EIG_CAP {
                    return Err(Error::Dimension(format!(
                        "superoperator of size {} exceeds the dense cap {DENSE_EIG_CAP}",
                        s.rows()
                    )));
                }
                Ok(s.to_dense())
            }
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        match &self.repr {
            Representation::Dense(m) => SparseMatrix::from_dense(m),
            Representation::Sparse(s) => s.clone(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.repr {
            Representation::Dense(m) => m.frobenius_norm(),
            Representation::Sparse(s) => s.frobenius_norm(),
        }
    }

    /// Largest `|<vec(I), L e_j>|` over basis vectors, zero for trace-preserving generators.
    pub fn trace_functional_defect(&self) -> f64 {
        let d = self.hilbert_dim;
        let mut w = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, j, v) in self.to_sparse().triplets() {
            if i % (d + 1) == 0 {
                w[j] += v;
            }
        }
        w.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl LinearOperator for Superoperator {
    fn dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        match &self.repr {
            Representation::Dense(m) => m.apply(x, y),
            Representation::Sparse(s) => s.apply(x, y),
        }
    }
}

struct TripletSink {
    d: usize,
    out: Vec<(usize, usize, C64)>,
}

impl TripletSink {
    /// `c * (I ⊗ X)`: acts as `rho -> c X rho`.
    fn left(&mut self, c: C64, x: &[(usize, usize, C64)]) {
        for blk in 0..self.d {
            for &(i, j, v) in x {
                self.out.push((blk * self.d + i, blk * self.d + j, c * v));
            }
        }
    }

    /// `c * (Xᵀ ⊗ I)`: acts as `rho -> c rho X`.
    fn right(&mut self, c: C64, x: &[(usize, usize, C64)]) {
        for &(i, j, v) in x {
            for k in 0..self.d {
                self.out.push((j * self.d + k, i * self.d + k, c * v));
            }
        }
    }

    /// `c * (conj(B) ⊗ A)`: acts as `rho -> c A rho B†`.
    fn sandwich(&mut self, c: C64, a: &[(usize, usize, C64)], b: &[(usize, usize, C64)]) {
        for &(bi, bj, bv) in b {
            for &(ai, aj, av) in a {
                self.out.push((bi * self.d + ai, bj * self.d + aj, c * bv.conj() * av));
            }
        }
    }
}

/// Builds the Liouvillian of `me`.
///
/// With `materialize` the result is a dense matrix (side at most the dense
/// cap); otherwise it is kept sparse.
pub fn vectorize(me: &MasterEquation, materialize: bool) -> Result<Superoperator> {
    let d = me.space.dim();
    let dim = d * d;
    if materialize && dim > DENSE_EIG_CAP {
        return Err(Error::Dimension(format!(
            "dense Liouvillian would be {dim}x{dim}, above the cap {DENSE_EIG_CAP}; use the sparse representation"
        )));
    }
    let mut sink = TripletSink { d, out: Vec::new() };
    let h = me.hamiltonian.matrix.nonzeros(0.0);
    let minus_i = C64::new(0.0, -1.0);
    sink.left(minus_i, &h);
    sink.right(-minus_i, &h);
    for diss in &me.dissipators {
        let o = diss.operator.matrix.nonzeros(0.0);
        let odo = (&diss.operator.matrix.adjoint() * &diss.operator.matrix).nonzeros(0.0);
        let r = C64::new(diss.rate, 0.0);
        sink.sandwich(2.0 * r, &o, &o);
        sink.left(-r, &odo);
        sink.right(-r, &odo);
    }
    for ct in &me.cross_terms {
        let a = ct.left.matrix.nonzeros(0.0);
        let b = ct.right.matrix.nonzeros(0.0);
        let bda = (&ct.right.matrix.adjoint() * &ct.left.matrix).nonzeros(0.0);
        sink.sandwich(2.0 * ct.weight, &a, &b);
        sink.left(-ct.weight, &bda);
        sink.right(-ct.weight, &bda);
    }
    let sparse = SparseMatrix::from_triplets(dim, dim, sink.out)?;
    let sup = if materialize {
        Superoperator::from_dense(d, sparse.to_dense())?
    } else {
        Superoperator::from_sparse(d, sparse)?
    };
    Ok(sup.with_label(me.kind.tag()))
}

/// Vectorizes densely when the Liouvillian fits under the dense cap.
pub fn vectorize_auto(me: &MasterEquation) -> Result<Superoperator> {
    let d = me.space.dim();
    vectorize(me, d * d <= DENSE_EIG_CAP)
}

impl MasterEquation {
    /// Applies the generator directly to a density matrix, without vectorizing.
    pub fn apply_to(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.space.dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::Shape(format!("state is {}x{}, model dimension {d}", rho.rows(), rho.cols())));
        }
        let h = &self.hamiltonian.matrix;
        let mut out = h.commutator(rho).scale(C64::new(0.0, -1.0));
        for diss in &self.dissipators {
            let o = &diss.operator.matrix;
            let od = o.adjoint();
            let odo = &od * o;
            let term = &(&(o * rho) * &od).scale_real(2.0) - &(&(&odo * rho) + &(rho * &odo));
            out = &out + &term.scale_real(diss.rate);
        }
        for ct in &self.cross_terms {
            let a = &ct.left.matrix;
            let bd = ct.right.matrix.adjoint();
            let bda = &bd * a;
            let term = &(&(a * rho) * &bd).scale_real(2.0) - &(&(&bda * rho) + &(rho * &bda));
            out = &out + &term.scale(ct.weight);
        }
        Ok(out)
    }

    /// Labels of the jump operators, in order.
    pub fn jump_labels(&self) -> Vec<OperatorLabel> {
        self.dissipators.iter().map(|d| d.operator.label.clone()).collect()
    }

    pub fn identity(&self) -> LabeledOperator {
        identity(&self.space)
    }
}
