//! Master-equation generators, time evolution, steady states and observables.
//!
//! A [`Generator`] keeps its Hamiltonian / dissipator decomposition and a
//! flattened list of superoperator terms `ρ ↦ c · A ρ B` with sparse `A`, `B`.
//! Density matrices are vectorized column-stacked: `ρ[r, c]` sits at
//! `r + dim * c`, which is also nalgebra's storage order.

mod build;
mod evolve;
mod observables;
mod sparse;
mod steady;

pub use build::{
    MIN_FULL_CUTOFF,
    build_full_generator, build_reduced_generator, qubit_generator, FullModelOptions,
};
pub use evolve::{evolve, evolve_sampled, Evolution, EvolveOptions};
pub use observables::{
    moments, parity_masses, parity_resolved_moments, Moments, ObservableSet,
};
pub use sparse::SparseOp;
pub use steady::{
    stationary_sectors, steady_populations_birth_death, steady_state, steady_state_containing,
    steady_state_with, SteadyState, SteadyStateOptions,
};

use nalgebra::DMatrix;

use crate::algebra::{BasisTag, Operator, C64};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite matrix (within tolerances).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(op: Operator) -> Result<Self> {
        let rho = DensityMatrix { op };
        rho.check()?;
        Ok(rho)
    }

    /// Wraps a matrix without validation, e.g. an integrator output whose
    /// deviations are reported separately.
    pub fn new_unchecked(op: Operator) -> Self {
        DensityMatrix { op }
    }

    pub fn check(&self) -> Result<()> {
        let herm = self.op.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:e}")));
        }
        let tr = self.op.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// Pure state `|k⟩⟨k|`.
    pub fn basis_state(tag: BasisTag, k: usize) -> Result<Self> {
        if k >= tag.dim() {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dimension {}",
                tag.dim()
            )));
        }
        let d = tag.dim();
        let mut m = DMatrix::zeros(d, d);
        m[(k, k)] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { op: Operator::new(tag, m)? })
    }

    /// Diagonal state with the given (normalized here) populations.
    pub fn diagonal(tag: BasisTag, populations: &[f64]) -> Result<Self> {
        if populations.len() != tag.dim() {
            return Err(Error::DimensionMismatch { left: tag.dim(), right: populations.len() });
        }
        let total: f64 = populations.iter().sum();
        if !(total > 0.0) || populations.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument("populations must be >= 0 with positive sum".into()));
        }
        DensityMatrix::new(Operator::from_diagonal(tag, populations.iter().map(|p| p / total)))
    }

    /// `|ψ⟩⟨ψ|` for a (normalized here) state vector.
    pub fn pure(tag: BasisTag, psi: &[C64]) -> Result<Self> {
        if psi.len() != tag.dim() {
            return Err(Error::DimensionMismatch { left: tag.dim(), right: psi.len() });
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let d = tag.dim();
        let m = DMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj() / (norm * norm));
        DensityMatrix::new(Operator::new(tag, m)?)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn tag(&self) -> BasisTag {
        self.op.tag()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.matrix()
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    pub fn expectation(&self, o: &Operator) -> Result<C64> {
        if o.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: o.dim(), right: self.dim() });
        }
        let (rho, om) = (self.matrix(), o.matrix());
        let d = self.dim();
        // Tr(ρO) = Σ_{r,c} ρ[r,c] O[c,r]
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..d {
            for r in 0..d {
                acc += rho[(r, c)] * om[(c, r)];
            }
        }
        Ok(acc)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.op.get(k, k).re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.matrix();
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.op.hermiticity_defect()
    }

    /// Oscillator state obtained by tracing out the qubit. Fock and sector
    /// states are returned unchanged.
    pub fn oscillator_state(&self) -> DensityMatrix {
        match self.tag() {
            BasisTag::QubitTensorFock { cutoff } => {
                let m = self.matrix();
                let red = DMatrix::from_fn(cutoff, cutoff, |r, c| {
                    m[(r, c)] + m[(r + cutoff, c + cutoff)]
                });
                DensityMatrix::new_unchecked(Operator::from_parts(BasisTag::Fock { cutoff }, red))
            }
            _ => self.clone(),
        }
    }

    /// Qubit state obtained by tracing out the oscillator.
    pub fn qubit_state(&self) -> Option<DensityMatrix> {
        match self.tag() {
            BasisTag::QubitTensorFock { cutoff } => {
                let m = self.matrix();
                let red = DMatrix::from_fn(2, 2, |q, p| {
                    (0..cutoff).map(|n| m[(q * cutoff + n, p * cutoff + n)]).sum()
                });
                Some(DensityMatrix::new_unchecked(Operator::from_parts(BasisTag::Qubit, red)))
            }
            BasisTag::Qubit => Some(self.clone()),
            _ => None,
        }
    }
}

/// One cross-dissipator `ρ ↦ -rate ([A, Bρ] + [ρA, B])`.
#[derive(Clone, Debug)]
pub struct Dissipator {
    pub a: Operator,
    pub b: Operator,
    pub rate: f64,
}

/// Validates a cross-dissipator `ρ ↦ -rate ([A, Bρ] + [ρA, B])`, which
/// expands to `-rate ({AB, ρ} - 2 B ρ A)`.
pub fn cross_dissipator(a: &Operator, b: &Operator, rate: f64) -> Result<Dissipator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("dissipator rate must be >= 0, got {rate}")));
    }
    Ok(Dissipator { a: a.clone(), b: b.clone(), rate })
}

/// `ρ ↦ coef · left · ρ · right`; `None` stands for the identity.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub coef: C64,
    pub left: Option<SparseOp>,
    pub right: Option<SparseOp>,
}

/// Liouvillian `ρ ↦ -i[H, ρ] + Σ D_k(ρ)`.
#[derive(Clone, Debug)]
pub struct Generator {
    tag: BasisTag,
    hamiltonian: Operator,
    dissipators: Vec<Dissipator>,
    terms: Vec<Term>,
    fastest_rate: f64,
}

impl Generator {
    pub fn new(hamiltonian: Operator, dissipators: Vec<Dissipator>) -> Result<Self> {
        let d = hamiltonian.dim();
        for dis in &dissipators {
            if dis.a.dim() != d {
                return Err(Error::DimensionMismatch { left: d, right: dis.a.dim() });
            }
        }
        let mut terms = Vec::new();
        let h = SparseOp::from_operator(&hamiltonian);
        let mut fastest = 2.0 * h.max_row_norm();
        if h.nnz() > 0 {
            terms.push(Term { coef: C64::new(0.0, -1.0), left: Some(h.clone()), right: None });
            terms.push(Term { coef: C64::new(0.0, 1.0), left: None, right: Some(h) });
        }
        for dis in &dissipators {
            if dis.rate == 0.0 {
                continue;
            }
            let ab = SparseOp::from_operator(&(&dis.a * &dis.b));
            let a = SparseOp::from_operator(&dis.a);
            let b = SparseOp::from_operator(&dis.b);
            if ab.nnz() == 0 && (a.nnz() == 0 || b.nnz() == 0) {
                continue;
            }
            fastest += dis.rate * (2.0 * ab.max_row_norm() + 2.0 * a.max_row_norm() * b.max_row_norm());
            let r = C64::new(dis.rate, 0.0);
            if ab.nnz() > 0 {
                terms.push(Term { coef: -r, left: Some(ab.clone()), right: None });
                terms.push(Term { coef: -r, left: None, right: Some(ab) });
            }
            terms.push(Term { coef: r * 2.0, left: Some(b), right: Some(a) });
        }
        Ok(Generator {
            tag: hamiltonian.tag(),
            hamiltonian,
            dissipators,
            terms,
            fastest_rate: fastest,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    /// Gershgorin-style bound on the generator's spectral radius (rad/s).
    pub fn fastest_rate(&self) -> f64 {
        self.fastest_rate
    }

    /// `ρ̇` for a matrix input.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        assert_eq!(rho.nrows(), d);
        let mut out = DMatrix::zeros(d, d);
        self.apply_slice(rho.as_slice(), out.as_mut_slice());
        out
    }

    /// `out = L x` on column-stacked vectors of length `dim²`.
    pub fn apply_slice(&self, x: &[C64], out: &mut [C64]) {
        let d = self.dim();
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        for term in &self.terms {
            // tmp = left · x
            let lx: &[C64] = match &term.left {
                None => x,
                Some(l) => {
                    tmp.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    for c in 0..d {
                        let col = &x[c * d..(c + 1) * d];
                        let dst = &mut tmp[c * d..(c + 1) * d];
                        for (r, row) in l.rows.iter().enumerate() {
                            let mut acc = C64::new(0.0, 0.0);
                            for &(k, v) in row {
                                acc += v * col[k];
                            }
                            dst[r] = acc;
                        }
                    }
                    &tmp
                }
            };
            // out += coef · lx · right
            match &term.right {
                None => {
                    for (o, v) in out.iter_mut().zip(lx) {
                        *o += term.coef * v;
                    }
                }
                Some(rop) => {
                    for (c, col_entries) in rop.cols.iter().enumerate() {
                        for &(k, v) in col_entries {
                            let w = term.coef * v;
                            let src = &lx[k * d..(k + 1) * d];
                            let dst = &mut out[c * d..(c + 1) * d];
                            for (o, s) in dst.iter_mut().zip(src) {
                                *o += w * s;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Nonzeros of the Liouvillian column for vector index `idx`, i.e. the
    /// image of `|r⟩⟨c|`. Entries may repeat and must be summed.
    pub(crate) fn column_entries(&self, idx: usize, out: &mut Vec<(usize, C64)>) {
        let d = self.dim();
        let (r, c) = (idx % d, idx / d);
        out.clear();
        for term in &self.terms {
            // coef · left |r⟩⟨c| right = coef · Σ left[r', r] right[c, c'] |r'⟩⟨c'|
            match (&term.left, &term.right) {
                (None, None) => out.push((idx, term.coef)),
                (Some(l), None) => {
                    for &(rp, v) in &l.cols[r] {
                        out.push((rp + d * c, term.coef * v));
                    }
                }
                (None, Some(rt)) => {
                    for &(cp, v) in &rt.rows[c] {
                        out.push((r + d * cp, term.coef * v));
                    }
                }
                (Some(l), Some(rt)) => {
                    for &(rp, lv) in &l.cols[r] {
                        for &(cp, rv) in &rt.rows[c] {
                            out.push((rp + d * cp, term.coef * lv * rv));
                        }
                    }
                }
            }
        }
    }

    /// Vector indices whose columns have a nonzero in row `idx`.
    pub(crate) fn row_support(&self, idx: usize, out: &mut Vec<usize>) {
        let d = self.dim();
        let (r, c) = (idx % d, idx / d);
        out.clear();
        for term in &self.terms {
            match (&term.left, &term.right) {
                (None, None) => out.push(idx),
                (Some(l), None) => out.extend(l.rows[r].iter().map(|&(k, _)| k + d * c)),
                (None, Some(rt)) => out.extend(rt.cols[c].iter().map(|&(k, _)| r + d * k)),
                (Some(l), Some(rt)) => {
                    for &(k, _) in &l.rows[r] {
                        for &(kc, _) in &rt.cols[c] {
                            out.push(k + d * kc);
                        }
                    }
                }
            }
        }
    }
}
