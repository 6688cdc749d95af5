//! Truncated Fock-space operators, the photon-pair su(1,1) realisation and
//! the even/odd sector bookkeeping.
//!
//! Conventions used throughout the crate:
//! - the Fock basis is ordered by ascending photon number;
//! - the qubit basis is `(excited, ground)`, so `σz = diag(+1, -1)`;
//! - in a qubit ⊗ oscillator product the qubit index is the slow one, so
//!   `|q, n⟩` sits at row `q * cutoff + n`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Bargmann index of the photon-pair su(1,1) representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bargmann {
    /// `j = 1/4`: even photon numbers.
    Quarter,
    /// `j = 3/4`: odd photon numbers.
    ThreeQuarters,
}

impl Bargmann {
    pub const BOTH: [Bargmann; 2] = [Bargmann::Quarter, Bargmann::ThreeQuarters];

    pub fn value(self) -> f64 {
        match self {
            Bargmann::Quarter => 0.25,
            Bargmann::ThreeQuarters => 0.75,
        }
    }

    pub fn from_value(j: f64) -> Result<Self> {
        if j == 0.25 {
            Ok(Bargmann::Quarter)
        } else if j == 0.75 {
            Ok(Bargmann::ThreeQuarters)
        } else {
            Err(Error::InvalidArgument(format!(
                "Bargmann index must be 1/4 or 3/4, got {j}"
            )))
        }
    }

    /// Photon-number parity carried by this sector (0 even, 1 odd).
    pub fn parity(self) -> usize {
        match self {
            Bargmann::Quarter => 0,
            Bargmann::ThreeQuarters => 1,
        }
    }

    pub fn from_parity(parity: usize) -> Self {
        if parity % 2 == 0 {
            Bargmann::Quarter
        } else {
            Bargmann::ThreeQuarters
        }
    }
}

impl fmt::Display for Bargmann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Which basis an [`Operator`] is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisTag {
    Fock { cutoff: usize },
    Su11Sector { j: Bargmann, cutoff: usize },
    QubitTensorFock { cutoff: usize },
    Qubit,
    /// Anything else, e.g. products that are not qubit ⊗ Fock.
    Generic { dim: usize },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match *self {
            BasisTag::Fock { cutoff } => cutoff,
            BasisTag::Su11Sector { cutoff, .. } => cutoff,
            BasisTag::QubitTensorFock { cutoff } => 2 * cutoff,
            BasisTag::Qubit => 2,
            BasisTag::Generic { dim } => dim,
        }
    }
}

/// Dense complex square matrix with basis metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    tag: BasisTag,
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn new(tag: BasisTag, mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidArgument(format!(
                "operator matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if tag.dim() != mat.nrows() {
            return Err(Error::DimensionMismatch { left: tag.dim(), right: mat.nrows() });
        }
        Ok(Operator { tag, mat })
    }

    pub(crate) fn from_parts(tag: BasisTag, mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(tag.dim(), mat.nrows());
        Operator { tag, mat }
    }

    pub fn zeros(tag: BasisTag) -> Self {
        let d = tag.dim();
        Operator { tag, mat: DMatrix::zeros(d, d) }
    }

    pub fn identity(tag: BasisTag) -> Self {
        let d = tag.dim();
        Operator { tag, mat: DMatrix::identity(d, d) }
    }

    pub fn from_diagonal(tag: BasisTag, diag: impl IntoIterator<Item = f64>) -> Self {
        let mut op = Operator::zeros(tag);
        for (i, v) in diag.into_iter().enumerate().take(op.dim()) {
            op.mat[(i, i)] = C64::new(v, 0.0);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator { tag: self.tag, mat: self.mat.adjoint() }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator { tag: self.tag, mat: &self.mat * C64::new(s, 0.0) }
    }

    pub fn scale_c(&self, s: C64) -> Operator {
        Operator { tag: self.tag, mat: &self.mat * s }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        let mat = matmul(&self.mat, &other.mat) - matmul(&other.mat, &self.mat);
        Operator { tag: self.tag, mat }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Column `n` of the matrix, i.e. the image of basis state `n`.
    pub fn apply_basis(&self, n: usize) -> Vec<C64> {
        self.mat.column(n).iter().copied().collect()
    }

    /// Largest absolute entry deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.mat[(r, c)] - self.mat[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Largest absolute entry difference, restricted to rows and columns
    /// where `keep` holds.
    pub fn max_abs_diff_on(&self, other: &Operator, keep: impl Fn(usize) -> bool) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for r in (0..d).filter(|&r| keep(r)) {
            for c in (0..d).filter(|&c| keep(c)) {
                worst = worst.max((self.mat[(r, c)] - other.mat[(r, c)]).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.max_abs_diff_on(other, |_| true)
    }

    pub fn checked_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_dim(other)?;
        Ok(Operator { tag: self.tag, mat: matmul(&self.mat, &other.mat) })
    }

    fn check_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { tag: self.tag, mat: matmul(&self.mat, &rhs.mat) }
    }
}

/// Matrix product that skips zeros when the left factor is sparse, which
/// the ladder-type operators built here almost always are.
fn matmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let zero = C64::new(0.0, 0.0);
    let cols: Vec<Vec<(usize, C64)>> = a
        .column_iter()
        .map(|c| c.iter().enumerate().filter(|(_, v)| **v != zero).map(|(i, v)| (i, *v)).collect())
        .collect();
    let nnz: usize = cols.iter().map(Vec::len).sum();
    if d < 64 || nnz * 16 > d * a.ncols() {
        return a * b;
    }
    let mut out = DMatrix::zeros(d, b.ncols());
    for j in 0..b.ncols() {
        for (k, col) in cols.iter().enumerate() {
            let bkj = b[(k, j)];
            if bkj == zero {
                continue;
            }
            for &(i, v) in col {
                out[(i, j)] += v * bkj;
            }
        }
    }
    out
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { tag: self.tag, mat: &self.mat + &rhs.mat }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { tag: self.tag, mat: &self.mat - &rhs.mat }
    }
}

/// A basis state `|j, m⟩` of one su(1,1) sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SectorIndex {
    pub j: Bargmann,
    pub m: usize,
}

/// `|n⟩ ↦ |j, m⟩` with `n = 2(m + j) - 1/2`.
pub fn fock_to_sector(n: usize) -> SectorIndex {
    SectorIndex { j: Bargmann::from_parity(n), m: n / 2 }
}

pub fn sector_to_fock(s: SectorIndex) -> usize {
    2 * s.m + s.j.parity()
}

/// Annihilation and creation operators on `cutoff` Fock levels.
pub fn ladder_ops(cutoff: usize) -> Result<(Operator, Operator)> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!("ladder_ops needs cutoff >= 2, got {cutoff}")));
    }
    let tag = BasisTag::Fock { cutoff };
    let mut a = Operator::zeros(tag);
    for n in 1..cutoff {
        a.mat[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

pub fn number_op(cutoff: usize) -> Result<Operator> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!("number_op needs cutoff >= 2, got {cutoff}")));
    }
    Ok(Operator::from_diagonal(BasisTag::Fock { cutoff }, (0..cutoff).map(|n| n as f64)))
}

/// The su(1,1) generators built from one mode.
#[derive(Clone, Debug)]
pub struct Su11 {
    pub raise: Operator,
    pub lower: Operator,
    pub weight: Operator,
}

/// `β⁺ = a†²/2`, `β⁻ = a²/2`, `βz = (a†a + 1/2)/2` on the Fock basis.
pub fn su11_from_mode(cutoff: usize) -> Result<Su11> {
    if cutoff < 4 {
        return Err(Error::InvalidArgument(format!(
            "su11_from_mode needs cutoff >= 4, got {cutoff}"
        )));
    }
    let (a, a_dag) = ladder_ops(cutoff)?;
    let raise = (&a_dag * &a_dag).scale(0.5);
    let lower = (&a * &a).scale(0.5);
    let tag = BasisTag::Fock { cutoff };
    let half = Operator::identity(tag).scale(0.5);
    let weight = (&(&a_dag * &a) + &half).scale(0.5);
    Ok(Su11 { raise, lower, weight })
}

/// The su(1,1) generators on the sector basis `{|j,0⟩, …, |j,m_cutoff-1⟩}`.
pub fn su11_sector(j: Bargmann, m_cutoff: usize) -> Result<Su11> {
    if m_cutoff < 2 {
        return Err(Error::InvalidArgument(format!(
            "su11_sector needs m_cutoff >= 2, got {m_cutoff}"
        )));
    }
    let jv = j.value();
    let tag = BasisTag::Su11Sector { j, cutoff: m_cutoff };
    let mut raise = Operator::zeros(tag);
    let mut lower = Operator::zeros(tag);
    for m in 0..m_cutoff {
        let mf = m as f64;
        if m + 1 < m_cutoff {
            raise.mat[(m + 1, m)] = C64::new(((mf + 1.0) * (mf + 2.0 * jv)).sqrt(), 0.0);
        }
        if m >= 1 {
            lower.mat[(m - 1, m)] = C64::new((mf * (mf + 2.0 * jv - 1.0)).sqrt(), 0.0);
        }
    }
    let weight = Operator::from_diagonal(tag, (0..m_cutoff).map(|m| m as f64 + jv));
    Ok(Su11 { raise, lower, weight })
}

/// Qubit operators in the `(excited, ground)` basis.
#[derive(Clone, Debug)]
pub struct Pauli {
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
    /// `σ⁺ = |e⟩⟨g|`
    pub raise: Operator,
    /// `σ⁻ = |g⟩⟨e|`
    pub lower: Operator,
    pub identity: Operator,
}

pub fn pauli() -> Pauli {
    let c = |re: f64, im: f64| C64::new(re, im);
    let mk = |entries: [C64; 4]| {
        Operator::from_parts(BasisTag::Qubit, DMatrix::from_row_slice(2, 2, &entries))
    };
    let z0 = c(0.0, 0.0);
    Pauli {
        x: mk([z0, c(1.0, 0.0), c(1.0, 0.0), z0]),
        y: mk([z0, c(0.0, -1.0), c(0.0, 1.0), z0]),
        z: mk([c(1.0, 0.0), z0, z0, c(-1.0, 0.0)]),
        raise: mk([z0, c(1.0, 0.0), z0, z0]),
        lower: mk([z0, z0, c(1.0, 0.0), z0]),
        identity: Operator::identity(BasisTag::Qubit),
    }
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let mat = a.mat.kronecker(&b.mat);
    let tag = match (a.tag, b.tag) {
        (BasisTag::Qubit, BasisTag::Fock { cutoff }) => BasisTag::QubitTensorFock { cutoff },
        _ => BasisTag::Generic { dim: mat.nrows() },
    };
    Operator { tag, mat }
}

/// Photon number of each row of an operator written in `tag`.
pub fn photon_numbers(tag: BasisTag) -> Vec<usize> {
    match tag {
        BasisTag::Fock { cutoff } => (0..cutoff).collect(),
        BasisTag::QubitTensorFock { cutoff } => (0..2 * cutoff).map(|i| i % cutoff).collect(),
        BasisTag::Su11Sector { j, cutoff } => {
            (0..cutoff).map(|m| sector_to_fock(SectorIndex { j, m })).collect()
        }
        BasisTag::Qubit => vec![0, 0],
        BasisTag::Generic { dim } => vec![0; dim],
    }
}
