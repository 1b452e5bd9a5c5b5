//! Dense operators over small labeled tensor-product spaces.
//!
//! Everything here is plain complex linear algebra on `nalgebra::DMatrix`:
//! a [`SubsystemLayout`] names the tensor factors, a [`ComplexOperator`]
//! carries a layout and a square matrix, and a [`DensityMatrix`] is an
//! operator that has been checked to be a physical state. Basis ordering is
//! row-major over the layout, first subsystem most significant.

mod json;
mod linalg;
mod local;
mod ops;
mod pauli;

pub use json::{round_sig, OperatorJson};
pub use linalg::{
    eigh, fidelity, negativity, project_to_density, sqrt_psd, trace_distance, NEGATIVE_EIGEN_CUTOFF,
};
pub(crate) use linalg::{eigh_unchecked, fidelity_matrices};
pub use local::Split;
pub use ops::{kron, project_subsystem, ptrace, ptranspose};
pub use pauli::{pauli_assemble, pauli_expand, pauli_string_matrix, PauliCoefficients};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Ordered local dimensions and names of the tensor factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.is_empty() {
            return Err(Error::InvalidLayout("layout needs at least one subsystem".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::InvalidLayout(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidLayout(format!("local dimension {d} < 2")));
        }
        Ok(Self { dims, labels })
    }

    /// A register of qubits with the given names.
    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(
            vec![2; labels.len()],
            labels.iter().map(|s| s.as_ref().to_string()).collect(),
        )
    }

    /// Qubits named `P1..Pn`.
    pub fn photons(n: usize) -> Result<Self> {
        let labels: Vec<String> = (1..=n).map(|i| format!("P{i}")).collect();
        Self::qubits(&labels)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        let mut hits = self.labels.iter().enumerate().filter(|(_, l)| *l == label);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(i),
            (Some(_), Some(_)) => Err(Error::AmbiguousLabel(label.to_string())),
            _ => Err(Error::UnknownLabel(label.to_string())),
        }
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    pub fn concat(&self, other: &SubsystemLayout) -> SubsystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        SubsystemLayout { dims, labels }
    }

    /// Sub-layout of the given factor positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout {
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
            labels: positions.iter().map(|&p| self.labels[p].clone()).collect(),
        }
    }

    pub fn all_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }
}

/// Square complex matrix attached to a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    layout: SubsystemLayout,
    mat: CMatrix,
}

impl ComplexOperator {
    pub fn new(layout: SubsystemLayout, mat: CMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "layout dimension {d} but matrix is {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { layout, mat })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            layout,
            mat: CMatrix::identity(d, d),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn dagger(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// Largest entry of |A − A†|.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.mat)
    }

    pub fn relabel(self, layout: SubsystemLayout) -> Result<Self> {
        Self::new(layout, self.mat)
    }
}

pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: ComplexOperator,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const EIGEN_TOL: f64 = -1e-9;

    /// Validating constructor.
    pub fn new(op: ComplexOperator) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (evals, _) = eigh(&op)?;
        if evals[0] < Self::EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {:.3e} is negative",
                evals[0]
            )));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(layout: SubsystemLayout, mat: CMatrix) -> Result<Self> {
        Self::new(ComplexOperator::new(layout, mat)?)
    }

    /// Internal constructor for results of trace- and positivity-preserving maps.
    pub(crate) fn from_trusted(op: ComplexOperator) -> Self {
        debug_assert!(op.hermiticity_error() < 1e-8);
        Self { op }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) ket.
    pub fn pure(layout: SubsystemLayout, ket: &[C64]) -> Result<Self> {
        let d = layout.total_dim();
        if ket.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} for dimension {d}",
                ket.len()
            )));
        }
        let norm2: f64 = ket.iter().map(|c| c.norm_sqr()).sum();
        if norm2 < 1e-300 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let v = nalgebra::DVector::from_column_slice(ket).unscale(norm2.sqrt());
        let mat = &v * v.adjoint();
        Ok(Self {
            op: ComplexOperator::new(layout, mat)?,
        })
    }

    /// Computational basis projector |k⟩⟨k|.
    pub fn basis(layout: SubsystemLayout, k: usize) -> Result<Self> {
        let d = layout.total_dim();
        if k >= d {
            return Err(Error::DimensionMismatch(format!("basis index {k} >= {d}")));
        }
        let mut mat = CMatrix::zeros(d, d);
        mat[(k, k)] = ONE;
        Ok(Self {
            op: ComplexOperator::new(layout, mat)?,
        })
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        let mat = CMatrix::identity(d, d).unscale(d as f64);
        Self {
            op: ComplexOperator { layout, mat },
        }
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.op.layout()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn into_op(self) -> ComplexOperator {
        self.op
    }

    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        m.iter().map(|c| c.norm_sqr()).sum()
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn expectation_pure(&self, ket: &[C64]) -> f64 {
        let m = self.matrix();
        let mut acc = ZERO;
        for (i, a) in ket.iter().enumerate() {
            for (j, b) in ket.iter().enumerate() {
                acc += a.conj() * m[(i, j)] * b;
            }
        }
        acc.re
    }

    pub fn population(&self, k: usize) -> f64 {
        self.matrix()[(k, k)].re
    }
}

impl From<DensityMatrix> for ComplexOperator {
    fn from(rho: DensityMatrix) -> Self {
        rho.op
    }
}
