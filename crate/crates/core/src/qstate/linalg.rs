use nalgebra::linalg::SymmetricEigen;

use super::{hermitian_part, hermiticity_error, CMatrix, ComplexOperator, DensityMatrix, C64};
use crate::error::{Error, Result};

/// Eigenvalues in (−1e-10, 0) count as zero when summing negativity.
pub const NEGATIVE_EIGEN_CUTOFF: f64 = 1e-10;

const EIGH_HERMITIAN_TOL: f64 = 1e-9;

/// Ascending eigenvalues and matching eigenvector columns of a Hermitian operator.
pub fn eigh(op: &ComplexOperator) -> Result<(Vec<f64>, CMatrix)> {
    eigh_matrix(op.matrix())
}

pub(crate) fn eigh_matrix(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let err = hermiticity_error(m);
    if err > EIGH_HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    Ok(eigh_unchecked(&hermitian_part(m)))
}

pub(crate) fn eigh_unchecked(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Rebuild V diag(f(λ)) V†.
pub(crate) fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        let fv = f(v);
        for r in 0..n {
            scaled[(r, c)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// Principal square root of a PSD matrix, with negative eigenvalues clamped to 0.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = eigh_matrix(m)?;
    Ok(spectral_map(&values, &vectors, |v| v.max(0.0).sqrt()))
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

/// Eigenvalues below this are rounding noise; their square roots would
/// otherwise leak ~1e-8 into fidelities of rank-deficient states.
const SPECTRAL_FLOOR: f64 = 1e-14;

pub(crate) fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    // √ρ σ √ρ is unitarily similar to A†σA with A = V√D restricted to the support of ρ.
    let (values, vectors) = eigh_matrix(rho)?;
    let support: Vec<usize> = (0..values.len()).filter(|&i| values[i] > SPECTRAL_FLOOR).collect();
    let d = rho.nrows();
    let a = CMatrix::from_fn(d, support.len(), |r, c| {
        vectors[(r, support[c])] * values[support[c]].sqrt()
    });
    let inner = hermitian_part(&(a.adjoint() * sigma * &a));
    let (values, _) = eigh_unchecked(&inner);
    let root: f64 = values
        .iter()
        .filter(|&&v| v > SPECTRAL_FLOOR)
        .map(|v| v.sqrt())
        .sum();
    Ok(root * root)
}

/// Sum of |negative eigenvalues| of the partial transpose over `part`.
pub fn negativity<S: AsRef<str>>(rho: &DensityMatrix, part: &[S]) -> Result<f64> {
    let pt = super::ptranspose(rho, part)?;
    let (values, _) = eigh(&pt)?;
    Ok(values
        .iter()
        .filter(|&&v| v <= -NEGATIVE_EIGEN_CUTOFF)
        .map(|v| -v)
        .sum())
}

/// ½‖A − B‖₁ for Hermitian A, B.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = hermitian_part(&(a - b));
    let (values, _) = eigh_unchecked(&diff);
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Euclidean projection of a real vector onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Nearest (Frobenius) density matrix to a Hermitian matrix.
pub fn project_to_density(m: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh_unchecked(&hermitian_part(m));
    let projected = project_simplex(&values);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (c, &p) in projected.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= C64::new(p, 0.0);
        }
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}
