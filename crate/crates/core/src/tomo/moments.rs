//! Normally ordered moments ⟨(a†)^n a^m⟩ of Fock-truncated states.

use crate::error::{Error, Result};
use crate::qstate::{CMatrix, DensityMatrix, Split, C64};

/// (a†)^n a^m on levels 0..d. Powers above d are rejected since the
/// truncation can no longer represent them.
fn ladder_product(d: usize, n: usize, m: usize) -> Result<CMatrix> {
    if n > d || m > d {
        return Err(Error::InvalidParameter {
            field: "moment order",
            reason: format!("(a†)^{n} a^{m} exceeds a {d}-level truncation"),
        });
    }
    let mut a = CMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let mut out = CMatrix::identity(d, d);
    for _ in 0..m {
        out = &a * out;
    }
    for _ in 0..n {
        out = a.adjoint() * out;
    }
    Ok(out)
}

/// Tr[ρ ⊗ (a_k†)^{n_k} a_k^{m_k}] over the listed (label, n, m) factors;
/// unlisted modes carry the identity.
pub fn moment(rho: &DensityMatrix, factors: &[(&str, usize, usize)]) -> Result<C64> {
    let layout = rho.layout();
    let mut positions = Vec::with_capacity(factors.len());
    let mut op = CMatrix::identity(1, 1);
    for &(label, n, m) in factors {
        let pos = layout.index_of(label)?;
        if positions.contains(&pos) {
            return Err(Error::AmbiguousLabel(label.to_string()));
        }
        positions.push(pos);
        op = op.kronecker(&ladder_product(layout.dims()[pos], n, m)?);
    }
    let split = Split::new(layout.dims(), &positions);
    let reduced = split.trace_rest(rho.matrix());
    Ok((reduced * op).trace())
}

/// ⟨(a†)^n a^m⟩ of a single-mode state.
pub fn moments(rho: &DensityMatrix, n: usize, m: usize) -> Result<C64> {
    let layout = rho.layout();
    if layout.len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "single-mode moments need one subsystem, got {}",
            layout.len()
        )));
    }
    moment(rho, &[(layout.labels()[0].as_str(), n, m)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::SubsystemLayout;

    #[test]
    fn superposition_moments() {
        let l = SubsystemLayout::qubits(&["P1"]).unwrap();
        for phi in [0.0, 0.7, std::f64::consts::FRAC_PI_2, 2.5] {
            let ket = [C64::new((phi / 2.0).sin(), 0.0), C64::new((phi / 2.0).cos(), 0.0)];
            let rho = DensityMatrix::pure(l.clone(), &ket).unwrap();
            assert!((moments(&rho, 1, 1).unwrap().re - (phi / 2.0).cos().powi(2)).abs() < 1e-14);
            assert!((moments(&rho, 0, 1).unwrap().re - phi.sin() / 2.0).abs() < 1e-14);
            assert_eq!(moments(&rho, 2, 2).unwrap().norm(), 0.0);
        }
        assert!(moments(&DensityMatrix::basis(l, 0).unwrap(), 3, 0).is_err());
    }

    #[test]
    fn bell_cross_moments() {
        let l = SubsystemLayout::qubits(&["P1", "P2"]).unwrap();
        let s = C64::new(0.5f64.sqrt(), 0.0);
        let z = C64::new(0.0, 0.0);
        let bell = DensityMatrix::pure(l.clone(), &[s, z, z, s]).unwrap();
        assert!((moment(&bell, &[("P1", 0, 1), ("P2", 0, 1)]).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(moment(&bell, &[("P1", 0, 1)]).unwrap().norm() < 1e-14);
        assert!(moment(&bell, &[("P1", 1, 0), ("P2", 0, 1)]).unwrap().norm() < 1e-14);
        let vac = DensityMatrix::basis(l, 0).unwrap();
        for (n, m) in [(0, 1), (1, 0), (1, 1), (2, 1)] {
            assert_eq!(moment(&vac, &[("P1", n, m), ("P2", 0, 0)]).unwrap().norm(), 0.0);
        }
        assert!(moment(&vac, &[("P1", 1, 1), ("P1", 0, 0)]).is_err());
    }
}
