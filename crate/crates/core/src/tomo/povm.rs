//! Displaced-noise heterodyne POVMs.

use std::f64::consts::PI;

use super::DetectionConfig;
use crate::error::{Error, Result};
use crate::qstate::{hermitian_part, CMatrix, DensityMatrix, C64};

/// Rows ⟨0|D(α)|n⟩ and ⟨1|D(α)|n⟩ for n < dim, from the closed-form
/// Laguerre expressions:
/// ⟨0|D|n⟩ = e^{−|α|²/2} (−α*)^n / √n!,
/// ⟨1|D|0⟩ = e^{−|α|²/2} α,
/// ⟨1|D|n⟩ = e^{−|α|²/2} (−α*)^{n−1} (n − |α|²) / √n!.
pub fn displacement_rows(alpha: C64, dim: usize) -> [Vec<C64>; 2] {
    let r2 = alpha.norm_sqr();
    let g = (-0.5 * r2).exp();
    let minus_conj = -alpha.conj();
    let mut row0 = Vec::with_capacity(dim);
    let mut row1 = Vec::with_capacity(dim);
    // t_n = (−α*)^n / √n!
    let mut t = C64::new(g, 0.0);
    let mut t_prev = C64::new(0.0, 0.0);
    for n in 0..dim {
        if n > 0 {
            t_prev = t;
            t = t * minus_conj / (n as f64).sqrt();
        }
        row0.push(t);
        row1.push(if n == 0 {
            alpha * g
        } else {
            // (−α*)^{n−1}/√n! = t_{n−1} / √n
            t_prev * ((n as f64 - r2) / (n as f64).sqrt())
        });
    }
    [row0, row1]
}

/// Single-mode bin operators on the {0, 1} photon subspace, shared by all
/// detected modes.
#[derive(Clone, Debug)]
pub struct PovmSet {
    cfg: DetectionConfig,
    modes: usize,
    centers: Vec<C64>,
    operators: Vec<CMatrix>,
    pauli: Vec<[f64; 4]>,
    completeness: CMatrix,
    deficit: f64,
}

/// Tr(Π σ_s) for a 2×2 Hermitian Π.
pub(crate) fn pauli_traces(p: &CMatrix) -> [f64; 4] {
    [
        (p[(0, 0)] + p[(1, 1)]).re,
        2.0 * p[(1, 0)].re,
        2.0 * p[(1, 0)].im,
        (p[(0, 0)] - p[(1, 1)]).re,
    ]
}

/// π⁻¹ D(α) ρ_h D(α)† × bin area at every bin center, restricted to {|0⟩, |1⟩}.
pub fn build_povm(noise: &DensityMatrix, cfg: &DetectionConfig, modes: usize) -> Result<PovmSet> {
    cfg.validate()?;
    cfg.total_bins(modes)?;
    let d = noise.dim();
    let rho = noise.matrix();
    let h = cfg.bin_width();
    let weight = h * h / PI;
    let centers = cfg.centers();
    let mut operators = Vec::with_capacity(centers.len());
    let mut completeness = CMatrix::zeros(2, 2);
    for &alpha in &centers {
        let rows = displacement_rows(alpha, d);
        // u_m = ρ_h D_m†, Π_{m m'} = Σ_n D_{m n} (ρ_h D†)_{n m'}
        let mut p = CMatrix::zeros(2, 2);
        for m2 in 0..2 {
            let u: Vec<C64> = (0..d)
                .map(|n| (0..d).map(|k| rho[(n, k)] * rows[m2][k].conj()).sum())
                .collect();
            for m1 in 0..2 {
                p[(m1, m2)] = (0..d).map(|n| rows[m1][n] * u[n]).sum::<C64>() * weight;
            }
        }
        let p = hermitian_part(&p);
        completeness += &p;
        operators.push(p);
    }
    let deficit = (&completeness - CMatrix::identity(2, 2)).camax();
    if deficit > cfg.completeness_tol {
        return Err(Error::Incomplete {
            deficit,
            tolerance: cfg.completeness_tol,
        });
    }
    let pauli = operators.iter().map(pauli_traces).collect();
    Ok(PovmSet {
        cfg: cfg.clone(),
        modes,
        centers,
        operators,
        pauli,
        completeness,
        deficit,
    })
}

impl PovmSet {
    pub fn config(&self) -> &DetectionConfig {
        &self.cfg
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn centers(&self) -> &[C64] {
        &self.centers
    }

    /// Bin operators of one mode (identical for every mode).
    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn bins_per_mode(&self) -> usize {
        self.operators.len()
    }

    pub(crate) fn pauli(&self) -> &[[f64; 4]] {
        &self.pauli
    }

    /// G = Σ_j Π_j on the qubit subspace of one mode.
    pub fn completeness(&self) -> &CMatrix {
        &self.completeness
    }

    /// max |G − I|.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// Same per-mode operators for another mode count.
    pub fn with_modes(&self, modes: usize) -> Result<PovmSet> {
        self.cfg.total_bins(modes)?;
        Ok(PovmSet {
            modes,
            ..self.clone()
        })
    }
}

/// Coherent-state POVM π⁻¹ |α⟩⟨α| × bin area on Fock levels 0..dim.
#[derive(Clone, Debug)]
pub struct CoherentPovm {
    cfg: DetectionConfig,
    dim: usize,
    vectors: Vec<Vec<C64>>,
    completeness: CMatrix,
}

pub fn coherent_povm(cfg: &DetectionConfig, dim: usize) -> Result<CoherentPovm> {
    cfg.validate()?;
    cfg.total_bins(1)?;
    let h = cfg.bin_width();
    let scale = (h * h / PI).sqrt();
    let mut completeness = CMatrix::zeros(dim, dim);
    let vectors: Vec<Vec<C64>> = cfg
        .centers()
        .iter()
        .map(|&alpha| {
            let mut v = Vec::with_capacity(dim);
            let mut t = C64::new((-0.5 * alpha.norm_sqr()).exp() * scale, 0.0);
            for n in 0..dim {
                if n > 0 {
                    t = t * alpha / (n as f64).sqrt();
                }
                v.push(t);
            }
            v
        })
        .collect();
    for v in &vectors {
        for i in 0..dim {
            for j in 0..dim {
                completeness[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    Ok(CoherentPovm {
        cfg: cfg.clone(),
        dim,
        vectors,
        completeness: hermitian_part(&completeness),
    })
}

impl CoherentPovm {
    pub fn config(&self) -> &DetectionConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// √(area/π) ⟨n|α_j⟩ for each bin j.
    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn completeness(&self) -> &CMatrix {
        &self.completeness
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomo::noise_mode_state;

    fn expm_displacement(alpha: C64, dim: usize) -> CMatrix {
        let mut a = CMatrix::zeros(dim, dim);
        for n in 1..dim {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        let gen = a.adjoint() * alpha - &a * alpha.conj();
        gen.exp()
    }

    #[test]
    fn closed_form_matches_exponentiated_generator() {
        // A large truncation makes the low rows of exp(αa† − α*a) exact.
        for &alpha in &[C64::new(0.3, -0.2), C64::new(-1.5, 0.7), C64::new(2.2, 1.9)] {
            let big = expm_displacement(alpha, 120);
            let rows = displacement_rows(alpha, 31);
            for m in 0..2 {
                for n in 0..31 {
                    assert!((rows[m][n] - big[(m, n)]).norm() < 1e-11, "α={alpha} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn bin_operators_and_completeness() {
        let noise = noise_mode_state(2.5, 30).unwrap();
        let cfg = DetectionConfig::for_modes(2, 2.5).unwrap();
        let povm = build_povm(&noise, &cfg, 2).unwrap();
        assert_eq!(povm.bins_per_mode(), 4096);
        assert!(povm.deficit() <= 1e-3);
        for p in povm.operators() {
            let (v, _) = crate::qstate::eigh_unchecked(p);
            assert!(v[0] >= -1e-12);
            assert!((p - p.adjoint()).camax() < 1e-15);
        }
        let vac_mass: f64 = povm.operators().iter().map(|p| p[(0, 0)].re).sum();
        assert!((vac_mass - 1.0).abs() < 1e-3);
    }

    #[test]
    fn vacuum_response_width() {
        let noise = noise_mode_state(2.5, 30).unwrap();
        let cfg = DetectionConfig::for_modes(2, 2.5).unwrap();
        let povm = build_povm(&noise, &cfg, 2).unwrap();
        let (mut mass, mut var) = (0.0, 0.0);
        for (p, c) in povm.operators().iter().zip(povm.centers()) {
            mass += p[(0, 0)].re;
            var += p[(0, 0)].re * c.re * c.re;
        }
        assert!((var / mass - 1.75).abs() < 1e-2);
        let vac = noise_mode_state(0.0, 30).unwrap();
        let sharp = build_povm(&vac, &cfg, 2).unwrap();
        let center = cfg.bins_per_quadrature / 2;
        let p = &sharp.operators()[center * cfg.bins_per_quadrature + center];
        assert!(p[(1, 1)].re / p[(0, 0)].re < 0.05);
    }

    #[test]
    fn incomplete_grid_is_rejected() {
        let noise = noise_mode_state(2.5, 30).unwrap();
        let mut cfg = DetectionConfig::for_modes(2, 2.5).unwrap();
        cfg.extent = 3.0;
        assert!(matches!(build_povm(&noise, &cfg, 2), Err(Error::Incomplete { .. })));
    }

    #[test]
    fn coherent_completeness_low_fock() {
        let cfg = DetectionConfig::for_modes(1, 2.5).unwrap();
        let povm = coherent_povm(&cfg, 31).unwrap();
        for n in 0..8 {
            assert!((povm.completeness()[(n, n)].re - 1.0).abs() < 1e-3);
        }
    }
}
