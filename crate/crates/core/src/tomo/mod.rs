//! Heterodyne detection model and maximum-likelihood state tomography.

mod histogram;
mod mle;
mod model;
mod moments;
mod povm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{CMatrix, ComplexOperator, DensityMatrix, SubsystemLayout, C64};

pub use histogram::{synth_histogram, synth_noise_histogram, Counts, Histogram, HistogramKind};
pub use mle::{is_non_decreasing, mle_reconstruct, reconstruct_noise, MleOptions, MleResult, PROBABILITY_FLOOR};
pub(crate) use mle::maximize;
pub(crate) use histogram::sample_cells;
pub(crate) use model::{forward, ModeElements, SeparableModel};
pub use moments::{moment, moments};
pub use povm::{build_povm, coherent_povm, displacement_rows, CoherentPovm, PovmSet};

/// Hardware cap on the total number of histogram cells.
pub const MAX_TOTAL_BINS: u128 = 1 << 24;
pub const DEFAULT_N_NOISE: f64 = 2.5;
pub const DEFAULT_FOCK_CUTOFF: usize = 30;
pub const DEFAULT_COMPLETENESS_TOL: f64 = 1e-3;
/// Largest thermal tail mass accepted when truncating the noise mode.
pub const MAX_NOISE_TAIL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub n_noise: f64,
    pub eta: f64,
    pub bins_per_quadrature: usize,
    /// Half-range L of each quadrature axis.
    pub extent: f64,
    pub fock_cutoff: usize,
    pub completeness_tol: f64,
    /// Enforce the 2^24 total-bin cap.
    pub enforce_bin_budget: bool,
}

impl DetectionConfig {
    /// Defaults for `modes` detected modes: 2^floor(24 / 2N) bins per
    /// quadrature capped at 64, L = 3.5 √(1 + n_noise).
    pub fn for_modes(modes: usize, n_noise: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter {
                field: "modes",
                reason: "at least one mode".into(),
            });
        }
        let cfg = Self {
            n_noise,
            eta: 1.0 / (1.0 + n_noise),
            bins_per_quadrature: default_bins(modes),
            extent: default_extent(n_noise),
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            completeness_tol: DEFAULT_COMPLETENESS_TOL,
            enforce_bin_budget: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bins(mut self, bins_per_quadrature: usize) -> Result<Self> {
        self.bins_per_quadrature = bins_per_quadrature;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_noise >= 0.0 && self.n_noise.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "n_noise",
                reason: format!("must be finite and non-negative, got {}", self.n_noise),
            });
        }
        if (self.eta * (1.0 + self.n_noise) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                field: "eta",
                reason: format!("eta (1 + n_noise) must equal 1, got eta = {}", self.eta),
            });
        }
        if !self.bins_per_quadrature.is_power_of_two() {
            return Err(Error::InvalidParameter {
                field: "bins_per_quadrature",
                reason: format!("{} is not a power of two", self.bins_per_quadrature),
            });
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "extent",
                reason: format!("must be positive, got {}", self.extent),
            });
        }
        if self.fock_cutoff < 1 {
            return Err(Error::InvalidParameter {
                field: "fock_cutoff",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Bin width along one quadrature.
    pub fn bin_width(&self) -> f64 {
        2.0 * self.extent / self.bins_per_quadrature as f64
    }

    pub fn bins_per_mode(&self) -> usize {
        self.bins_per_quadrature * self.bins_per_quadrature
    }

    /// Check the total cell count for `modes` modes against the cap.
    pub fn total_bins(&self, modes: usize) -> Result<usize> {
        let total = (self.bins_per_mode() as u128).checked_pow(modes as u32).unwrap_or(u128::MAX);
        if self.enforce_bin_budget && total > MAX_TOTAL_BINS {
            return Err(Error::BinBudget {
                requested: total,
                limit: MAX_TOTAL_BINS,
            });
        }
        usize::try_from(total).map_err(|_| Error::BinBudget {
            requested: total,
            limit: usize::MAX as u128,
        })
    }

    /// Centers of the single-mode grid, I-major.
    pub fn centers(&self) -> Vec<C64> {
        let b = self.bins_per_quadrature;
        let h = self.bin_width();
        let axis: Vec<f64> = (0..b).map(|k| -self.extent + h * (k as f64 + 0.5)).collect();
        axis.iter()
            .flat_map(|&x| axis.iter().map(move |&y| C64::new(x, y)))
            .collect()
    }
}

pub fn default_bins(modes: usize) -> usize {
    let exp = 24 / (2 * modes.max(1));
    1usize << exp.min(6)
}

pub fn default_extent(n_noise: f64) -> f64 {
    3.5 * (1.0 + n_noise).sqrt()
}

fn fock_layout(dim: usize) -> Result<SubsystemLayout> {
    SubsystemLayout::new(vec![dim], vec!["h"])
}

/// Thermal state Σ n^k/(1+n)^(k+1) |k⟩⟨k| on Fock levels 0..=cutoff, renormalized.
pub fn noise_mode_state(n_noise: f64, fock_cutoff: usize) -> Result<DensityMatrix> {
    if !(n_noise >= 0.0 && n_noise.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "n_noise",
            reason: format!("must be finite and non-negative, got {n_noise}"),
        });
    }
    let d = fock_cutoff + 1;
    let ratio = n_noise / (1.0 + n_noise);
    let tail = ratio.powi(d as i32);
    if tail > MAX_NOISE_TAIL {
        return Err(Error::InvalidParameter {
            field: "fock_cutoff",
            reason: format!("thermal tail mass {tail:.3e} above cutoff {fock_cutoff} exceeds {MAX_NOISE_TAIL:e}"),
        });
    }
    let pops: Vec<f64> = (0..d).map(|k| ratio.powi(k as i32)).collect();
    let norm: f64 = pops.iter().sum();
    let m = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(pops[i] / norm, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new(ComplexOperator::new(fock_layout(d)?, m)?)
}

/// ⟨a†a⟩ of a single-mode Fock state.
pub fn mean_photon_number(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|k| k as f64 * rho.population(k)).sum()
}

/// Efficiency implied by a noise mode: η = 1 / (1 + ⟨n⟩).
pub fn implied_efficiency(noise: &DensityMatrix) -> f64 {
    1.0 / (1.0 + mean_photon_number(noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = DetectionConfig::for_modes(2, 2.5).unwrap();
        assert_eq!(c.bins_per_quadrature, 64);
        assert!((c.eta * 3.5 - 1.0).abs() < 1e-12);
        assert!((c.eta - 0.2857).abs() < 1e-3);
        assert_eq!(DetectionConfig::for_modes(3, 2.5).unwrap().bins_per_quadrature, 16);
        assert_eq!(DetectionConfig::for_modes(4, 2.5).unwrap().bins_per_quadrature, 8);
        assert_eq!(c.total_bins(2).unwrap(), 1 << 24);
        assert!(matches!(c.total_bins(3), Err(Error::BinBudget { .. })));
        let mut open = c.clone();
        open.enforce_bin_budget = false;
        assert!(open.total_bins(3).is_ok());
        assert!(c.clone().with_bins(48).is_err());
        let mut bad = c;
        bad.eta = 0.3;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn noise_state() {
        let vac = noise_mode_state(0.0, 30).unwrap();
        assert_eq!(vac.population(0), 1.0);
        let th = noise_mode_state(2.5, 30).unwrap();
        assert!((mean_photon_number(&th) - 2.5).abs() < 2e-3);
        for k in 0..30 {
            let r = th.population(k + 1) / th.population(k);
            assert!((r - 2.5 / 3.5).abs() < 1e-12);
        }
        assert!(noise_mode_state(2.5, 10).is_err());
        assert!(noise_mode_state(-1.0, 30).is_err());
    }
}

#[cfg(test)]
mod roundtrip;
