//! Quadrature histograms: synthesis and binary file format.
//!
//! File layout: one JSON header line terminated by '\n', then one
//! little-endian 8-byte value per cell in row-major order over
//! (I₁, Q₁, I₂, Q₂, ...). Sampled histograms store u64 counts; analytic
//! (infinite-shot) histograms store the f64 bit patterns of the cell
//! probabilities.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{forward, ModeElements};
use super::povm::{CoherentPovm, PovmSet};
use crate::error::{Error, Result};
use crate::qstate::{pauli_expand, DensityMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistogramKind {
    #[serde(rename = "H_on")]
    On,
    #[serde(rename = "H_off")]
    Off,
}

impl fmt::Display for HistogramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HistogramKind::On => "H_on",
            HistogramKind::Off => "H_off",
        })
    }
}

impl FromStr for HistogramKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H_on" => Ok(HistogramKind::On),
            "H_off" => Ok(HistogramKind::Off),
            other => Err(Error::Format(format!("unknown histogram kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Counts {
    Sampled(Vec<u64>),
    /// Exact cell probabilities (infinite-shot limit).
    Analytic(Vec<f64>),
}

impl Counts {
    pub fn len(&self) -> usize {
        match self {
            Counts::Sampled(c) => c.len(),
            Counts::Analytic(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            Counts::Sampled(c) => c.iter().map(|&x| x as f64).collect(),
            Counts::Analytic(p) => p.clone(),
        }
    }

    pub fn total(&self) -> f64 {
        match self {
            Counts::Sampled(c) => c.iter().map(|&x| x as f64).sum(),
            Counts::Analytic(p) => p.iter().sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    modes: Vec<String>,
    bins_per_quadrature: usize,
    extent: f64,
    shots: Option<u64>,
    seed: Option<u64>,
    kind: HistogramKind,
    counts: Counts,
}

#[derive(Serialize, Deserialize)]
struct Header {
    modes: Vec<String>,
    bins_per_quadrature: usize,
    extent: f64,
    shots: Option<u64>,
    seed: Option<u64>,
    kind: HistogramKind,
    analytic: bool,
}

impl Histogram {
    pub fn new(
        modes: Vec<String>,
        bins_per_quadrature: usize,
        extent: f64,
        seed: Option<u64>,
        kind: HistogramKind,
        counts: Counts,
    ) -> Result<Self> {
        let cells = (bins_per_quadrature * bins_per_quadrature)
            .checked_pow(modes.len() as u32)
            .ok_or_else(|| Error::Format("histogram too large".into()))?;
        if counts.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for {} modes of {}² bins",
                counts.len(),
                modes.len(),
                bins_per_quadrature
            )));
        }
        let shots = match &counts {
            Counts::Sampled(c) => Some(c.iter().sum()),
            Counts::Analytic(_) => None,
        };
        Ok(Self {
            modes,
            bins_per_quadrature,
            extent,
            shots,
            seed,
            kind,
            counts,
        })
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn bins_per_quadrature(&self) -> usize {
        self.bins_per_quadrature
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// `None` in analytic mode.
    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn kind(&self) -> HistogramKind {
        self.kind
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.counts, Counts::Analytic(_))
    }

    pub fn total(&self) -> f64 {
        self.counts.total()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            modes: self.modes.clone(),
            bins_per_quadrature: self.bins_per_quadrature,
            extent: self.extent,
            shots: self.shots,
            seed: self.seed,
            kind: self.kind,
            analytic: self.is_analytic(),
        };
        let mut out = serde_json::to_vec(&header)?;
        out.push(b'\n');
        out.reserve(8 * self.counts.len());
        match &self.counts {
            Counts::Sampled(c) => c.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Counts::Analytic(p) => p.iter().for_each(|x| out.extend_from_slice(&x.to_bits().to_le_bytes())),
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("missing header line".into()))?;
        let header: Header = serde_json::from_slice(&bytes[..nl])?;
        let body = &bytes[nl + 1..];
        if body.len() % 8 != 0 {
            return Err(Error::Format(format!("body length {} is not a multiple of 8", body.len())));
        }
        let words = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let counts = if header.analytic {
            Counts::Analytic(words.map(f64::from_bits).collect())
        } else {
            Counts::Sampled(words.collect())
        };
        let hist = Histogram::new(
            header.modes,
            header.bins_per_quadrature,
            header.extent,
            header.seed,
            header.kind,
            counts,
        )?;
        if hist.shots != header.shots {
            return Err(Error::Format(format!(
                "header shots {:?} disagree with count total {:?}",
                header.shots, hist.shots
            )));
        }
        Ok(hist)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Draw `shots` outcomes from cell probabilities, or keep them exact when
/// `shots` is `None`.
pub(crate) fn sample_cells(mut p: Vec<f64>, min_mass: f64, shots: Option<u64>, seed: u64) -> Result<Counts> {
    for x in p.iter_mut() {
        *x = x.max(0.0);
    }
    let mass: f64 = p.iter().sum();
    if mass < min_mass {
        return Err(Error::Incomplete {
            deficit: 1.0 - mass,
            tolerance: 1.0 - min_mass,
        });
    }
    match shots {
        None => Ok(Counts::Analytic(p)),
        Some(n) => {
            let dist = WeightedIndex::new(&p).map_err(|e| Error::InvalidState(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; p.len()];
            for _ in 0..n {
                counts[dist.sample(&mut rng)] += 1;
            }
            Ok(Counts::Sampled(counts))
        }
    }
}

/// H_on cells p_j = Tr[ρ ⊗_i Π_{j_i}] for an N-qubit ρ, sampled with the
/// given seed (or exact when `shots` is `None`).
pub fn synth_histogram(rho: &DensityMatrix, povm: &PovmSet, shots: Option<u64>, seed: u64) -> Result<Histogram> {
    let layout = rho.layout();
    if !layout.all_qubits() || layout.len() != povm.modes() {
        return Err(Error::DimensionMismatch(format!(
            "state dims {:?} do not match {} detected qubit modes",
            layout.dims(),
            povm.modes()
        )));
    }
    let n = povm.modes();
    let c = pauli_expand(rho.op())?.coeffs().to_vec();
    let p = forward(&vec![ModeElements::new(povm.pauli().to_vec()); n], &c);
    let min_mass = 1.0 - povm.config().completeness_tol * n as f64;
    let counts = sample_cells(p, min_mass, shots, seed)?;
    let cfg = povm.config();
    Histogram::new(
        layout.labels().to_vec(),
        cfg.bins_per_quadrature,
        cfg.extent,
        shots.map(|_| seed),
        HistogramKind::On,
        counts,
    )
}

/// Single-mode H_off cells π⁻¹⟨α_j|ρ_h|α_j⟩ × area for a Fock-space noise state.
pub fn synth_noise_histogram(noise: &DensityMatrix, povm: &CoherentPovm, shots: Option<u64>, seed: u64) -> Result<Histogram> {
    let d = povm.dim();
    if noise.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "noise state dimension {} does not match coherent grid dimension {}",
            noise.dim(),
            d
        )));
    }
    let rho = noise.matrix();
    let p: Vec<f64> = povm
        .vectors()
        .iter()
        .map(|v| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    acc += v[a].conj() * rho[(a, b)] * v[b];
                }
            }
            acc.re
        })
        .collect();
    let cfg = povm.config();
    let counts = sample_cells(p, 1.0 - cfg.completeness_tol, shots, seed)?;
    Histogram::new(
        vec!["h".to_string()],
        cfg.bins_per_quadrature,
        cfg.extent,
        shots.map(|_| seed),
        HistogramKind::Off,
        counts,
    )
}
