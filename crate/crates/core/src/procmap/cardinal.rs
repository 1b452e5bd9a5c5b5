//! Cardinal-state process tomography of a single emission cycle.
//!
//! Each experiment prepares A in one of six cardinal states, applies the map,
//! measures A in the X, Y or Z basis with qutrit labels g/e/f and records the
//! photon quadratures conditioned on the label.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{chi_to_choi, project_physical, Chi, ProcessMap, N_IN, N_OUT};
use crate::error::{Error, Result};
use crate::qstate::{pauli_expand, CMatrix, ComplexOperator, SubsystemLayout, C64, ZERO};
use crate::tomo::{forward, maximize, sample_cells, Counts, Histogram, HistogramKind, MleOptions, ModeElements, PovmSet, SeparableModel};

/// Prepared state of the auxiliary qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CardinalInput {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "g+e")]
    Plus,
    #[serde(rename = "g-e")]
    Minus,
    #[serde(rename = "g+ie")]
    PlusI,
    #[serde(rename = "g-ie")]
    MinusI,
}

pub const CARDINAL_INPUTS: [CardinalInput; 6] = [
    CardinalInput::G,
    CardinalInput::E,
    CardinalInput::Plus,
    CardinalInput::Minus,
    CardinalInput::PlusI,
    CardinalInput::MinusI,
];

/// Minimal informationally complete subset.
pub const FOUR_INPUTS: [CardinalInput; 4] = [CardinalInput::G, CardinalInput::E, CardinalInput::Plus, CardinalInput::PlusI];

impl CardinalInput {
    pub fn label(&self) -> &'static str {
        match self {
            CardinalInput::G => "g",
            CardinalInput::E => "e",
            CardinalInput::Plus => "g+e",
            CardinalInput::Minus => "g-e",
            CardinalInput::PlusI => "g+ie",
            CardinalInput::MinusI => "g-ie",
        }
    }

    fn file_stem(&self) -> &'static str {
        match self {
            CardinalInput::G => "g",
            CardinalInput::E => "e",
            CardinalInput::Plus => "plus",
            CardinalInput::Minus => "minus",
            CardinalInput::PlusI => "plus_i",
            CardinalInput::MinusI => "minus_i",
        }
    }

    pub fn ket(&self) -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            CardinalInput::G => [C64::new(1.0, 0.0), ZERO],
            CardinalInput::E => [ZERO, C64::new(1.0, 0.0)],
            CardinalInput::Plus => [C64::new(s, 0.0), C64::new(s, 0.0)],
            CardinalInput::Minus => [C64::new(s, 0.0), C64::new(-s, 0.0)],
            CardinalInput::PlusI => [C64::new(s, 0.0), C64::new(0.0, s)],
            CardinalInput::MinusI => [C64::new(s, 0.0), C64::new(0.0, -s)],
        }
    }

    pub fn density(&self) -> CMatrix {
        let k = self.ket();
        CMatrix::from_fn(2, 2, |i, j| k[i] * k[j].conj())
    }

    /// Tr(ρ σ_k) / 2 for k = 0..3.
    fn pauli_coefficients(&self) -> [f64; 4] {
        match self {
            CardinalInput::G => [0.5, 0.0, 0.0, 0.5],
            CardinalInput::E => [0.5, 0.0, 0.0, -0.5],
            CardinalInput::Plus => [0.5, 0.5, 0.0, 0.0],
            CardinalInput::Minus => [0.5, -0.5, 0.0, 0.0],
            CardinalInput::PlusI => [0.5, 0.0, 0.5, 0.0],
            CardinalInput::MinusI => [0.5, 0.0, -0.5, 0.0],
        }
    }
}

impl fmt::Display for CardinalInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Measurement basis of the auxiliary qubit. Outcome g is the +1 eigenstate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuxBasis {
    X,
    Y,
    Z,
}

impl AuxBasis {
    pub const ALL: [AuxBasis; 3] = [AuxBasis::X, AuxBasis::Y, AuxBasis::Z];

    fn pauli(&self) -> usize {
        match self {
            AuxBasis::X => 1,
            AuxBasis::Y => 2,
            AuxBasis::Z => 3,
        }
    }

    /// Pauli traces of the projectors onto outcomes g and e.
    fn projector_traces(&self) -> [[f64; 4]; 2] {
        let mut g = [1.0, 0.0, 0.0, 0.0];
        let mut e = g;
        g[self.pauli()] = 1.0;
        e[self.pauli()] = -1.0;
        [g, e]
    }
}

impl fmt::Display for AuxBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuxBasis::X => "X",
            AuxBasis::Y => "Y",
            AuxBasis::Z => "Z",
        })
    }
}

impl FromStr for AuxBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(AuxBasis::X),
            "Y" | "y" => Ok(AuxBasis::Y),
            "Z" | "z" => Ok(AuxBasis::Z),
            other => Err(Error::Format(format!("unknown auxiliary basis {other:?}"))),
        }
    }
}

/// Readout labels of the auxiliary qutrit.
pub const LABELS: [&str; 3] = ["g", "e", "f"];

/// P(declared s | prepared p), indexed [s][p].
pub type Assignment = [[f64; 3]; 3];

pub const IDENTITY_ASSIGNMENT: Assignment = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Every prepared level is declared correctly with probability 1 − err and
/// as each of the two other levels with probability err / 2.
pub fn symmetric_assignment(err: f64) -> Assignment {
    let mut p = [[err / 2.0; 3]; 3];
    for (s, row) in p.iter_mut().enumerate() {
        row[s] = 1.0 - err;
    }
    p
}

fn check_stochastic(assign: &Assignment) -> Result<()> {
    for p in 0..3 {
        let mut sum = 0.0;
        for row in assign {
            let x = row[p];
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidParameter {
                    field: "assignment",
                    reason: format!("entry {x} outside [0, 1] in column {p}"),
                });
            }
            sum += x;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                field: "assignment",
                reason: format!("column {p} sums to {sum}, not 1"),
            });
        }
    }
    Ok(())
}

/// Label-conditioned photon histograms of one (input, basis) setting.
#[derive(Clone, Debug, PartialEq)]
pub struct CardinalRecord {
    pub input: CardinalInput,
    pub basis: AuxBasis,
    /// One B² photon histogram per readout label g, e, f.
    pub labels: [Vec<f64>; 3],
}

impl CardinalRecord {
    pub fn total(&self) -> f64 {
        self.labels.iter().flatten().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CardinalDataset {
    pub bins_per_quadrature: usize,
    pub extent: f64,
    pub assignment: Assignment,
    /// Shots per (input, basis) setting; `None` for exact probabilities.
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    /// Number of assignment corrections applied so far.
    pub corrections: usize,
    pub records: Vec<CardinalRecord>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    bins_per_quadrature: usize,
    extent: f64,
    assignment: Assignment,
    shots: Option<u64>,
    seed: Option<u64>,
    corrections: usize,
    records: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    input: CardinalInput,
    basis: AuxBasis,
    files: [String; 3],
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl CardinalDataset {
    pub fn record(&self, input: CardinalInput, basis: AuxBasis) -> Option<&CardinalRecord> {
        self.records.iter().find(|r| r.input == input && r.basis == basis)
    }

    pub fn inputs(&self) -> Vec<CardinalInput> {
        let mut out: Vec<CardinalInput> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.input) {
                out.push(r.input);
            }
        }
        out
    }

    /// Keep only the records of the listed inputs.
    pub fn restrict(&self, inputs: &[CardinalInput]) -> CardinalDataset {
        let mut out = self.clone();
        out.records.retain(|r| inputs.contains(&r.input));
        out
    }

    /// Write a manifest and one photon histogram file per (input, basis, label).
    /// Raw sampled data keep integer counts; exact or corrected data store f64.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let integral = self.shots.is_some() && self.corrections == 0;
        let mut entries = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let mut files: [String; 3] = Default::default();
            for (l, cells) in r.labels.iter().enumerate() {
                let name = format!("{}_{}_{}.bin", r.input.file_stem(), r.basis, LABELS[l]);
                let counts = if integral {
                    Counts::Sampled(cells.iter().map(|&c| c as u64).collect())
                } else {
                    Counts::Analytic(cells.clone())
                };
                let hist = Histogram::new(
                    vec!["P".to_string()],
                    self.bins_per_quadrature,
                    self.extent,
                    self.seed,
                    HistogramKind::On,
                    counts,
                )?;
                hist.write(&dir.join(&name))?;
                files[l] = name;
            }
            entries.push(ManifestEntry {
                input: r.input,
                basis: r.basis,
                files,
            });
        }
        let manifest = Manifest {
            bins_per_quadrature: self.bins_per_quadrature,
            extent: self.extent,
            assignment: self.assignment,
            shots: self.shots,
            seed: self.seed,
            corrections: self.corrections,
            records: entries,
        };
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<CardinalDataset> {
        let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        let mut records = Vec::with_capacity(manifest.records.len());
        for e in &manifest.records {
            let mut labels: [Vec<f64>; 3] = Default::default();
            for (l, name) in e.files.iter().enumerate() {
                let hist = Histogram::read(&dir.join(name))?;
                if hist.bins_per_quadrature() != manifest.bins_per_quadrature || hist.extent() != manifest.extent {
                    return Err(Error::Format(format!("{name}: grid does not match the manifest")));
                }
                labels[l] = hist.counts().as_f64();
            }
            records.push(CardinalRecord {
                input: e.input,
                basis: e.basis,
                labels,
            });
        }
        Ok(CardinalDataset {
            bins_per_quadrature: manifest.bins_per_quadrature,
            extent: manifest.extent,
            assignment: manifest.assignment,
            shots: manifest.shots,
            seed: manifest.seed,
            corrections: manifest.corrections,
            records,
        })
    }
}

fn single_photon_povm(povm: &PovmSet) -> Result<()> {
    if povm.modes() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "process tomography needs a single-mode photon POVM, got {} modes",
            povm.modes()
        )));
    }
    Ok(())
}

/// Simulate all six inputs in all three bases. `shots` is per setting.
pub fn simulate_cardinal_dataset(
    map: &ProcessMap,
    povm: &PovmSet,
    assign: &Assignment,
    shots: Option<u64>,
    seed: u64,
) -> Result<CardinalDataset> {
    check_stochastic(assign)?;
    single_photon_povm(povm)?;
    let layout = SubsystemLayout::qubits(&["A", "P"])?;
    let photon = ModeElements::new(povm.pauli().to_vec());
    let cells = povm.config().bins_per_mode();
    let min_mass = 1.0 - povm.config().completeness_tol;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(18);
    for input in CARDINAL_INPUTS {
        let out = map.apply(&input.density());
        let c = pauli_expand(&ComplexOperator::new(layout.clone(), out)?)?.coeffs().to_vec();
        for basis in AuxBasis::ALL {
            let aux = ModeElements::new(basis.projector_traces().to_vec());
            let p = forward(&[aux, photon.clone()], &c);
            let mut joint = vec![0.0; 3 * cells];
            for s in 0..3 {
                for o in 0..2 {
                    let w = assign[s][o];
                    if w != 0.0 {
                        for j in 0..cells {
                            joint[s * cells + j] += w * p[o * cells + j];
                        }
                    }
                }
            }
            let sub_seed: u64 = master.random();
            let counts = sample_cells(joint, min_mass, shots, sub_seed)?.as_f64();
            let mut labels: [Vec<f64>; 3] = Default::default();
            for (s, label) in labels.iter_mut().enumerate() {
                *label = counts[s * cells..(s + 1) * cells].to_vec();
            }
            records.push(CardinalRecord { input, basis, labels });
        }
    }
    Ok(CardinalDataset {
        bins_per_quadrature: povm.config().bins_per_quadrature,
        extent: povm.config().extent,
        assignment: *assign,
        shots,
        seed: shots.map(|_| seed),
        corrections: 0,
        records,
    })
}

/// H̃(s) = Σ_{s'} (P⁻¹)[s][s'] H(s'). Negative entries are kept; applying
/// the correction again inverts P a second time.
pub fn assignment_correct(dataset: &CardinalDataset) -> Result<CardinalDataset> {
    let p = Matrix3::from_fn(|s, q| dataset.assignment[s][q]);
    if p.determinant().abs() < 1e-12 {
        return Err(Error::Singular("assignment matrix".into()));
    }
    let inv = p.try_inverse().ok_or_else(|| Error::Singular("assignment matrix".into()))?;
    let mut out = dataset.clone();
    for r in out.records.iter_mut() {
        let cells = r.labels[0].len();
        let mut fixed: [Vec<f64>; 3] = Default::default();
        for (s, f) in fixed.iter_mut().enumerate() {
            *f = (0..cells)
                .map(|j| (0..3).map(|q| inv[(s, q)] * r.labels[q][j]).sum())
                .collect();
        }
        r.labels = fixed;
    }
    out.corrections += 1;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub mle: MleOptions,
    /// Use only the inputs g, e, g+e, g+ie.
    pub four_input: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            mle: MleOptions::default(),
            four_input: false,
        }
    }
}

/// Joint (A, P) output state of one input from its three basis settings.
/// Label f is discarded and negative corrected counts are clipped to zero.
fn output_state(dataset: &CardinalDataset, input: CardinalInput, photon: &ModeElements, opts: &MleOptions) -> Result<CMatrix> {
    let cells = photon.len();
    let mut aux = Vec::with_capacity(6);
    let mut counts = vec![0.0; 6 * cells];
    for (b, basis) in AuxBasis::ALL.iter().enumerate() {
        let record = dataset.record(input, *basis).ok_or_else(|| Error::InvalidParameter {
            field: "dataset",
            reason: format!("input {input} has no {basis} setting"),
        })?;
        for o in 0..2 {
            aux.push(basis.projector_traces()[o].map(|t| t / 3.0));
            let row = &record.labels[o];
            if row.len() != cells {
                return Err(Error::DimensionMismatch(format!(
                    "{} photon cells for a {}-cell POVM",
                    row.len(),
                    cells
                )));
            }
            let at = (2 * b + o) * cells;
            for (dst, &h) in counts[at..at + cells].iter_mut().zip(row) {
                *dst = h.max(0.0);
            }
        }
    }
    let model = SeparableModel::new(vec![ModeElements::new(aux), photon.clone()], &counts)?;
    let (rho, ..) = maximize(&model, opts)?;
    Ok(rho)
}

pub fn reconstruct_map(dataset: &CardinalDataset, povm: &PovmSet) -> Result<ProcessMap> {
    reconstruct_map_with(dataset, povm, &ReconstructOptions::default())
}

/// Per-input joint MLE, least-squares χ over the inputs, then the
/// Frobenius-nearest physical map.
pub fn reconstruct_map_with(dataset: &CardinalDataset, povm: &PovmSet, opts: &ReconstructOptions) -> Result<ProcessMap> {
    single_photon_povm(povm)?;
    if dataset.bins_per_quadrature != povm.config().bins_per_quadrature || dataset.extent != povm.config().extent {
        return Err(Error::DimensionMismatch("dataset grid does not match the photon POVM grid".into()));
    }
    if dataset.records.is_empty() || dataset.records.iter().all(|r| r.total() <= 0.0) {
        return Err(Error::EmptyHistogram);
    }
    let inputs: Vec<CardinalInput> = dataset
        .inputs()
        .into_iter()
        .filter(|i| !opts.four_input || FOUR_INPUTS.contains(i))
        .collect();
    let x = DMatrix::from_fn(inputs.len(), N_IN, |k, m| inputs[k].pauli_coefficients()[m]);
    let sv = x.singular_values();
    let rank = sv.iter().filter(|&&s| s > 1e-9).count();
    if rank < N_IN {
        return Err(Error::RankDeficient(format!(
            "{} inputs span {rank} of {N_IN} input Pauli directions",
            inputs.len()
        )));
    }
    let photon = ModeElements::new(povm.pauli().to_vec());
    let layout = SubsystemLayout::qubits(&["A", "P"])?;
    let mut y = DMatrix::zeros(inputs.len(), N_OUT);
    for (k, &input) in inputs.iter().enumerate() {
        let rho = output_state(dataset, input, &photon, &opts.mle)?;
        let c = pauli_expand(&ComplexOperator::new(layout.clone(), rho)?)?;
        for (o, v) in c.coeffs().iter().enumerate() {
            y[(k, o)] = *v;
        }
    }
    let sol = x
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let mut chi: Chi = [[0.0; N_IN]; N_OUT];
    for (o, row) in chi.iter_mut().enumerate() {
        for (m, v) in row.iter_mut().enumerate() {
            *v = sol[(m, o)];
        }
    }
    Ok(project_physical(&chi_to_choi(&chi))?.map)
}
