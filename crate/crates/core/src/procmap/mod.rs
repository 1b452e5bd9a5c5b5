//! Single-cycle process maps ρ_A → ρ_{A,P}: Pauli tensor χ, Choi matrix,
//! physicality projection, tomography and state composition.

mod cardinal;
mod compose;

pub use cardinal::{
    assignment_correct, reconstruct_map, reconstruct_map_with, simulate_cardinal_dataset, symmetric_assignment, Assignment, AuxBasis,
    CardinalDataset, CardinalInput, CardinalRecord, ReconstructOptions, CARDINAL_INPUTS, FOUR_INPUTS, IDENTITY_ASSIGNMENT, LABELS,
};
pub use compose::{compose_state, Composition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    eigh_unchecked, fidelity_matrices, hermitian_part, hermiticity_error, pauli_string_matrix, round_sig, CMatrix, C64, ZERO,
};

/// Number of output Pauli pairs (σ_i ⊗ σ_j on A, P).
pub const N_OUT: usize = 16;
/// Number of input Paulis on A.
pub const N_IN: usize = 4;

/// χ_{ij}^k with row index i·4 + j (output σ_i ⊗ σ_j) and column k (input σ_k).
pub type Chi = [[f64; N_IN]; N_OUT];

/// Basis change e_{lm} = Σ_k Λ_{lm,k} σ_k from the Pauli basis to matrix units.
pub fn lambda() -> [[C64; 4]; 4] {
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    [
        [h, ZERO, ZERO, h],
        [ZERO, h, ih, ZERO],
        [ZERO, h, -ih, ZERO],
        [h, ZERO, ZERO, -h],
    ]
}

/// CPTP map from the auxiliary qubit to (auxiliary, new photon).
///
/// The Choi matrix is C = Σ_{lm} |l⟩⟨m| ⊗ E(|l⟩⟨m|) over (input copy, A, P),
/// so Tr C = 2 for a trace-preserving map.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMap {
    chi: Chi,
    choi: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleMapKind {
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "H+CNOT")]
    HCnot,
    #[serde(rename = "SWAP")]
    Swap,
    #[serde(rename = "H+SWAP")]
    HSwap,
}

impl CycleMapKind {
    pub const ALL: [CycleMapKind; 4] = [
        CycleMapKind::Cnot,
        CycleMapKind::HCnot,
        CycleMapKind::Swap,
        CycleMapKind::HSwap,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CycleMapKind::Cnot => "CNOT",
            CycleMapKind::HCnot => "H+CNOT",
            CycleMapKind::Swap => "SWAP",
            CycleMapKind::HSwap => "H+SWAP",
        }
    }
}

impl std::str::FromStr for CycleMapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "+").as_str() {
            "CNOT" => Ok(CycleMapKind::Cnot),
            "H+CNOT" | "HCNOT" => Ok(CycleMapKind::HCnot),
            "SWAP" => Ok(CycleMapKind::Swap),
            "H+SWAP" | "HSWAP" => Ok(CycleMapKind::HSwap),
            _ => Err(Error::InvalidParameter {
                field: "kind",
                reason: format!("unknown cycle map `{s}` (expected CNOT, H+CNOT, SWAP or H+SWAP)"),
            }),
        }
    }
}

fn one_qubit_paulis() -> [CMatrix; 4] {
    [0, 1, 2, 3].map(|s| pauli_string_matrix(s, 1))
}

fn two_qubit_paulis() -> Vec<CMatrix> {
    (0..16).map(|s| pauli_string_matrix(s, 2)).collect()
}

/// 4×4 output block E(|l⟩⟨m|) of a Choi matrix.
fn choi_block(choi: &CMatrix, l: usize, m: usize) -> CMatrix {
    choi.view((4 * l, 4 * m), (4, 4)).into_owned()
}

pub fn chi_to_choi(chi: &Chi) -> CMatrix {
    let paulis = two_qubit_paulis();
    let images: Vec<CMatrix> = (0..N_IN)
        .map(|k| {
            let mut m = CMatrix::zeros(4, 4);
            for (o, p) in paulis.iter().enumerate() {
                m += p.scale(chi[o][k]);
            }
            m
        })
        .collect();
    let lam = lambda();
    let mut choi = CMatrix::zeros(8, 8);
    for l in 0..2 {
        for m in 0..2 {
            let mut block = CMatrix::zeros(4, 4);
            for (k, img) in images.iter().enumerate() {
                block += img * lam[2 * l + m][k];
            }
            choi.view_mut((4 * l, 4 * m), (4, 4)).copy_from(&block);
        }
    }
    choi
}

pub fn choi_to_chi(choi: &CMatrix) -> Chi {
    let sig = one_qubit_paulis();
    let paulis = two_qubit_paulis();
    let mut chi = [[0.0; N_IN]; N_OUT];
    for (k, s) in sig.iter().enumerate() {
        let mut img = CMatrix::zeros(4, 4);
        for l in 0..2 {
            for m in 0..2 {
                if s[(l, m)] != ZERO {
                    img += choi_block(choi, l, m) * s[(l, m)];
                }
            }
        }
        for (o, p) in paulis.iter().enumerate() {
            chi[o][k] = (&img * p).trace().re / 4.0;
        }
    }
    chi
}

impl ProcessMap {
    /// From a Hermitian Choi matrix; no physicality check.
    pub fn from_choi(choi: CMatrix) -> Result<Self> {
        if choi.nrows() != 8 || choi.ncols() != 8 {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix must be 8x8, got {}x{}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let herm = hermiticity_error(&choi);
        if herm > 1e-9 {
            return Err(Error::NotHermitian(herm));
        }
        let choi = hermitian_part(&choi);
        Ok(Self {
            chi: choi_to_chi(&choi),
            choi,
        })
    }

    pub fn from_chi(chi: Chi) -> Self {
        let choi = hermitian_part(&chi_to_choi(&chi));
        Self { chi, choi }
    }

    /// Map from an explicit linear action on 2×2 inputs.
    pub fn from_action(f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let mut choi = CMatrix::zeros(8, 8);
        for l in 0..2 {
            for m in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(l, m)] = C64::new(1.0, 0.0);
                choi.view_mut((4 * l, 4 * m), (4, 4)).copy_from(&f(&e));
            }
        }
        Self::from_choi(choi)
    }

    pub fn chi(&self) -> &Chi {
        &self.chi
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// E(ρ) for a 2×2 input, as a 4×4 matrix over (A, P).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(4, 4);
        for l in 0..2 {
            for m in 0..2 {
                if rho[(l, m)] != ZERO {
                    out += choi_block(&self.choi, l, m) * rho[(l, m)];
                }
            }
        }
        out
    }

    /// Tr[C σ_i ⊗ σ₀ ⊗ σ₀] for i = 0..3; (2, 0, 0, 0) for trace-preserving maps.
    pub fn tp_conditions(&self) -> [f64; 4] {
        let reduced = input_marginal(&self.choi);
        let sig = one_qubit_paulis();
        [0, 1, 2, 3].map(|i| (&reduced * &sig[i]).trace().re)
    }

    pub fn tp_error(&self) -> f64 {
        let t = self.tp_conditions();
        (t[0] - 2.0).abs().max(t[1].abs()).max(t[2].abs()).max(t[3].abs())
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        eigh_unchecked(&self.choi).0[0]
    }

    pub fn is_physical(&self) -> bool {
        self.tp_error() <= 1e-8 && self.min_choi_eigenvalue() >= -1e-9
    }

    /// Fidelity between trace-normalized Choi matrices.
    pub fn choi_fidelity(&self, other: &ProcessMap) -> Result<f64> {
        let a = self.choi.unscale(self.choi.trace().re);
        let b = other.choi.unscale(other.choi.trace().re);
        fidelity_matrices(&a, &b)
    }

    pub fn to_json(&self, fidelity_to_ideal: Option<f64>) -> ProcessMapJson {
        ProcessMapJson {
            chi: self.chi.iter().map(|r| r.map(|v| round_sig(v, 12)).to_vec()).collect(),
            choi: (0..8)
                .map(|i| {
                    (0..8)
                        .map(|j| {
                            let z = self.choi[(i, j)];
                            [round_sig(z.re, 12), round_sig(z.im, 12)]
                        })
                        .collect()
                })
                .collect(),
            fidelity_to_ideal: fidelity_to_ideal.map(|f| round_sig(f, 12)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessMapJson {
    pub chi: Vec<Vec<f64>>,
    pub choi: Vec<Vec<[f64; 2]>>,
    pub fidelity_to_ideal: Option<f64>,
}

impl ProcessMapJson {
    pub fn to_map(&self) -> Result<ProcessMap> {
        if self.choi.len() != 8 || self.choi.iter().any(|r| r.len() != 8) {
            return Err(Error::Format("choi must be an 8x8 array".into()));
        }
        ProcessMap::from_choi(CMatrix::from_fn(8, 8, |i, j| {
            let [re, im] = self.choi[i][j];
            C64::new(re, im)
        }))
    }
}

/// Tr_{A,P} C: 2×2 over the input copy.
fn input_marginal(choi: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2, 2, |l, m| choi_block(choi, l, m).trace())
}

fn project_psd(m: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh_unchecked(m);
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        let s = v.max(0.0);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= C64::new(s, 0.0);
        }
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

/// Nearest point of {Tr_{A,P} C = I}: C − (Tr_{A,P} C − I) ⊗ I₄ / 4.
fn project_tp(m: &CMatrix) -> CMatrix {
    let defect = input_marginal(m) - CMatrix::identity(2, 2);
    let mut out = m.clone();
    for l in 0..2 {
        for k in 0..4 {
            for mm in 0..2 {
                out[(4 * l + k, 4 * mm + k)] -= defect[(l, mm)] * 0.25;
            }
        }
    }
    out
}

pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_ITER: usize = 10_000;

/// Outcome of the physicality projection.
#[derive(Clone, Debug)]
pub struct Projection {
    pub map: ProcessMap,
    pub iterations: usize,
    /// Frobenius distance between the last two affine iterates.
    pub residual: f64,
}

/// Frobenius-nearest CPTP Choi matrix via Dykstra's alternating projections
/// between the PSD cone and the trace-preserving affine set.
pub fn project_physical(choi_ls: &CMatrix) -> Result<Projection> {
    if choi_ls.nrows() != 8 || choi_ls.ncols() != 8 {
        return Err(Error::DimensionMismatch("Choi matrix must be 8x8".into()));
    }
    let herm = hermiticity_error(choi_ls);
    if herm > 1e-9 {
        return Err(Error::NotHermitian(herm));
    }
    let mut x = hermitian_part(choi_ls);
    let mut p = CMatrix::zeros(8, 8);
    let mut residual = f64::INFINITY;
    for it in 1..=DYKSTRA_MAX_ITER {
        let y = project_psd(&(&x + &p));
        p = &x + &p - &y;
        // the affine set needs no correction term
        let next = project_tp(&y);
        residual = (&next - &x).norm();
        x = next;
        if residual < DYKSTRA_TOL {
            return Ok(Projection {
                map: ProcessMap::from_choi(hermitian_part(&x))?,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: DYKSTRA_MAX_ITER,
        residual,
    })
}
