//! Idle decoherence of the auxiliary qutrit between emission cycles.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{eigh, CMatrix, ComplexOperator, DensityMatrix, Split, SubsystemLayout, C64, ONE, ZERO};

/// Device timescales and rates in SI units (seconds, rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    #[serde(rename = "T1_e")]
    pub t1_e: f64,
    #[serde(rename = "T1_f")]
    pub t1_f: f64,
    #[serde(rename = "T2s_e")]
    pub t2s_e: f64,
    #[serde(rename = "T2s_f")]
    pub t2s_f: f64,
    pub kappa: f64,
    #[serde(rename = "T_rep")]
    pub t_rep: f64,
    #[serde(rename = "J_ac")]
    pub j_ac: f64,
    /// Thermal occupation of the auxiliary transitions; 0 disables excitation.
    pub n_th: f64,
}

/// Residual thermal population measured after reset, for opt-in use.
pub const MEASURED_N_TH: f64 = 0.003;

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            t1_e: 21e-6,
            t1_f: 7e-6,
            t2s_e: 17e-6,
            t2s_f: 8e-6,
            kappa: 2.0 * PI * 1.95e6,
            t_rep: 900e-9,
            j_ac: 2.0 * PI * 5e6,
            n_th: 0.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T1_e", self.t1_e),
            ("T1_f", self.t1_f),
            ("T2s_e", self.t2s_e),
            ("T2s_f", self.t2s_f),
            ("kappa", self.kappa),
            ("T_rep", self.t_rep),
            ("J_ac", self.j_ac),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if self.t2s_e > 2.0 * self.t1_e {
            return Err(Error::InvalidParameter {
                field: "T2s_e",
                reason: format!("exceeds 2*T1_e: pure-dephasing rate {} < 0", self.gamma_phi_e()),
            });
        }
        if self.t2s_f > 2.0 * self.t1_f {
            return Err(Error::InvalidParameter {
                field: "T2s_f",
                reason: format!("exceeds 2*T1_f: pure-dephasing rate {} < 0", self.gamma_phi_f()),
            });
        }
        if !(self.n_th >= 0.0 && self.n_th.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "n_th",
                reason: format!("must be non-negative, got {}", self.n_th),
            });
        }
        Ok(())
    }

    /// Γφ = 1/T2* − 1/(2 T1) for the e level.
    pub fn gamma_phi_e(&self) -> f64 {
        1.0 / self.t2s_e - 0.5 / self.t1_e
    }

    pub fn gamma_phi_f(&self) -> f64 {
        1.0 / self.t2s_f - 0.5 / self.t1_f
    }

    /// Rise time of the emitted pulse, π / J_ac.
    pub fn rise_time(&self) -> f64 {
        PI / self.j_ac
    }

    /// Read TOML or JSON (chosen by file extension); missing fields take defaults.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let params: DeviceParams = match ext.to_ascii_lowercase().as_str() {
            "toml" => toml::from_str(&text).map_err(|e| Error::Format(e.to_string()))?,
            "json" => serde_json::from_str(&text)?,
            other => {
                return Err(Error::Format(format!(
                    "unsupported config extension `{other}` (use .toml or .json)"
                )))
            }
        };
        params.validate()?;
        Ok(params)
    }
}

/// Linear map on row-major vectorized d×d density matrices (d = 3, or 2 once
/// restricted to the {g, e} block).
#[derive(Clone, Debug, PartialEq)]
pub struct QutritChannel {
    superop: CMatrix,
    duration: f64,
}

fn ket_bra(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Lindblad dissipator D[c] in the row-major convention vec(AXB) = (A ⊗ Bᵀ) vec X.
fn dissipator(c: &CMatrix) -> CMatrix {
    let d = c.nrows();
    let id = CMatrix::identity(d, d);
    let cdc = c.adjoint() * c;
    c.kronecker(&c.map(|z| z.conj())) - (cdc.kronecker(&id) + id.kronecker(&cdc.transpose())).scale(0.5)
}

/// Collapse operators of the idle qutrit.
fn collapse_operators(p: &DeviceParams) -> Vec<CMatrix> {
    let down = 1.0 + p.n_th;
    let mut ops = vec![
        ket_bra(3, 0, 1).scale((down / p.t1_e).sqrt()),
        ket_bra(3, 1, 2).scale((down / p.t1_f).sqrt()),
        ket_bra(3, 1, 1).scale((2.0 * p.gamma_phi_e()).sqrt()),
        ket_bra(3, 2, 2).scale((2.0 * p.gamma_phi_f()).sqrt()),
    ];
    if p.n_th > 0.0 {
        ops.push(ket_bra(3, 1, 0).scale((p.n_th / p.t1_e).sqrt()));
        ops.push(ket_bra(3, 2, 1).scale((p.n_th / p.t1_f).sqrt()));
    }
    ops
}

/// exp(L τ) of the idle Lindblad generator.
pub fn idle_channel(params: &DeviceParams, tau: f64) -> Result<QutritChannel> {
    params.validate()?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "tau",
            reason: format!("idle time must be non-negative, got {tau}"),
        });
    }
    let mut gen = CMatrix::zeros(9, 9);
    for c in collapse_operators(params) {
        gen += dissipator(&c);
    }
    Ok(QutritChannel {
        superop: (gen.scale(tau)).exp(),
        duration: tau,
    })
}

impl QutritChannel {
    pub fn identity(dim: usize) -> Self {
        Self {
            superop: CMatrix::identity(dim * dim, dim * dim),
            duration: 0.0,
        }
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Local dimension the channel acts on.
    pub fn dim(&self) -> usize {
        (self.superop.nrows() as f64).sqrt().round() as usize
    }

    /// `self` after `first`.
    pub fn after(&self, first: &QutritChannel) -> QutritChannel {
        QutritChannel {
            superop: &self.superop * &first.superop,
            duration: self.duration + first.duration,
        }
    }

    /// The map on the {g, e} block. Exact when the idle dynamics never move
    /// population into f, which holds without thermal excitation.
    pub fn restrict_qubit(&self) -> QutritChannel {
        if self.dim() == 2 {
            return self.clone();
        }
        let idx = [0usize, 1, 3, 4]; // (g,g) (g,e) (e,g) (e,e) in 3x3 row-major
        QutritChannel {
            superop: CMatrix::from_fn(4, 4, |r, c| self.superop[(idx[r], idx[c])]),
            duration: self.duration,
        }
    }

    /// Apply to a bare d×d matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        let v: Vec<C64> = m.transpose().iter().copied().collect();
        let out = &self.superop * nalgebra::DVector::from_vec(v);
        CMatrix::from_row_slice(d, d, out.as_slice())
    }

    /// Choi matrix Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|).
    pub fn choi(&self) -> CMatrix {
        let d = self.dim();
        let mut c = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let out = self.apply_matrix(&ket_bra(d, i, j));
                c.view_mut((i * d, j * d), (d, d)).copy_from(&out);
            }
        }
        c
    }

    /// Largest |Tr E(|i⟩⟨j|) − δ_ij|.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let tr = self.apply_matrix(&ket_bra(d, i, j)).trace();
                let expect = if i == j { ONE } else { ZERO };
                worst = worst.max((tr - expect).norm());
            }
        }
        worst
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let layout = SubsystemLayout::new(vec![d, d], vec!["in", "out"]).expect("d >= 2");
        let op = ComplexOperator::new(layout, crate::qstate::hermitian_part(&self.choi()))
            .expect("square choi");
        eigh(&op).expect("hermitian").0[0]
    }
}

/// Apply `channel` to one tensor factor of `rho`. A 3-dim channel on a
/// 2-dim factor is restricted to the {g, e} block first.
pub fn apply_on_subsystem(channel: &QutritChannel, rho: &DensityMatrix, label: &str) -> Result<DensityMatrix> {
    let layout = rho.layout();
    let pos = layout.index_of(label)?;
    let local = layout.dims()[pos];
    let ch = match (channel.dim(), local) {
        (a, b) if a == b => channel.clone(),
        (3, 2) => channel.restrict_qubit(),
        (a, b) => {
            return Err(Error::DimensionMismatch(format!(
                "channel on dimension {a} applied to `{label}` of dimension {b}"
            )))
        }
    };
    let split = Split::new(layout.dims(), &[pos]);
    let out = split.apply_superop(ch.superoperator(), rho.matrix());
    let op = ComplexOperator::new(layout.clone(), crate::qstate::hermitian_part(&out))?;
    Ok(DensityMatrix::from_trusted(op))
}
