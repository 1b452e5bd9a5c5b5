use super::{CMatrix, ComplexOperator, SubsystemLayout, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Real coefficients c_s in ρ = Σ_s c_s σ_s over n-qubit Pauli strings.
///
/// String index s = Σ_q s_q 4^(n-1-q) with σ₀=I, σ₁=X, σ₂=Y, σ₃=Z and the
/// first qubit most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliCoefficients {
    layout: SubsystemLayout,
    coeffs: Vec<f64>,
}

impl PauliCoefficients {
    pub fn new(layout: SubsystemLayout, coeffs: Vec<f64>) -> Result<Self> {
        if !layout.all_qubits() {
            return Err(Error::NotQubits(
                *layout.dims().iter().find(|&&d| d != 2).unwrap(),
            ));
        }
        let expect = 1usize << (2 * layout.len());
        if coeffs.len() != expect {
            return Err(Error::DimensionMismatch(format!(
                "{} Pauli coefficients for {} qubits",
                coeffs.len(),
                layout.len()
            )));
        }
        Ok(Self { layout, coeffs })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.len()
    }

    /// Coefficient of the string given as per-qubit Pauli indices.
    pub fn get(&self, string: &[usize]) -> f64 {
        self.coeffs[string.iter().fold(0, |acc, &s| acc * 4 + s)]
    }
}

/// Bit-flip mask and per-qubit phase selector of a Pauli string.
fn string_parts(s: usize, n: usize) -> (usize, Vec<usize>) {
    let mut kinds = vec![0usize; n];
    let mut rem = s;
    for q in (0..n).rev() {
        kinds[q] = rem % 4;
        rem /= 4;
    }
    let mask = kinds.iter().enumerate().fold(0usize, |m, (q, &k)| {
        if k == 1 || k == 2 {
            m | (1 << (n - 1 - q))
        } else {
            m
        }
    });
    (mask, kinds)
}

/// σ_s[col ⊕ mask, col].
fn column_phase(kinds: &[usize], col: usize) -> C64 {
    let n = kinds.len();
    let mut ph = ONE;
    for (q, &k) in kinds.iter().enumerate() {
        let bit = (col >> (n - 1 - q)) & 1;
        match (k, bit) {
            (2, 0) => ph *= C64::new(0.0, 1.0),
            (2, 1) => ph *= C64::new(0.0, -1.0),
            (3, 1) => ph = -ph,
            _ => {}
        }
    }
    ph
}

/// Dense matrix of a single Pauli string.
pub fn pauli_string_matrix(s: usize, n: usize) -> CMatrix {
    let d = 1usize << n;
    let (mask, kinds) = string_parts(s, n);
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        m[(col ^ mask, col)] = column_phase(&kinds, col);
    }
    m
}

pub fn pauli_expand(op: &ComplexOperator) -> Result<PauliCoefficients> {
    let layout = op.layout();
    if let Some(&d) = layout.dims().iter().find(|&&d| d != 2) {
        return Err(Error::NotQubits(d));
    }
    let herm = op.hermiticity_error();
    if herm > 1e-9 {
        return Err(Error::NotHermitian(herm));
    }
    let n = layout.len();
    let d = 1usize << n;
    let m = op.matrix();
    let coeffs = (0..1usize << (2 * n))
        .map(|s| {
            let (mask, kinds) = string_parts(s, n);
            // Tr(ρ σ) = Σ_col ρ[col, col ⊕ mask] σ[col ⊕ mask, col]
            let tr: C64 = (0..d)
                .map(|col| m[(col, col ^ mask)] * column_phase(&kinds, col))
                .sum();
            tr.re / d as f64
        })
        .collect();
    PauliCoefficients::new(layout.clone(), coeffs)
}

pub fn pauli_assemble(coeffs: &PauliCoefficients) -> ComplexOperator {
    let n = coeffs.n_qubits();
    let d = 1usize << n;
    let mut m = CMatrix::from_element(d, d, ZERO);
    for (s, &c) in coeffs.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let (mask, kinds) = string_parts(s, n);
        for col in 0..d {
            m[(col ^ mask, col)] += column_phase(&kinds, col) * c;
        }
    }
    ComplexOperator::new(coeffs.layout().clone(), m).expect("layout matches by construction")
}
