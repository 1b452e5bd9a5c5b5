//! Mutable labeled state used while propagating emission sequences.

use crate::error::{Error, Result};
use crate::qstate::{hermitian_part, CMatrix, ComplexOperator, DensityMatrix, Split, SubsystemLayout, C64, ONE, ZERO};

#[derive(Clone, Debug)]
pub(crate) struct Register {
    dims: Vec<usize>,
    labels: Vec<String>,
    rho: CMatrix,
}

impl Register {
    /// Single subsystem in the given state.
    pub fn single(label: &str, rho: CMatrix) -> Self {
        Self {
            dims: vec![rho.nrows()],
            labels: vec![label.to_string()],
            rho,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Append a qubit in |0⟩ as the least significant factor.
    pub fn append_vacuum(&mut self, label: &str) {
        let d = self.rho.nrows();
        let mut next = CMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                next[(2 * i, 2 * j)] = self.rho[(i, j)];
            }
        }
        self.rho = next;
        self.dims.push(2);
        self.labels.push(label.to_string());
    }

    /// U ρ U† with U acting on the listed factors (composite in the order given).
    pub fn conjugate(&mut self, targets: &[&str], u: &CMatrix) -> Result<()> {
        let pos = targets.iter().map(|t| self.position(t)).collect::<Result<Vec<_>>>()?;
        let split = Split::new(&self.dims, &pos);
        self.rho = split.conjugate(u, &self.rho);
        Ok(())
    }

    /// Superoperator on one factor (row-major vectorization).
    pub fn apply_superop(&mut self, target: &str, s: &CMatrix) -> Result<()> {
        let pos = self.position(target)?;
        let split = Split::new(&self.dims, &[pos]);
        self.rho = split.apply_superop(s, &self.rho);
        Ok(())
    }

    /// Unnormalized ⟨k|ρ|k⟩ on one factor; the factor is removed. Returns its trace.
    pub fn project(&mut self, label: &str, ket: &[C64]) -> Result<f64> {
        let pos = self.position(label)?;
        let split = Split::new(&self.dims, &[pos]);
        let out = split.sandwich(ket, &self.rho);
        let p = out.trace().re;
        if p < 1e-12 {
            return Err(Error::ImpossibleOutcome(p));
        }
        self.rho = out.unscale(p);
        self.dims.remove(pos);
        self.labels.remove(pos);
        Ok(p)
    }

    pub fn trace_out(&mut self, label: &str) -> Result<()> {
        let pos = self.position(label)?;
        let keep: Vec<usize> = (0..self.dims.len()).filter(|&i| i != pos).collect();
        let split = Split::new(&self.dims, &keep);
        self.rho = split.trace_rest(&self.rho);
        self.dims.remove(pos);
        self.labels.remove(pos);
        Ok(())
    }

    /// Diagonal element ⟨1|ρ_label|1⟩ of a qubit factor.
    pub fn excited_population(&self, label: &str) -> Result<f64> {
        let pos = self.position(label)?;
        let split = Split::new(&self.dims, &[pos]);
        let r = split.rest_dim();
        Ok((0..r).map(|k| self.rho[(split.join(1, k), split.join(1, k))].re).sum())
    }

    /// Apply a Choi-form map from the leading qubit `A` to (`A`, new photon);
    /// the photon is appended last. `choi` is indexed (input, A, P).
    pub fn apply_cycle_map(&mut self, choi: &CMatrix, label: &str) -> Result<()> {
        if self.dims[0] != 2 {
            return Err(Error::DimensionMismatch(format!(
                "cycle maps act on a qubit auxiliary, found dimension {}",
                self.dims[0]
            )));
        }
        let r = self.rho.nrows() / 2;
        let mut out = CMatrix::zeros(4 * r, 4 * r);
        for c in 0..2 {
            for d in 0..2 {
                for ap in 0..4 {
                    for bq in 0..4 {
                        let k = choi[(4 * c + ap, 4 * d + bq)];
                        if k == ZERO {
                            continue;
                        }
                        let (a, p) = (ap / 2, ap % 2);
                        let (b, q) = (bq / 2, bq % 2);
                        for x in 0..r {
                            let v_row = (a * r + x) * 2 + p;
                            for y in 0..r {
                                let v = self.rho[(c * r + x, d * r + y)];
                                out[(v_row, (b * r + y) * 2 + q)] += k * v;
                            }
                        }
                    }
                }
            }
        }
        self.rho = out;
        self.dims.push(2);
        self.labels.push(label.to_string());
        Ok(())
    }

    /// Restrict the leading qutrit factor to its {g, e} block.
    pub fn restrict_leading_to_qubit(&mut self) {
        let r = self.rho.nrows() / self.dims[0];
        let sel: Vec<usize> = (0..2 * r).collect();
        self.rho = CMatrix::from_fn(2 * r, 2 * r, |i, j| self.rho[(sel[i], sel[j])]);
        self.dims[0] = 2;
    }

    pub fn into_density(self) -> Result<DensityMatrix> {
        let layout = SubsystemLayout::new(self.dims, self.labels)?;
        let op = ComplexOperator::new(layout, hermitian_part(&self.rho))?;
        Ok(DensityMatrix::from_trusted(op))
    }
}

/// |+⟩ and |0⟩ as kets.
pub(crate) fn plus_ket() -> [C64; 2] {
    let s = C64::new(0.5f64.sqrt(), 0.0);
    [s, s]
}

pub(crate) fn zero_ket() -> [C64; 2] {
    [ONE, ZERO]
}
