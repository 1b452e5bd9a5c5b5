use serde::{Deserialize, Serialize};

use super::{CMatrix, ComplexOperator, DensityMatrix, SubsystemLayout, C64};
use crate::error::{Error, Result};

/// Round to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    s.parse().unwrap_or(x)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LayoutJson {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
}

/// On-disk form of an operator: layout header plus rows of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub layout: LayoutJson,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl OperatorJson {
    /// Entries rounded to 12 significant digits.
    pub fn from_operator(op: &ComplexOperator) -> Self {
        let m = op.matrix();
        let entries = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [round_sig(m[(i, j)].re, 12), round_sig(m[(i, j)].im, 12)])
                    .collect()
            })
            .collect();
        Self {
            layout: LayoutJson {
                dims: op.layout().dims().to_vec(),
                labels: op.layout().labels().to_vec(),
            },
            entries,
        }
    }

    pub fn to_operator(&self) -> Result<ComplexOperator> {
        let layout = SubsystemLayout::new(self.layout.dims.clone(), self.layout.labels.clone())?;
        let d = layout.total_dim();
        if self.entries.len() != d || self.entries.iter().any(|r| r.len() != d) {
            return Err(Error::Format(format!("entries are not a {d}x{d} array")));
        }
        let mat = CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.entries[i][j];
            C64::new(re, im)
        });
        ComplexOperator::new(layout, mat)
    }

    /// Parses a density matrix. Rounded entries stay within the trace tolerance,
    /// so no renormalization happens and a write-read-write cycle is stable.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let op = self.to_operator()?;
        let herm = op.hermiticity_error();
        if herm > 1e-9 {
            return Err(Error::NotHermitian(herm));
        }
        let layout = op.layout().clone();
        DensityMatrix::from_matrix(layout, super::hermitian_part(op.matrix()))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::from_operator(self.op()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(d)?;
        raw.to_density().map_err(serde::de::Error::custom)
    }
}
