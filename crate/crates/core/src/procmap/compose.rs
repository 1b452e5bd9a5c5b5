use super::ProcessMap;
use crate::error::{Error, Result};
use crate::qstate::{CMatrix, DensityMatrix};
use crate::register::Register;
use crate::seqsim::{Basis, DEFAULT_DENSE_LIMIT};

/// n − 1 applications of a repeat map followed by a final map, starting
/// from ρ₀ on the auxiliary qubit.
#[derive(Clone, Debug)]
pub struct Composition {
    map_repeat: ProcessMap,
    map_final: ProcessMap,
    rho0: CMatrix,
    n: usize,
}

pub fn compose_state(
    map_repeat: &ProcessMap,
    map_final: &ProcessMap,
    rho0: &DensityMatrix,
    n: usize,
) -> Result<Composition> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: format!("composition needs at least 2 modes, got {n}"),
        });
    }
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "initial auxiliary state must be a qubit, got dimension {}",
            rho0.dim()
        )));
    }
    Ok(Composition {
        map_repeat: map_repeat.clone(),
        map_final: map_final.clone(),
        rho0: rho0.matrix().clone(),
        n,
    })
}

impl Composition {
    pub fn n_modes(&self) -> usize {
        self.n
    }

    fn map_for(&self, cycle: usize) -> &ProcessMap {
        if cycle == self.n {
            &self.map_final
        } else {
            &self.map_repeat
        }
    }

    /// Full photonic state (auxiliary traced out).
    pub fn dense(&self) -> Result<DensityMatrix> {
        self.dense_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn dense_with_limit(&self, limit: usize) -> Result<DensityMatrix> {
        if self.n > limit {
            return Err(Error::DenseLimitExceeded {
                limit,
                requested: self.n,
            });
        }
        let mut reg = Register::single("A", self.rho0.clone());
        for i in 1..=self.n {
            reg.apply_cycle_map(self.map_for(i).choi(), &format!("P{i}"))?;
        }
        reg.trace_out("A")?;
        reg.into_density()
    }

    /// ρ_D on (P1, Pn) after projecting P2..P(n−1) right after emission.
    pub fn projected(&self, basis: Basis) -> Result<(DensityMatrix, f64)> {
        let mut curve = self.projected_curve(basis, self.n)?;
        Ok(curve.pop().map(|(_, rho, p)| (rho, p)).expect("n >= 2"))
    }

    /// Projected pair states for every chain length 2..=n_max, sharing the
    /// propagation: entry (n, ρ_D, probability).
    pub fn projected_curve(&self, basis: Basis, n_max: usize) -> Result<Vec<(usize, DensityMatrix, f64)>> {
        let ket = basis.ket();
        let mut reg = Register::single("A", self.rho0.clone());
        reg.apply_cycle_map(self.map_repeat.choi(), "P1")?;
        let mut prob = 1.0;
        let mut out = Vec::with_capacity(n_max.saturating_sub(1));
        for n in 2..=n_max {
            let label = format!("P{n}");
            let mut last = reg.clone();
            last.apply_cycle_map(self.map_final.choi(), &label)?;
            last.trace_out("A")?;
            out.push((n, last.into_density()?, prob));
            if n < n_max {
                reg.apply_cycle_map(self.map_repeat.choi(), &label)?;
                prob *= reg.project(&label, &ket)?;
            }
        }
        Ok(out)
    }
}
