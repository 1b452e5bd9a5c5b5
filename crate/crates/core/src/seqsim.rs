//! Execution of emission schedules on the auxiliary qutrit plus photons.
//!
//! Each cycle appends a photon in |0⟩, applies the auxiliary gate and the
//! emission gate, then (if noisy) the idle channel on `A` for one repetition
//! period. Besides full dense output, intermediate photons can be projected
//! or traced away as soon as they are emitted, which keeps the live state at
//! a few qubits for arbitrarily long chains.

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::channels::{idle_channel, DeviceParams, QutritChannel};
use crate::circuits::{
    cnot_gate, hadamard_gate, identity_gate, swap_gate, CircuitSpec, StateKind, AUX_LABEL,
};
use crate::error::{Error, Result};
use crate::procmap::{project_physical, CycleMapKind, ProcessMap};
use crate::qstate::{ptrace, round_sig, CMatrix, DensityMatrix, C64, ONE};
use crate::register::{plus_ket, zero_ket, Register};

pub const DEFAULT_DENSE_LIMIT: usize = 6;

/// Measurement basis for intermediate photons; the kept outcome is |+⟩ for X
/// and |0⟩ for Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn ket(&self) -> [C64; 2] {
        match self {
            Basis::X => plus_ket(),
            Basis::Z => zero_ket(),
        }
    }

    /// X for cluster and GHZ chains, Z for W.
    pub fn for_kind(kind: StateKind) -> Basis {
        match kind {
            StateKind::W => Basis::Z,
            _ => Basis::X,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    pub noisy: bool,
    pub params: DeviceParams,
    pub keep_aux: bool,
    pub dense_limit: usize,
}

impl SimOptions {
    pub fn noiseless() -> Self {
        Self {
            noisy: false,
            params: DeviceParams::default(),
            keep_aux: false,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }

    pub fn noisy_default() -> Self {
        Self::noisy(DeviceParams::default())
    }

    pub fn noisy(params: DeviceParams) -> Self {
        Self {
            noisy: true,
            params,
            ..Self::noiseless()
        }
    }

    fn channel(&self) -> Result<Option<QutritChannel>> {
        if self.noisy {
            Ok(Some(idle_channel(&self.params, self.params.t_rep)?))
        } else {
            Ok(None)
        }
    }
}

fn photon_label(i: usize) -> String {
    format!("P{i}")
}

/// Run every cycle of `circuit`, calling `after` once per cycle with the
/// 1-based cycle index.
fn propagate(
    circuit: &CircuitSpec,
    opts: &SimOptions,
    mut after: impl FnMut(&mut Register, usize) -> Result<()>,
) -> Result<Register> {
    let channel = opts.channel()?;
    let mut g = CMatrix::zeros(3, 3);
    g[(0, 0)] = ONE;
    let mut reg = Register::single(AUX_LABEL, g);
    reg.conjugate(&[AUX_LABEL], &circuit.init().qutrit_matrix())?;
    for (idx, cycle) in circuit.cycles().iter().enumerate() {
        let i = idx + 1;
        let label = photon_label(i);
        reg.append_vacuum(&label);
        reg.conjugate(&[AUX_LABEL], &cycle.aux.qutrit_matrix())?;
        reg.conjugate(&[AUX_LABEL, &label], &cycle.emission.qutrit_matrix())?;
        if let Some(ch) = &channel {
            reg.apply_superop(AUX_LABEL, ch.superoperator())?;
        }
        after(&mut reg, i)?;
    }
    Ok(reg)
}

/// Full N-photon state; `A` is kept as the leading qutrit factor if
/// `opts.keep_aux`.
pub fn run_dense(circuit: &CircuitSpec, opts: &SimOptions) -> Result<DensityMatrix> {
    let n = circuit.n_modes();
    if n > opts.dense_limit {
        return Err(Error::DenseLimitExceeded {
            limit: opts.dense_limit,
            requested: n,
        });
    }
    let mut reg = propagate(circuit, opts, |_, _| Ok(()))?;
    if !opts.keep_aux {
        reg.trace_out(AUX_LABEL)?;
    }
    reg.into_density()
}

/// Population of |g⟩ of the auxiliary in a state that kept it.
pub fn aux_ground_population(rho: &DensityMatrix) -> Result<f64> {
    Ok(ptrace(rho, &[AUX_LABEL])?.population(0))
}

/// Pair state of the first and last photon with every intermediate photon
/// projected onto the basis ground state right after its emission, and the
/// cumulative probability of that outcome chain.
pub fn run_projected(circuit: &CircuitSpec, opts: &SimOptions, basis: Basis) -> Result<(DensityMatrix, f64)> {
    let n = circuit.n_modes();
    if n < 2 {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: "projection needs at least 2 modes".into(),
        });
    }
    let ket = basis.ket();
    let mut prob = 1.0;
    let mut reg = propagate(circuit, opts, |reg, i| {
        if i > 1 && i < n {
            prob *= reg.project(&photon_label(i), &ket)?;
        }
        Ok(())
    })?;
    reg.trace_out(AUX_LABEL)?;
    Ok((reg.into_density()?, prob))
}

/// Reduced state of the listed photons (1-based), tracing every other photon
/// as soon as it is emitted.
pub fn run_marginal(circuit: &CircuitSpec, opts: &SimOptions, keep: &[usize]) -> Result<DensityMatrix> {
    let n = circuit.n_modes();
    if keep.is_empty() || keep.iter().any(|&k| k == 0 || k > n) {
        return Err(Error::InvalidParameter {
            field: "keep",
            reason: format!("photon indices must lie in 1..={n} and be nonempty"),
        });
    }
    let mut reg = propagate(circuit, opts, |reg, i| {
        if !keep.contains(&i) {
            reg.trace_out(&photon_label(i))?;
        }
        Ok(())
    })?;
    reg.trace_out(AUX_LABEL)?;
    reg.into_density()
}

/// Mean photon number ⟨1|ρ_Pi|1⟩ of each time bin.
pub fn photon_populations(circuit: &CircuitSpec, opts: &SimOptions) -> Result<Vec<f64>> {
    let mut pops = Vec::with_capacity(circuit.n_modes());
    propagate(circuit, opts, |reg, i| {
        let label = photon_label(i);
        pops.push(reg.excited_population(&label)?);
        reg.trace_out(&label)
    })?;
    Ok(pops)
}

/// One emission cycle as a map from the auxiliary qubit to (A, P), including
/// the idle channel when noisy.
pub fn simulate_cycle_map(kind: CycleMapKind, opts: &SimOptions) -> Result<ProcessMap> {
    let pi = std::f64::consts::PI;
    let (aux, emission) = match kind {
        CycleMapKind::Cnot => (identity_gate(), cnot_gate(pi, 0.0)),
        CycleMapKind::HCnot => (hadamard_gate(), cnot_gate(pi, 0.0)),
        CycleMapKind::Swap => (identity_gate(), swap_gate(pi, 0.0)),
        CycleMapKind::HSwap => (hadamard_gate(), swap_gate(pi, 0.0)),
    };
    let channel = opts.channel()?;
    let map = ProcessMap::from_action(|x| {
        let mut q = CMatrix::zeros(3, 3);
        q.view_mut((0, 0), (2, 2)).copy_from(x);
        let mut reg = Register::single(AUX_LABEL, q);
        reg.append_vacuum("P");
        reg.conjugate(&[AUX_LABEL], &aux.qutrit_matrix()).expect("static labels");
        reg.conjugate(&[AUX_LABEL, "P"], &emission.qutrit_matrix()).expect("static labels");
        if let Some(ch) = &channel {
            reg.apply_superop(AUX_LABEL, ch.superoperator()).expect("static labels");
        }
        reg.restrict_leading_to_qubit();
        reg.matrix().clone()
    })?;
    if map.tp_error() > 1e-12 {
        // Thermal excitation leaks weight into |f⟩, which the qubit model drops.
        return Ok(project_physical(map.choi())?.map);
    }
    Ok(map)
}

/// Photon flux envelope over consecutive time bins.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxTrace {
    /// Sample times in seconds. Each bin includes both end points, so bin
    /// boundaries appear twice (end of one pulse, start of the next).
    pub times: Vec<f64>,
    /// Photons per unit κ⁻¹.
    pub flux: Vec<f64>,
    pub populations: Vec<f64>,
    /// Sample index range of each bin.
    pub bins: Vec<Range<usize>>,
    kappa: f64,
}

/// Sampling step of the envelope.
pub const FLUX_DT: f64 = 0.5e-9;

/// sin² rise over π/J_ac followed by exp(−κ t) decay until the end of the
/// bin, scaled so each bin integrates (in κ⁻¹ units) to its population.
pub fn flux_trace(populations: &[f64], params: &DeviceParams) -> Result<FluxTrace> {
    params.validate()?;
    if let Some(p) = populations.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter {
            field: "populations",
            reason: format!("bin population {p} outside [0, 1]"),
        });
    }
    let (kappa, t_rep, t_rise) = (params.kappa, params.t_rep, params.rise_time());
    if t_rise >= t_rep {
        return Err(Error::InvalidParameter {
            field: "J_ac",
            reason: "rise time pi/J_ac must be shorter than T_rep".into(),
        });
    }
    let steps = (t_rep / FLUX_DT).round() as usize;
    let dt = t_rep / steps as f64;
    // ∫ shape dt over one bin
    let area = t_rise / 2.0 + (1.0 - (-kappa * (t_rep - t_rise)).exp()) / kappa;
    let shape = |t: f64| {
        if t < t_rise {
            (std::f64::consts::FRAC_PI_2 * t / t_rise).sin().powi(2)
        } else {
            (-kappa * (t - t_rise)).exp()
        }
    };
    let mut trace = FluxTrace {
        times: Vec::with_capacity(populations.len() * (steps + 1)),
        flux: Vec::with_capacity(populations.len() * (steps + 1)),
        populations: populations.to_vec(),
        bins: Vec::with_capacity(populations.len()),
        kappa,
    };
    for (k, &p) in populations.iter().enumerate() {
        let amp = p / (kappa * area);
        let start = trace.times.len();
        for j in 0..=steps {
            let t = j as f64 * dt;
            trace.times.push(k as f64 * t_rep + t);
            trace.flux.push(amp * shape(t));
        }
        trace.bins.push(start..trace.times.len());
    }
    Ok(trace)
}

impl FluxTrace {
    /// Composite Simpson integral of each bin in κ⁻¹ units.
    pub fn bin_integrals(&self) -> Vec<f64> {
        self.bins
            .iter()
            .map(|r| {
                let f = &self.flux[r.clone()];
                let m = f.len() - 1;
                let h = (self.times[r.start + 1] - self.times[r.start]) * self.kappa;
                let mut acc = f[0] + f[m];
                for (j, v) in f.iter().enumerate().take(m).skip(1) {
                    acc += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                acc * h / 3.0
            })
            .collect()
    }

    /// `time_ns,flux` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_ns,flux\n");
        for (t, f) in self.times.iter().zip(&self.flux) {
            let _ = writeln!(s, "{},{}", round_sig(t * 1e9, 12), round_sig(*f, 12));
        }
        s
    }
}
