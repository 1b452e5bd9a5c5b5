//! Gate set and emission schedules for cluster, GHZ and W states.
//!
//! The auxiliary system `A` is a qutrit {g, e, f}. Every gate here is
//! defined on the {g, e} block and acts as the identity on `f`; two-qubit
//! gates use the basis {g0, g1, e0, e1} with `A` most significant.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{CMatrix, ComplexOperator, DensityMatrix, SubsystemLayout, C64, ONE, ZERO};

pub const AUX_LABEL: &str = "A";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateKind {
    Cluster,
    #[serde(rename = "GHZ")]
    Ghz,
    W,
    Custom,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateKind::Cluster => "Cluster",
            StateKind::Ghz => "GHZ",
            StateKind::W => "W",
            StateKind::Custom => "Custom",
        })
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cluster" => Ok(StateKind::Cluster),
            "ghz" => Ok(StateKind::Ghz),
            "w" => Ok(StateKind::W),
            "custom" => Ok(StateKind::Custom),
            _ => Err(Error::InvalidParameter {
                field: "kind",
                reason: format!("unknown state kind `{s}` (expected Cluster, GHZ or W)"),
            }),
        }
    }
}

/// Gate identity and parameters; the unitary follows from this.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    Identity,
    Hadamard,
    Ry { theta: f64 },
    Swap { theta: f64, phi: f64 },
    Cnot { theta: f64, phi: f64 },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Identity => "I",
            GateKind::Hadamard => "H",
            GateKind::Ry { .. } => "Ry",
            GateKind::Swap { .. } => "SWAP",
            GateKind::Cnot { .. } => "CNOT",
        }
    }

    pub fn params(&self) -> Option<(f64, f64)> {
        match *self {
            GateKind::Identity | GateKind::Hadamard => None,
            GateKind::Ry { theta } => Some((theta, 0.0)),
            GateKind::Swap { theta, phi } | GateKind::Cnot { theta, phi } => Some((theta, phi)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateKind::Swap { .. } | GateKind::Cnot { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<String>,
    unitary: ComplexOperator,
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn params(&self) -> Option<(f64, f64)> {
        self.kind.params()
    }

    /// Unitary on the qubit block: 2×2 on `A` or 4×4 on (`A`, photon).
    pub fn unitary(&self) -> &ComplexOperator {
        &self.unitary
    }

    /// Unitary on the qutrit: 3×3, or 6×6 in the basis {g0, g1, e0, e1, f0, f1}.
    pub fn qutrit_matrix(&self) -> CMatrix {
        let u = self.unitary.matrix();
        let d = u.nrows();
        let full = d / 2 * 3;
        let mut m = CMatrix::identity(full, full);
        m.view_mut((0, 0), (d, d)).copy_from(u);
        m
    }

    fn single(kind: GateKind, u: CMatrix) -> Gate {
        let layout = SubsystemLayout::qubits(&[AUX_LABEL]).expect("static layout");
        Gate {
            kind,
            targets: vec![AUX_LABEL.into()],
            unitary: ComplexOperator::new(layout, u).expect("2x2 gate"),
        }
    }

    fn pair(kind: GateKind, u: CMatrix) -> Gate {
        let layout = SubsystemLayout::qubits(&[AUX_LABEL, "P"]).expect("static layout");
        Gate {
            kind,
            targets: vec![AUX_LABEL.into(), "P".into()],
            unitary: ComplexOperator::new(layout, u).expect("4x4 gate"),
        }
    }

    /// Rebind the photon target label.
    pub fn on_photon(mut self, label: &str) -> Gate {
        if self.kind.is_two_qubit() {
            self.targets[1] = label.to_string();
        }
        self
    }

    pub fn from_kind(kind: GateKind) -> Gate {
        match kind {
            GateKind::Identity => identity_gate(),
            GateKind::Hadamard => hadamard_gate(),
            GateKind::Ry { theta } => ry_gate(theta),
            GateKind::Swap { theta, phi } => swap_gate(theta, phi),
            GateKind::Cnot { theta, phi } => cnot_gate(theta, phi),
        }
    }
}

pub fn identity_gate() -> Gate {
    Gate::single(GateKind::Identity, CMatrix::identity(2, 2))
}

pub fn hadamard_gate() -> Gate {
    let h = C64::new(0.5f64.sqrt(), 0.0);
    Gate::single(GateKind::Hadamard, CMatrix::from_row_slice(2, 2, &[h, h, h, -h]))
}

/// R_y(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]; R_y(π)|g⟩ = |e⟩.
pub fn ry_gate(theta: f64) -> Gate {
    let (s, c) = (theta / 2.0).sin_cos();
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    );
    Gate::single(GateKind::Ry { theta }, m)
}

/// Rotation on the block {from, to} of the 4-dim gate basis with
/// ⟨to|U|from⟩ = `down` and ⟨from|U|to⟩ = −conj(`down`).
fn block_rotation(from: usize, to: usize, theta: f64, down: C64) -> CMatrix {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let mut m = CMatrix::identity(4, 4);
    m[(from, from)] = c;
    m[(to, to)] = c;
    m[(to, from)] = down;
    m[(from, to)] = -down.conj();
    m
}

/// Partial excitation exchange between `A` and the photon on {g1, e0}.
///
/// ⟨g1|U|e0⟩ = e^{iφ} sin θ/2, so SWAP(π, 0)|e0⟩ = |g1⟩.
pub fn swap_gate(theta: f64, phi: f64) -> Gate {
    let down = C64::from_polar((theta / 2.0).sin(), phi);
    // basis index: g0=0, g1=1, e0=2, e1=3; emission moves e0 -> g1
    Gate::pair(GateKind::Swap { theta, phi }, block_rotation(2, 1, theta, down))
}

/// Conditional emission on {e0, e1}: ⟨e1|U|e0⟩ = e^{−iφ} sin θ/2.
pub fn cnot_gate(theta: f64, phi: f64) -> Gate {
    let down = C64::from_polar((theta / 2.0).sin(), -phi);
    Gate::pair(GateKind::Cnot { theta, phi }, block_rotation(2, 3, theta, down))
}

/// θ_i = 2 arcsin((n − i + 1)^{−1/2}) for i = 1..n.
pub fn w_angles(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: "W schedule needs at least one mode".into(),
        });
    }
    Ok((1..=n)
        .map(|i| 2.0 * (1.0 / ((n - i + 1) as f64).sqrt()).asin())
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    pub aux: Gate,
    pub emission: Gate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    kind: StateKind,
    init: Gate,
    cycles: Vec<Cycle>,
}

impl CircuitSpec {
    /// Validates that every emission gate is two-qubit, every other gate is
    /// single-qubit, and the last emission gate is SWAP(π, 0).
    pub fn new(kind: StateKind, init: Gate, cycles: Vec<Cycle>) -> Result<Self> {
        if cycles.is_empty() {
            return Err(Error::InvalidParameter {
                field: "cycles",
                reason: "circuit needs at least one cycle".into(),
            });
        }
        if init.kind.is_two_qubit() || cycles.iter().any(|c| c.aux.kind.is_two_qubit()) {
            return Err(Error::InvalidParameter {
                field: "u",
                reason: "auxiliary gates must act on A alone".into(),
            });
        }
        if let Some(i) = cycles.iter().position(|c| !c.emission.kind.is_two_qubit()) {
            return Err(Error::InvalidParameter {
                field: "g",
                reason: format!("cycle {} has no A-photon gate", i + 1),
            });
        }
        let last = cycles.last().unwrap().emission.kind;
        let full_swap = matches!(last, GateKind::Swap { theta, phi }
            if (theta - PI).abs() < 1e-12 && phi.abs() < 1e-12);
        if !full_swap {
            return Err(Error::InvalidParameter {
                field: "g",
                reason: "last emission gate must be SWAP(pi, 0)".into(),
            });
        }
        let cycles = cycles
            .into_iter()
            .enumerate()
            .map(|(i, c)| Cycle {
                aux: c.aux,
                emission: c.emission.on_photon(&format!("P{}", i + 1)),
            })
            .collect();
        Ok(Self { kind, init, cycles })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn n_modes(&self) -> usize {
        self.cycles.len()
    }

    pub fn init(&self) -> &Gate {
        &self.init
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn to_json(&self) -> CircuitJson {
        let aux = |g: &Gate| {
            let (theta, phi) = g.params().unwrap_or((0.0, 0.0));
            AuxGateJson {
                name: g.name().into(),
                theta,
                phi,
            }
        };
        CircuitJson {
            kind: self.kind,
            n: self.n_modes(),
            init: aux(&self.init),
            cycles: self
                .cycles
                .iter()
                .map(|c| {
                    let (theta, phi) = c.emission.params().unwrap_or((0.0, 0.0));
                    CycleJson {
                        u: aux(&c.aux),
                        g: EmissionGateJson {
                            family: c.emission.name().into(),
                            theta,
                            phi,
                        },
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CircuitJson) -> Result<Self> {
        if j.cycles.len() != j.n {
            return Err(Error::InvalidParameter {
                field: "n",
                reason: format!("n = {} but {} cycles listed", j.n, j.cycles.len()),
            });
        }
        let cycles = j
            .cycles
            .iter()
            .map(|c| {
                Ok(Cycle {
                    aux: c.u.to_gate()?,
                    emission: c.g.to_gate()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(j.kind, j.init.to_gate()?, cycles)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxGateJson {
    pub name: String,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

impl AuxGateJson {
    fn to_gate(&self) -> Result<Gate> {
        match self.name.as_str() {
            "I" | "1" => Ok(identity_gate()),
            "H" => Ok(hadamard_gate()),
            "Ry" | "RY" => Ok(ry_gate(self.theta)),
            other => Err(Error::InvalidParameter {
                field: "u.name",
                reason: format!("unknown auxiliary gate `{other}`"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionGateJson {
    pub family: String,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

impl EmissionGateJson {
    fn to_gate(&self) -> Result<Gate> {
        match self.family.as_str() {
            "SWAP" => Ok(swap_gate(self.theta, self.phi)),
            "CNOT" => Ok(cnot_gate(self.theta, self.phi)),
            other => Err(Error::InvalidParameter {
                field: "g.family",
                reason: format!("unknown emission gate family `{other}`"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleJson {
    pub u: AuxGateJson,
    pub g: EmissionGateJson,
}

/// Serialized schedule. `init` is the gate applied to `A` before the first cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub kind: StateKind,
    pub n: usize,
    pub init: AuxGateJson,
    pub cycles: Vec<CycleJson>,
}

fn reference_circuit(kind: StateKind, n: usize) -> Result<CircuitSpec> {
    let (init, aux): (Gate, fn() -> Gate) = match kind {
        StateKind::Cluster => (identity_gate(), hadamard_gate),
        StateKind::Ghz => (hadamard_gate(), identity_gate),
        StateKind::W => (ry_gate(PI), identity_gate),
        StateKind::Custom => {
            return Err(Error::InvalidParameter {
                field: "kind",
                reason: "Custom circuits are built with CircuitSpec::new".into(),
            })
        }
    };
    let emissions: Vec<Gate> = match kind {
        StateKind::W => w_angles(n)?.into_iter().map(|t| swap_gate(t, 0.0)).collect(),
        _ => (1..=n)
            .map(|i| if i == n { swap_gate(PI, 0.0) } else { cnot_gate(PI, 0.0) })
            .collect(),
    };
    let cycles = emissions
        .into_iter()
        .map(|emission| Cycle {
            aux: aux(),
            emission,
        })
        .collect();
    CircuitSpec::new(kind, init, cycles)
}

/// Emission schedule for `n ≥ 2` modes of the given kind.
pub fn build_circuit(kind: StateKind, n: usize) -> Result<CircuitSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: format!("circuits need at least 2 modes, got {n}"),
        });
    }
    reference_circuit(kind, n)
}

/// Noiseless state-vector execution. Returns the joint ket over
/// [A (dim 3), P1..PN].
pub fn execute_pure(circuit: &CircuitSpec) -> Vec<C64> {
    let mut psi = vec![ONE, ZERO, ZERO];
    apply_aux_ket(&mut psi, &circuit.init.qutrit_matrix());
    for cycle in &circuit.cycles {
        // append photon |0⟩: index -> 2 * index
        let mut next = vec![ZERO; psi.len() * 2];
        for (i, a) in psi.iter().enumerate() {
            next[2 * i] = *a;
        }
        psi = next;
        apply_aux_ket(&mut psi, &cycle.aux.qutrit_matrix());
        apply_emission_ket(&mut psi, &cycle.emission.qutrit_matrix());
    }
    psi
}

/// U on the leading qutrit factor.
fn apply_aux_ket(psi: &mut [C64], u: &CMatrix) {
    let rest = psi.len() / 3;
    for r in 0..rest {
        let v: Vec<C64> = (0..3).map(|a| psi[a * rest + r]).collect();
        for a in 0..3 {
            psi[a * rest + r] = (0..3).map(|b| u[(a, b)] * v[b]).sum();
        }
    }
}

/// 6×6 gate on (A, last photon).
fn apply_emission_ket(psi: &mut [C64], u: &CMatrix) {
    let mid = psi.len() / 6;
    for m in 0..mid {
        let idx = |a: usize, p: usize| (a * mid + m) * 2 + p;
        let v: Vec<C64> = (0..6).map(|t| psi[idx(t / 2, t % 2)]).collect();
        for t in 0..6 {
            psi[idx(t / 2, t % 2)] = (0..6).map(|s| u[(t, s)] * v[s]).sum();
        }
    }
}

/// Target state: analytic GHZ and W, and the output of the noiseless
/// reference circuit for Cluster.
pub fn ideal_state(kind: StateKind, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: "ideal state needs at least one mode".into(),
        });
    }
    let layout = SubsystemLayout::photons(n)?;
    let d = 1usize << n;
    let mut ket = vec![ZERO; d];
    match kind {
        StateKind::Ghz => {
            ket[0] = ONE;
            ket[d - 1] = ONE;
        }
        StateKind::W => {
            for i in 0..n {
                ket[1 << i] = ONE;
            }
        }
        StateKind::Cluster => {
            let psi = execute_pure(&reference_circuit(kind, n)?);
            // A returns to |g⟩, so the photonic ket is the g-block
            ket.copy_from_slice(&psi[..d]);
        }
        StateKind::Custom => {
            return Err(Error::InvalidParameter {
                field: "kind",
                reason: "no ideal state for Custom circuits".into(),
            })
        }
    }
    DensityMatrix::pure(layout, &ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{fidelity, negativity, testutil::rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn basis4(k: usize) -> Vec<C64> {
        (0..4).map(|i| if i == k { ONE } else { ZERO }).collect()
    }

    fn apply(g: &Gate, v: &[C64]) -> Vec<C64> {
        let u = g.unitary().matrix();
        (0..v.len())
            .map(|i| (0..v.len()).map(|j| u[(i, j)] * v[j]).sum())
            .collect()
    }

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    fn unitarity_error(m: &CMatrix) -> f64 {
        (m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols())).camax()
    }

    const G0: usize = 0;
    const G1: usize = 1;
    const E0: usize = 2;
    const E1: usize = 3;

    #[test]
    fn swap_reference_actions() {
        assert!((swap_gate(0.0, 0.0).unitary().matrix() - CMatrix::identity(4, 4)).camax() < 1e-15);
        assert!(close(&apply(&swap_gate(PI, 0.0), &basis4(E0)), &basis4(G1)));
        let out = apply(&swap_gate(PI / 2.0, PI / 2.0), &basis4(G1));
        let h = 0.5f64.sqrt();
        let expect = [ZERO, C64::new(h, 0.0), C64::new(0.0, h), ZERO];
        assert!(close(&out, &expect), "{out:?}");
    }

    #[test]
    fn cnot_reference_actions() {
        let g = cnot_gate(PI, 0.0);
        assert!(close(&apply(&g, &basis4(E0)), &basis4(E1)));
        assert!(close(&apply(&g, &basis4(G0)), &basis4(G0)));
        for phi in [0.0, 0.3, 2.0] {
            let id = cnot_gate(0.0, phi);
            assert!((id.unitary().matrix() - CMatrix::identity(4, 4)).camax() < 1e-15);
        }
        let out = apply(&cnot_gate(PI / 2.0, 0.0), &basis4(E0));
        let h = C64::new(0.5f64.sqrt(), 0.0);
        assert!(close(&out, &[ZERO, ZERO, h, h]));
    }

    #[test]
    fn single_qubit_gates() {
        let e = apply(&ry_gate(PI), &[ONE, ZERO]);
        assert!(close(&e, &[ZERO, ONE]));
        let h = apply(&hadamard_gate(), &[ONE, ZERO]);
        let s = C64::new(0.5f64.sqrt(), 0.0);
        assert!(close(&h, &[s, s]));
        let q = hadamard_gate().qutrit_matrix();
        assert_eq!(q[(2, 2)], ONE);
        assert_eq!(q[(0, 2)], ZERO);
    }

    #[test]
    fn gates_unitary_for_random_parameters() {
        let mut r = rng(17);
        for _ in 0..1000 {
            let theta = r.random::<f64>() * 4.0 * PI - 2.0 * PI;
            let phi = r.random::<f64>() * 4.0 * PI - 2.0 * PI;
            for g in [swap_gate(theta, phi), cnot_gate(theta, phi), ry_gate(theta)] {
                assert!(unitarity_error(g.unitary().matrix()) < 1e-12);
                assert!(unitarity_error(&g.qutrit_matrix()) < 1e-12);
            }
        }
        assert!(unitarity_error(hadamard_gate().unitary().matrix()) < 1e-15);
    }

    proptest! {
        #[test]
        fn swap_conserves_excitations(theta in -7.0f64..7.0, phi in -7.0f64..7.0) {
            // excitation number of g0, g1, e0, e1 is 0, 1, 1, 2
            let exc = [0, 1, 1, 2];
            let u = swap_gate(theta, phi).unitary().matrix().clone();
            for i in 0..4 {
                for j in 0..4 {
                    if exc[i] != exc[j] {
                        prop_assert!(u[(i, j)].norm() == 0.0);
                    }
                }
            }
        }

        #[test]
        fn cnot_conserves_auxiliary_level(theta in -7.0f64..7.0, phi in -7.0f64..7.0) {
            let u = cnot_gate(theta, phi).unitary().matrix().clone();
            for i in 0..4 {
                for j in 0..4 {
                    if i / 2 != j / 2 {
                        prop_assert!(u[(i, j)].norm() == 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn w_angle_values() {
        assert_eq!(w_angles(1).unwrap(), vec![PI]);
        let a = w_angles(4).unwrap();
        // θ₁ = 2 arcsin(1/2)
        assert!((a[0] - PI / 3.0).abs() < 1e-14);
        assert!((a[3] - PI).abs() < 1e-15);
        assert!(w_angles(0).is_err());
    }

    #[test]
    fn w_angles_give_uniform_amplitudes() {
        // Track the excitation amplitude left in A and the amplitude handed to each photon.
        let n = 10;
        let mut left = 1.0f64;
        let mut amps = vec![];
        for t in w_angles(n).unwrap() {
            amps.push(left * (t / 2.0).sin());
            left *= (t / 2.0).cos();
        }
        assert!(left.abs() < 1e-15);
        for a in amps {
            assert!((a - 1.0 / (n as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn ideal_state_references() {
        let ghz = ideal_state(StateKind::Ghz, 3).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let corner = (i == 0 || i == 7) && (j == 0 || j == 7);
                let expect = if corner { 0.5 } else { 0.0 };
                assert!((ghz.matrix()[(i, j)].re - expect).abs() < 1e-15);
            }
        }
        let w = ideal_state(StateKind::W, 4).unwrap();
        for v in w.matrix().iter() {
            assert!(v.norm() < 1e-15 || (v.re - 0.25).abs() < 1e-15);
        }
        assert!((ideal_state(StateKind::W, 1).unwrap().population(1) - 1.0).abs() < 1e-15);
        let cl = ideal_state(StateKind::Cluster, 4).unwrap();
        for v in cl.matrix().iter() {
            assert!((v.norm() - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!(ideal_state(StateKind::Custom, 2).is_err());
    }

    #[test]
    fn reference_circuits_reach_targets() {
        for kind in [StateKind::Cluster, StateKind::Ghz, StateKind::W] {
            for n in 2..=6 {
                let psi = execute_pure(&build_circuit(kind, n).unwrap());
                let d = 1 << n;
                let aux_g: f64 = psi[..d].iter().map(|c| c.norm_sqr()).sum();
                assert!((aux_g - 1.0).abs() < 1e-12, "{kind} {n}: aux left excited");
                let out = DensityMatrix::pure(SubsystemLayout::photons(n).unwrap(), &psi[..d]).unwrap();
                let f = fidelity(&out, &ideal_state(kind, n).unwrap()).unwrap();
                assert!((f - 1.0).abs() < 1e-10, "{kind} {n}: {f}");
            }
        }
        let bell = ideal_state(StateKind::Cluster, 2).unwrap();
        assert!((negativity(&bell, &["P2"]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn circuit_shape_and_json() {
        let c = build_circuit(StateKind::W, 3).unwrap();
        assert_eq!(c.n_modes(), 3);
        assert_eq!(c.cycles()[2].emission.targets(), &["A".to_string(), "P3".to_string()]);
        let j = c.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back = CircuitSpec::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(build_circuit(StateKind::Ghz, 1).is_err());

        let bad = vec![Cycle {
            aux: identity_gate(),
            emission: cnot_gate(PI, 0.0),
        }];
        assert!(CircuitSpec::new(StateKind::Custom, identity_gate(), bad).is_err());
        assert_eq!("ghz".parse::<StateKind>().unwrap(), StateKind::Ghz);
        assert!("bogus".parse::<StateKind>().is_err());
    }
}
