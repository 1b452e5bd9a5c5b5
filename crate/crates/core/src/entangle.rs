//! Localizable negativity along photon chains and entanglement length.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuits::{build_circuit, hadamard_gate, StateKind};
use crate::error::{Error, Result};
use crate::procmap::{compose_state, CycleMapKind};
use crate::qstate::{
    eigh_unchecked, hermitian_part, negativity, project_subsystem, round_sig, CMatrix, ComplexOperator,
    DensityMatrix, SubsystemLayout, C64, NEGATIVE_EIGEN_CUTOFF,
};
use crate::seqsim::{run_dense, run_marginal, run_projected, simulate_cycle_map, Basis, SimOptions};

/// Default threshold for the entanglement-length crossing.
pub const DEFAULT_EPS: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    FullTomography,
    ProcessMap,
    PartialTomography,
    Simulation,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::FullTomography => "full_tomography",
            Source::ProcessMap => "process_map",
            Source::PartialTomography => "partial_tomography",
            Source::Simulation => "simulation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Distance between the two end photons.
    pub d: usize,
    pub negativity: f64,
    pub source: Source,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NegativityCurve {
    points: Vec<CurvePoint>,
}

impl NegativityCurve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, point: CurvePoint) -> Result<()> {
        if point.d == 0 {
            return Err(Error::InvalidParameter {
                field: "D",
                reason: "distance must be at least 1".into(),
            });
        }
        if !(0.0..=0.5 + 1e-9).contains(&point.negativity) {
            return Err(Error::InvalidParameter {
                field: "negativity",
                reason: format!("{} outside [0, 0.5]", point.negativity),
            });
        }
        self.points.push(point);
        Ok(())
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `D,negativity,probability,source` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("D,negativity,probability,source\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                p.d,
                round_sig(p.negativity, 12),
                round_sig(p.probability, 12),
                p.source.as_str()
            );
        }
        s
    }
}

/// Result of projecting every intermediate qubit of a chain.
#[derive(Clone, Debug)]
pub struct Localized {
    pub negativity: f64,
    pub pair: DensityMatrix,
    pub probability: f64,
}

/// Project all qubits except the first and last onto the basis ground state.
pub fn localizable_negativity(rho: &DensityMatrix, basis: Basis) -> Result<Localized> {
    let layout = rho.layout();
    let n = layout.len();
    if n < 2 || !layout.all_qubits() {
        return Err(Error::InvalidLayout(format!(
            "localizable negativity needs a chain of at least 2 qubits, got dims {:?}",
            layout.dims()
        )));
    }
    let labels = layout.labels().to_vec();
    let mut state = rho.clone();
    let mut probability = 1.0;
    for label in &labels[1..n - 1] {
        let (next, p) = project_subsystem(&state, label, &basis.ket())?;
        state = next;
        probability *= p;
    }
    Ok(Localized {
        negativity: negativity(&state, &[&labels[n - 1]])?,
        pair: state,
        probability,
    })
}

#[derive(Clone, Debug)]
pub struct WPair {
    pub state: DensityMatrix,
    /// Trace of N/2 [ρ_mix − (N−2)/N |00⟩⟨00|] before renormalization.
    pub raw_trace: f64,
    /// True if negative eigenvalues had to be clipped.
    pub clamped: bool,
}

/// Remove the |00⟩ background that tracing the other W photons leaves in a
/// pair marginal: ρ = N/2 [ρ_mix − (N−2)/N |00⟩⟨00|], made physical by
/// clipping negative eigenvalues and renormalizing.
pub fn w_pair_extract(rho_mix: &DensityMatrix, n: usize) -> Result<WPair> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: "W pair extraction needs n >= 2".into(),
        });
    }
    if rho_mix.dim() != 4 || !rho_mix.layout().all_qubits() {
        return Err(Error::DimensionMismatch("W pair extraction needs a two-qubit state".into()));
    }
    let nf = n as f64;
    let mut m = rho_mix.matrix().clone();
    m[(0, 0)] -= C64::new((nf - 2.0) / nf, 0.0);
    let m = hermitian_part(&m.scale(nf / 2.0));
    let raw_trace = m.trace().re;
    if raw_trace <= 0.0 {
        return Err(Error::InvalidState(format!(
            "extracted pair has non-positive trace {raw_trace}"
        )));
    }
    let (values, vectors) = eigh_unchecked(&m);
    let clamped = values[0] < -NEGATIVE_EIGEN_CUTOFF;
    let fixed = if clamped {
        let mut scaled = vectors.clone();
        for (c, v) in values.iter().enumerate() {
            let s = C64::new(v.max(0.0), 0.0);
            for r in 0..4 {
                scaled[(r, c)] *= s;
            }
        }
        hermitian_part(&(scaled * vectors.adjoint()))
    } else {
        m
    };
    let tr = fixed.trace().re;
    if tr <= 0.0 {
        return Err(Error::InvalidState(format!("extracted pair has non-positive trace {tr}")));
    }
    let op = ComplexOperator::new(rho_mix.layout().clone(), fixed.unscale(tr))?;
    Ok(WPair {
        state: DensityMatrix::new(op)?,
        raw_trace,
        clamped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementLength {
    pub value: f64,
    /// False when the curve never drops below the threshold; `value` is then
    /// the largest distance in the curve.
    pub crossed: bool,
    pub eps: f64,
}

/// Linear interpolation of the first point where the curve drops below `eps`.
pub fn entanglement_length(curve: &NegativityCurve, eps: f64) -> Result<EntanglementLength> {
    let pts = curve.points();
    if pts.is_empty() {
        return Err(Error::InvalidParameter {
            field: "curve",
            reason: "empty negativity curve".into(),
        });
    }
    let mut sorted: Vec<&CurvePoint> = pts.iter().collect();
    sorted.sort_by_key(|p| p.d);
    for (i, p) in sorted.iter().enumerate() {
        if p.negativity < eps {
            let value = if i == 0 {
                p.d as f64
            } else {
                let q = sorted[i - 1];
                let t = (q.negativity - eps) / (q.negativity - p.negativity);
                q.d as f64 + t * (p.d - q.d) as f64
            };
            return Ok(EntanglementLength {
                value,
                crossed: true,
                eps,
            });
        }
    }
    Ok(EntanglementLength {
        value: sorted.last().unwrap().d as f64,
        crossed: false,
        eps,
    })
}

fn pair_negativity(pair: &DensityMatrix) -> Result<f64> {
    let last = pair.layout().labels().last().unwrap().clone();
    negativity(pair, &[last])
}

/// Dense simulation followed by projection, n = 2..=n_max (n_max ≤ dense limit).
pub fn dense_curve(kind: StateKind, n_max: usize, opts: &SimOptions) -> Result<NegativityCurve> {
    let mut curve = NegativityCurve::new();
    for n in 2..=n_max {
        let rho = run_dense(&build_circuit(kind, n)?, opts)?;
        let loc = localizable_negativity(&rho, Basis::for_kind(kind))?;
        curve.push(CurvePoint {
            d: n - 1,
            negativity: loc.negativity,
            source: Source::Simulation,
            probability: loc.probability,
        })?;
    }
    Ok(curve)
}

/// Projected propagation of the full circuit, n = 2..=n_max.
pub fn projected_curve(kind: StateKind, n_max: usize, opts: &SimOptions) -> Result<NegativityCurve> {
    let mut curve = NegativityCurve::new();
    for n in 2..=n_max {
        let (pair, probability) = run_projected(&build_circuit(kind, n)?, opts, Basis::for_kind(kind))?;
        curve.push(CurvePoint {
            d: n - 1,
            negativity: pair_negativity(&pair)?,
            source: Source::Simulation,
            probability,
        })?;
    }
    Ok(curve)
}

/// Auxiliary start state and (repeat, final) cycle maps of a chain built from
/// identical process maps.
pub fn map_schedule(kind: StateKind) -> Result<(DensityMatrix, CycleMapKind, CycleMapKind)> {
    let q = SubsystemLayout::qubits(&["A"])?;
    match kind {
        StateKind::Ghz => {
            let h = hadamard_gate().unitary().matrix().clone();
            let mut g = CMatrix::zeros(2, 2);
            g[(0, 0)] = C64::new(1.0, 0.0);
            let rho0 = DensityMatrix::from_matrix(q, &h * g * h.adjoint())?;
            Ok((rho0, CycleMapKind::Cnot, CycleMapKind::Swap))
        }
        StateKind::Cluster => Ok((DensityMatrix::basis(q, 0)?, CycleMapKind::HCnot, CycleMapKind::HSwap)),
        other => Err(Error::InvalidParameter {
            field: "kind",
            reason: format!("{other} chains do not repeat a single cycle map"),
        }),
    }
}

/// Composition of simulated cycle maps with projected intermediate photons.
pub fn procmap_curve(kind: StateKind, n_max: usize, opts: &SimOptions) -> Result<NegativityCurve> {
    let (rho0, rep, fin) = map_schedule(kind)?;
    let repeat = simulate_cycle_map(rep, opts)?;
    let last = simulate_cycle_map(fin, opts)?;
    let comp = compose_state(&repeat, &last, &rho0, n_max.max(2))?;
    let mut curve = NegativityCurve::new();
    for (n, pair, probability) in comp.projected_curve(Basis::for_kind(kind), n_max)? {
        curve.push(CurvePoint {
            d: n - 1,
            negativity: pair_negativity(&pair)?,
            source: Source::ProcessMap,
            probability,
        })?;
    }
    Ok(curve)
}

/// Pairwise W curve: marginal of photons (1, j) of an n-photon W chain with
/// the |00⟩ background removed, j = 2..=n.
pub fn w_pairwise_curve(n: usize, opts: &SimOptions) -> Result<NegativityCurve> {
    let circuit = build_circuit(StateKind::W, n)?;
    let mut curve = NegativityCurve::new();
    for j in 2..=n {
        let mix = run_marginal(&circuit, opts, &[1, j])?;
        let pair = w_pair_extract(&mix, n)?;
        curve.push(CurvePoint {
            d: j - 1,
            negativity: pair_negativity(&pair.state)?,
            source: Source::Simulation,
            probability: 1.0,
        })?;
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::ideal_state;
    use crate::qstate::{ptrace, trace_distance};

    fn point(d: usize, negativity: f64) -> CurvePoint {
        CurvePoint {
            d,
            negativity,
            source: Source::Simulation,
            probability: 1.0,
        }
    }

    #[test]
    fn ideal_chains() {
        let ghz = ideal_state(StateKind::Ghz, 4).unwrap();
        let l = localizable_negativity(&ghz, Basis::X).unwrap();
        assert!((l.negativity - 0.5).abs() < 1e-12);
        let w = ideal_state(StateKind::W, 4).unwrap();
        let l = localizable_negativity(&w, Basis::Z).unwrap();
        assert!((l.negativity - 0.5).abs() < 1e-12);
        assert!((l.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn w_pair_identity_exact_on_ideal_states() {
        let w2 = ideal_state(StateKind::W, 2).unwrap();
        for n in 2..=8 {
            let w = ideal_state(StateKind::W, n).unwrap();
            let last = format!("P{n}");
            let mix = ptrace(&w, &["P1", last.as_str()]).unwrap();
            let pair = w_pair_extract(&mix, n).unwrap();
            assert!(!pair.clamped);
            assert!(trace_distance(pair.state.matrix(), w2.matrix()) <= 1e-12);
        }
        let same = w_pair_extract(&w2, 2).unwrap();
        assert!(trace_distance(same.state.matrix(), w2.matrix()) <= 1e-15);
        let both = DensityMatrix::basis(SubsystemLayout::photons(2).unwrap(), 3).unwrap();
        let clipped = w_pair_extract(&both, 4).unwrap();
        assert!(clipped.clamped);
        assert!((clipped.state.population(3) - 1.0).abs() < 1e-12);
        assert!(w_pair_extract(&both, 1).is_err());
    }

    #[test]
    fn crossing_interpolation() {
        let mut flat = NegativityCurve::new();
        for d in 1..=5 {
            flat.push(point(d, 0.5)).unwrap();
        }
        let l = entanglement_length(&flat, DEFAULT_EPS).unwrap();
        assert!(!l.crossed);
        assert_eq!(l.value, 5.0);

        let mut c = NegativityCurve::new();
        c.push(point(1, 0.1)).unwrap();
        c.push(point(2, 0.03)).unwrap();
        c.push(point(3, 0.0)).unwrap();
        let l = entanglement_length(&c, DEFAULT_EPS).unwrap();
        assert!(l.crossed);
        assert!((l.value - (2.0 + 2.0 / 3.0)).abs() < 1e-12);
        assert!(entanglement_length(&NegativityCurve::new(), 0.01).is_err());
        assert!(c.push(point(0, 0.1)).is_err());
        assert!(c.push(point(4, 0.7)).is_err());
        assert!(c.to_csv().starts_with("D,negativity,probability,source\n1,0.1,1,simulation\n"));
    }

    #[test]
    fn curve_sources_agree_noiseless() {
        let opts = SimOptions::noiseless();
        for kind in [StateKind::Ghz, StateKind::Cluster] {
            let a = dense_curve(kind, 4, &opts).unwrap();
            let b = projected_curve(kind, 4, &opts).unwrap();
            let c = procmap_curve(kind, 4, &opts).unwrap();
            for ((x, y), z) in a.points().iter().zip(b.points()).zip(c.points()) {
                assert!((x.negativity - y.negativity).abs() < 1e-6);
                assert!((x.negativity - z.negativity).abs() < 1e-6);
                assert!((x.negativity - 0.5).abs() < 1e-9);
            }
        }
        let w = dense_curve(StateKind::W, 4, &opts).unwrap();
        let wp = projected_curve(StateKind::W, 4, &opts).unwrap();
        for (x, y) in w.points().iter().zip(wp.points()) {
            assert!((x.negativity - y.negativity).abs() < 1e-6);
        }
        assert!(procmap_curve(StateKind::W, 4, &opts).is_err());
    }

    #[test]
    fn noiseless_w_pairs_are_bell_like() {
        let c = w_pairwise_curve(6, &SimOptions::noiseless()).unwrap();
        for p in c.points() {
            assert!((p.negativity - 0.5).abs() < 1e-9);
        }
    }
}
