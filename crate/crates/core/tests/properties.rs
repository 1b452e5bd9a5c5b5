//! Cross-module invariants as property tests.

use photonchain::channels::{idle_channel, DeviceParams};
use photonchain::circuits::{build_circuit, ideal_state, StateKind};
use photonchain::entangle::{entanglement_length, w_pair_extract, CurvePoint, NegativityCurve, Source};
use photonchain::procmap::{chi_to_choi, choi_to_chi, project_physical, CycleMapKind};
use photonchain::qstate::{fidelity, negativity, project_to_density, ptrace, ptranspose, trace_distance};
use photonchain::seqsim::{run_dense, run_projected, simulate_cycle_map, Basis, SimOptions};
use photonchain::tomo::{Counts, Histogram, HistogramKind};
use photonchain::{CMatrix, DensityMatrix, SubsystemLayout, C64};
use proptest::prelude::*;

/// ρ = A A† / Tr(A A†) from 2·d² real entries.
fn density_from(layout: SubsystemLayout, entries: &[f64]) -> DensityMatrix {
    let d = layout.total_dim();
    let a = CMatrix::from_fn(d, d, |i, j| C64::new(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1]));
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(layout, m.unscale(tr)).unwrap()
}

fn two_qubits(entries: &[f64]) -> DensityMatrix {
    density_from(SubsystemLayout::qubits(&["P1", "P2"]).unwrap(), entries)
}

fn hermitian_from(d: usize, entries: &[f64]) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |i, j| C64::new(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1]));
    (&a + a.adjoint()).scale(0.5)
}

fn is_density(m: &CMatrix, tol: f64) -> bool {
    let herm = (m - m.adjoint()).norm() <= tol;
    let eig = m.clone().symmetric_eigenvalues();
    herm && (m.trace().re - 1.0).abs() <= tol && eig.iter().all(|&e| e >= -tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_keeps_a_state(entries in prop::collection::vec(-1.0f64..1.0, 32)) {
        let rho = two_qubits(&entries);
        for keep in ["P1", "P2"] {
            let r = ptrace(&rho, &[keep]).unwrap();
            prop_assert!(is_density(r.matrix(), 1e-12));
        }
    }

    #[test]
    fn full_partial_transpose_is_the_transpose(entries in prop::collection::vec(-1.0f64..1.0, 32)) {
        let rho = two_qubits(&entries);
        let both = ptranspose(&rho, &["P1", "P2"]).unwrap();
        prop_assert!((both.matrix() - rho.matrix().transpose()).norm() <= 1e-14);
        let once = ptranspose(&rho, &["P2"]).unwrap();
        prop_assert!((once.matrix() - once.matrix().adjoint()).norm() <= 1e-14);
        prop_assert!((once.matrix().trace().re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn two_qubit_negativity_is_bounded(entries in prop::collection::vec(-1.0f64..1.0, 32)) {
        let n = negativity(&two_qubits(&entries), &["P2"]).unwrap();
        prop_assert!((0.0..=0.5 + 1e-12).contains(&n));
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in prop::collection::vec(-1.0f64..1.0, 32), b in prop::collection::vec(-1.0f64..1.0, 32)) {
        let (x, y) = (two_qubits(&a), two_qubits(&b));
        let fxy = fidelity(&x, &y).unwrap();
        let fyx = fidelity(&y, &x).unwrap();
        prop_assert!((fxy - fyx).abs() <= 1e-8);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&fxy));
        prop_assert!((fidelity(&x, &x).unwrap() - 1.0).abs() <= 1e-8);
        // Fuchs–van de Graaf: 1 − √F ≤ T.
        prop_assert!(1.0 - fxy.sqrt() <= trace_distance(x.matrix(), y.matrix()) + 1e-8);
    }

    #[test]
    fn density_projection_is_idempotent(entries in prop::collection::vec(-1.0f64..1.0, 32)) {
        let h = hermitian_from(4, &entries);
        let p = project_to_density(&h);
        prop_assert!(is_density(&p, 1e-12));
        prop_assert!((project_to_density(&p) - &p).norm() <= 1e-12);
    }

    #[test]
    fn idle_channel_is_cptp(t1e in 5e-6f64..50e-6, ratio_e in 0.1f64..2.0, t1f in 2e-6f64..20e-6, ratio_f in 0.1f64..2.0,
                            tau in 0.0f64..5e-6, n_th in 0.0f64..0.05) {
        let p = DeviceParams {
            t1_e: t1e,
            t2s_e: ratio_e * t1e,
            t1_f: t1f,
            t2s_f: ratio_f * t1f,
            n_th,
            ..DeviceParams::default()
        };
        let ch = idle_channel(&p, tau).unwrap();
        prop_assert!(ch.trace_preservation_error() <= 1e-10);
        prop_assert!(ch.min_choi_eigenvalue() >= -1e-10);
    }

    #[test]
    fn physicality_projection_yields_cptp_maps(kind in 0usize..4, entries in prop::collection::vec(-0.05f64..0.05, 128)) {
        let m = simulate_cycle_map(CycleMapKind::ALL[kind], &SimOptions::noisy_default()).unwrap();
        let choi = m.choi() + hermitian_from(8, &entries);
        let out = project_physical(&choi).unwrap().map;
        prop_assert!(out.tp_error() <= 1e-8);
        prop_assert!(out.min_choi_eigenvalue() >= -1e-9);
        // Projection never moves further than the physical generator lies.
        prop_assert!((out.choi() - &choi).norm() <= (m.choi() - &choi).norm() + 1e-9);
    }

    #[test]
    fn chi_choi_round_trip(entries in prop::collection::vec(-1.0f64..1.0, 128)) {
        let c = hermitian_from(8, &entries);
        let back = chi_to_choi(&choi_to_chi(&c));
        prop_assert!((back - c).norm() <= 1e-12);
    }

    #[test]
    fn histogram_files_are_bit_exact(counts in prop::collection::vec(0u64..1_000_000, 16), probs in prop::collection::vec(0.0f64..1.0, 16), seed in any::<u64>()) {
        let sampled = Histogram::new(vec!["P1".into()], 4, 3.5, Some(seed), HistogramKind::On, Counts::Sampled(counts)).unwrap();
        prop_assert_eq!(Histogram::from_bytes(&sampled.to_bytes().unwrap()).unwrap(), sampled);
        let exact = Histogram::new(vec!["h".into()], 4, 6.5, None, HistogramKind::Off, Counts::Analytic(probs)).unwrap();
        prop_assert_eq!(Histogram::from_bytes(&exact.to_bytes().unwrap()).unwrap(), exact);
    }

    #[test]
    fn w_pair_extraction_returns_a_state(entries in prop::collection::vec(-1.0f64..1.0, 32), n in 2usize..12) {
        let pair = w_pair_extract(&two_qubits(&entries), n).unwrap();
        prop_assert!(is_density(pair.state.matrix(), 1e-10));
    }

    #[test]
    fn entanglement_length_lies_within_the_curve(values in prop::collection::vec(0.0f64..0.5, 2..30), eps in 0.001f64..0.2) {
        let mut curve = NegativityCurve::new();
        for (i, &v) in values.iter().enumerate() {
            curve.push(CurvePoint { d: i + 1, negativity: v, source: Source::Simulation, probability: 1.0 }).unwrap();
        }
        let l = entanglement_length(&curve, eps).unwrap();
        prop_assert!(l.value >= 0.0 && l.value <= values.len() as f64);
        if !l.crossed {
            prop_assert!(values.iter().all(|&v| v >= eps));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn noisy_runs_stay_physical(kind in 0usize..3, n in 2usize..6, scale in 0.3f64..3.0) {
        let kind = [StateKind::Cluster, StateKind::Ghz, StateKind::W][kind];
        let d = DeviceParams::default();
        let params = DeviceParams { t1_e: d.t1_e * scale, t2s_e: d.t2s_e * scale, t1_f: d.t1_f * scale, t2s_f: d.t2s_f * scale, ..d };
        let opts = SimOptions::noisy(params);
        let c = build_circuit(kind, n).unwrap();
        let rho = run_dense(&c, &opts).unwrap();
        prop_assert!(is_density(rho.matrix(), 1e-10));
        let f = fidelity(&rho, &ideal_state(kind, n).unwrap()).unwrap();
        prop_assert!(f <= 1.0 + 1e-9 && f > 0.3);
        let (pair, p) = run_projected(&c, &opts, Basis::for_kind(kind)).unwrap();
        prop_assert!(is_density(pair.matrix(), 1e-10));
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
    }
}
