use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use photonchain::circuits::{build_circuit, ideal_state, StateKind};
use photonchain::entangle::procmap_curve;
use photonchain::procmap::{chi_to_choi, project_physical, reconstruct_map, simulate_cardinal_dataset, CycleMapKind, IDENTITY_ASSIGNMENT};
use photonchain::qstate::{pauli_expand, project_to_density};
use photonchain::seqsim::{run_dense, run_projected, simulate_cycle_map, Basis, SimOptions};
use photonchain::tomo::{build_povm, mle_reconstruct, noise_mode_state, synth_histogram, DetectionConfig, MleOptions};

fn simulation(c: &mut Criterion) {
    let noisy = SimOptions::noisy_default();
    let ghz6 = build_circuit(StateKind::Ghz, 6).unwrap();
    c.bench_function("run_dense GHZ 6 noisy", |b| b.iter(|| run_dense(black_box(&ghz6), &noisy).unwrap()));
    let cluster30 = build_circuit(StateKind::Cluster, 30).unwrap();
    c.bench_function("run_projected Cluster 30 noisy", |b| {
        b.iter(|| run_projected(black_box(&cluster30), &noisy, Basis::X).unwrap())
    });
    c.bench_function("procmap_curve GHZ 40 noisy", |b| b.iter(|| procmap_curve(StateKind::Ghz, black_box(40), &noisy).unwrap()));
}

fn linear_algebra(c: &mut Criterion) {
    let rho = run_dense(&build_circuit(StateKind::W, 4).unwrap(), &SimOptions::noisy_default()).unwrap();
    c.bench_function("pauli_expand 4 qubits", |b| b.iter(|| pauli_expand(black_box(rho.op())).unwrap()));
    c.bench_function("project_to_density 16x16", |b| b.iter(|| project_to_density(black_box(rho.matrix()))));
    let m = simulate_cycle_map(CycleMapKind::HCnot, &SimOptions::noisy_default()).unwrap();
    let mut chi = *m.chi();
    chi[3][0] += 0.05;
    let choi = chi_to_choi(&chi);
    c.bench_function("project_physical perturbed map", |b| b.iter(|| project_physical(black_box(&choi)).unwrap()));
}

fn tomography(c: &mut Criterion) {
    let mut group = c.benchmark_group("tomography");
    group.sample_size(10);
    let bell = ideal_state(StateKind::Ghz, 2).unwrap();
    let cfg = DetectionConfig::for_modes(2, 2.5).unwrap().with_bins(16).unwrap();
    let povm = build_povm(&noise_mode_state(cfg.n_noise, cfg.fock_cutoff).unwrap(), &cfg, 2).unwrap();
    let hist = synth_histogram(&bell, &povm, Some(100_000), 1).unwrap();
    group.bench_function("mle Bell 16 bins", |b| {
        b.iter(|| mle_reconstruct(black_box(&hist), &povm, &MleOptions::default()).unwrap())
    });
    let cfg1 = DetectionConfig::for_modes(1, 2.5).unwrap().with_bins(32).unwrap();
    let povm1 = build_povm(&noise_mode_state(cfg1.n_noise, cfg1.fock_cutoff).unwrap(), &cfg1, 1).unwrap();
    let map = simulate_cycle_map(CycleMapKind::Cnot, &SimOptions::noisy_default()).unwrap();
    let ds = simulate_cardinal_dataset(&map, &povm1, &IDENTITY_ASSIGNMENT, Some(100_000), 2).unwrap();
    group.bench_function("reconstruct_map 32 bins", |b| b.iter(|| reconstruct_map(black_box(&ds), &povm1).unwrap()));
    group.finish();
}

criterion_group!(benches, simulation, linear_algebra, tomography);
criterion_main!(benches);
