use super::*;
use crate::qstate::testutil::*;
use crate::qstate::fidelity;
use super::mle::LikelihoodModel;

fn povm(modes: usize, bins: usize) -> PovmSet {
    let noise = noise_mode_state(2.5, 30).unwrap();
    let cfg = DetectionConfig::for_modes(modes, 2.5).unwrap().with_bins(bins).unwrap();
    build_povm(&noise, &cfg, modes).unwrap()
}

fn bell() -> DensityMatrix {
    let s = C64::new(0.5f64.sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    DensityMatrix::pure(SubsystemLayout::photons(2).unwrap(), &[s, z, z, s]).unwrap()
}

#[test]
fn bell_analytic_and_sampled() {
    let p = povm(2, 32);
    let t = std::time::Instant::now();
    let h = synth_histogram(&bell(), &p, None, 0).unwrap();
    let r = mle_reconstruct(&h, &p, &MleOptions::default()).unwrap();
    let f = fidelity(&r.state, &bell()).unwrap();
    eprintln!("analytic F={f} iters={} {:?}", r.iterations, t.elapsed());
    assert!(f >= 0.999);
    assert!(is_non_decreasing(&r.log_likelihood));
    let t = std::time::Instant::now();
    let h = synth_histogram(&bell(), &p, Some(1_000_000), 11).unwrap();
    assert_eq!(h.shots(), Some(1_000_000));
    let r = mle_reconstruct(&h, &p, &MleOptions::default()).unwrap();
    let f = fidelity(&r.state, &bell()).unwrap();
    eprintln!("sampled F={f} iters={} {:?}", r.iterations, t.elapsed());
    assert!(f >= 0.99);
    assert!(is_non_decreasing(&r.log_likelihood));
}

#[test]
fn vacuum_is_a_fixed_point() {
    let p = povm(2, 16);
    let vac = DensityMatrix::basis(SubsystemLayout::photons(2).unwrap(), 0).unwrap();
    let h = synth_histogram(&vac, &p, None, 0).unwrap();
    let r = mle_reconstruct(&h, &p, &MleOptions::default()).unwrap();
    let f = fidelity(&r.state, &vac).unwrap();
    assert!(f >= 1.0 - 1e-6, "F = {f}");
    assert!(is_non_decreasing(&r.log_likelihood));
}

#[test]
fn ghz3_sampled_reaches_likelihood_optimum() {
    let p = povm(3, 16);
    let ghz = crate::circuits::ideal_state(crate::circuits::StateKind::Ghz, 3).unwrap();
    let coarse = povm(3, 8);
    let analytic = synth_histogram(&ghz, &coarse, None, 0).unwrap();
    let ra = mle_reconstruct(&analytic, &coarse, &MleOptions::default()).unwrap();
    assert!(fidelity(&ra.state, &ghz).unwrap() >= 0.999);

    let h = synth_histogram(&ghz, &p, Some(1_000_000), 5).unwrap();
    let r = mle_reconstruct(&h, &p, &MleOptions::default()).unwrap();
    assert!(is_non_decreasing(&r.log_likelihood));
    let model = SeparableModel::new(vec![ModeElements::new(p.pauli().to_vec()); 3], &h.counts().as_f64()).unwrap();
    let truth = model.evaluate(ghz.matrix(), false).log_likelihood;
    assert!(*r.log_likelihood.last().unwrap() >= truth);
}

#[test]
fn random_rank2_round_trip() {
    let p = povm(2, 16);
    let mut g = rng(21);
    for _ in 0..4 {
        let rho = random_density(&mut g, SubsystemLayout::photons(2).unwrap(), 2);
        let h = synth_histogram(&rho, &p, None, 0).unwrap();
        let r = mle_reconstruct(&h, &p, &MleOptions::default()).unwrap();
        assert!(fidelity(&r.state, &rho).unwrap() >= 0.999);
        assert!(is_non_decreasing(&r.log_likelihood));
    }
}

#[test]
fn mode_permutation_equivariance() {
    let p = povm(2, 16);
    let rho = random_density(&mut rng(4), SubsystemLayout::photons(2).unwrap(), 2);
    let h = synth_histogram(&rho, &p, Some(200_000), 9).unwrap();
    let Counts::Sampled(c) = h.counts() else { unreachable!() };
    let m = p.bins_per_mode();
    let mut swapped = vec![0u64; c.len()];
    for j1 in 0..m {
        for j2 in 0..m {
            swapped[j2 * m + j1] = c[j1 * m + j2];
        }
    }
    let hs = Histogram::new(
        vec!["P2".into(), "P1".into()],
        h.bins_per_quadrature(),
        h.extent(),
        h.seed(),
        HistogramKind::On,
        Counts::Sampled(swapped),
    )
    .unwrap();
    let a = mle_reconstruct(&h, &p, &MleOptions::default()).unwrap().state;
    let b = mle_reconstruct(&hs, &p, &MleOptions::default()).unwrap().state;
    let swap = crate::qstate::Split::new(&[2, 2], &[1, 0]);
    let back = swap.trace_rest(b.matrix());
    assert!(crate::qstate::trace_distance(&back, a.matrix()) < 1e-6);
}

#[test]
fn histogram_files_round_trip_bit_exact() {
    let p = povm(1, 64);
    let rho = DensityMatrix::basis(SubsystemLayout::photons(1).unwrap(), 1).unwrap();
    let dir = std::env::temp_dir().join(format!("photonchain-hist-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for shots in [Some(5000), None] {
        let h = synth_histogram(&rho, &p, shots, 3).unwrap();
        let again = synth_histogram(&rho, &p, shots, 3).unwrap();
        assert_eq!(h.to_bytes().unwrap(), again.to_bytes().unwrap());
        let path = dir.join("h.bin");
        h.write(&path).unwrap();
        let back = Histogram::read(&path).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.to_bytes().unwrap(), std::fs::read(&path).unwrap());
    }
    let a = synth_histogram(&rho, &p, Some(5000), 3).unwrap();
    let b = synth_histogram(&rho, &p, Some(5000), 4).unwrap();
    assert_ne!(a.counts(), b.counts());
    assert!(Histogram::from_bytes(b"{}").is_err());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn empty_and_mismatched_inputs() {
    let p = povm(1, 16);
    let h = Histogram::new(vec!["P1".into()], 16, p.config().extent, None, HistogramKind::On, Counts::Sampled(vec![0; 256])).unwrap();
    assert!(matches!(mle_reconstruct(&h, &p, &MleOptions::default()), Err(Error::EmptyHistogram)));
    let p2 = povm(1, 32);
    let rho = DensityMatrix::basis(SubsystemLayout::photons(1).unwrap(), 0).unwrap();
    let h2 = synth_histogram(&rho, &p2, None, 0).unwrap();
    assert!(mle_reconstruct(&h2, &p, &MleOptions::default()).is_err());
}

#[test]
fn noise_mode_reconstruction() {
    let cfg = DetectionConfig::for_modes(1, 2.5).unwrap();
    let grid = coherent_povm(&cfg, 31).unwrap();
    let thermal = noise_mode_state(2.5, 30).unwrap();
    let h = synth_noise_histogram(&thermal, &grid, None, 0).unwrap();
    assert_eq!(h.kind(), HistogramKind::Off);
    let r = reconstruct_noise(&h, &grid, &MleOptions::default()).unwrap();
    let n = mean_photon_number(&r.state);
    assert!((n - 2.5).abs() < 0.05, "<n> = {n}");
    assert!((implied_efficiency(&r.state) - 0.29).abs() < 0.01);
    assert!(is_non_decreasing(&r.log_likelihood));
    let m = r.state.matrix();
    for i in 0..31 {
        for j in 0..31 {
            if i != j {
                assert!(m[(i, j)].norm() < 0.01);
            }
        }
    }
    let vac = noise_mode_state(0.0, 30).unwrap();
    let h = synth_noise_histogram(&vac, &grid, None, 0).unwrap();
    let r = reconstruct_noise(&h, &grid, &MleOptions::default()).unwrap();
    assert!(fidelity(&r.state, &vac).unwrap() >= 0.999);
}

#[test]
fn vacuum_histogram_matches_noise_distribution() {
    let p = povm(1, 64);
    let cfg = p.config().clone();
    let grid = coherent_povm(&cfg, 31).unwrap();
    let vac = DensityMatrix::basis(SubsystemLayout::photons(1).unwrap(), 0).unwrap();
    let on = synth_histogram(&vac, &p, None, 0).unwrap();
    let off = synth_noise_histogram(&noise_mode_state(2.5, 30).unwrap(), &grid, None, 0).unwrap();
    let (a, b) = (on.counts().as_f64(), off.counts().as_f64());
    let max = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(max < 1e-9, "{max}");
}

