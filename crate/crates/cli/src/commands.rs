//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use photonchain::channels::DeviceParams;
use photonchain::circuits::{build_circuit, ideal_state, StateKind};
use photonchain::entangle::{
    dense_curve, entanglement_length, procmap_curve, projected_curve, w_pairwise_curve, NegativityCurve, DEFAULT_EPS,
};
use photonchain::procmap::{
    assignment_correct, reconstruct_map, simulate_cardinal_dataset, Assignment, CycleMapKind, ProcessMapJson, IDENTITY_ASSIGNMENT,
};
use photonchain::qstate::fidelity;
use photonchain::seqsim::{aux_ground_population, flux_trace, photon_populations, run_dense, SimOptions};
use photonchain::tomo::{
    build_povm, coherent_povm, implied_efficiency, mean_photon_number, mle_reconstruct, noise_mode_state, reconstruct_noise,
    synth_histogram, synth_noise_histogram, DetectionConfig, MleOptions, DEFAULT_N_NOISE,
};
use photonchain::{CMatrix, DensityMatrix};
use serde::{Deserialize, Serialize};

use crate::output::{ensure_dir, num, nums, write_json, write_text};
use crate::Global;

/// Largest chain accepted by `tomo`.
pub const MAX_TOMO_MODES: usize = 4;
pub const DEFAULT_SHOTS: u64 = 1_000_000;
/// Noise calibration shots per signal shot.
pub const NOISE_SHOT_FACTOR: u64 = 10;

fn parse_kind(s: &str) -> Result<StateKind, String> {
    s.parse().map_err(|e: photonchain::Error| e.to_string())
}

fn parse_map_kind(s: &str) -> Result<CycleMapKind, String> {
    s.parse().map_err(|e: photonchain::Error| e.to_string())
}

fn sim_options(g: &Global) -> Result<SimOptions> {
    let params = match &g.params {
        Some(path) => DeviceParams::from_path(path).with_context(|| format!("loading --params {}", path.display()))?,
        None => DeviceParams::default(),
    };
    params.validate().context("device parameters")?;
    Ok(if g.noisy {
        SimOptions::noisy(params)
    } else {
        SimOptions {
            params,
            ..SimOptions::noiseless()
        }
    })
}

fn shots(g: &Global, shots: u64) -> Result<Option<u64>> {
    if g.analytic {
        return Ok(None);
    }
    if shots == 0 {
        bail!("invalid shots: must be positive");
    }
    Ok(Some(shots))
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Cluster, GHZ or W.
    #[arg(value_parser = parse_kind)]
    pub kind: StateKind,
    /// Number of photons.
    pub n: usize,
}

#[derive(Serialize)]
struct GenerateReport {
    kind: StateKind,
    n: usize,
    noisy: bool,
    seed: u64,
    /// Null when the chain exceeds the dense-simulation limit.
    fidelity_to_ideal: Option<f64>,
    aux_ground_population: Option<f64>,
    photon_populations: Vec<f64>,
    state: Option<DensityMatrix>,
}

pub fn generate(g: &Global, a: &GenerateArgs) -> Result<()> {
    let opts = sim_options(g)?;
    let circuit = build_circuit(a.kind, a.n).context("invalid n")?;
    let pops = photon_populations(&circuit, &opts)?;
    let flux = flux_trace(&pops, &opts.params)?;
    let (state, fid, ground) = if a.n <= opts.dense_limit {
        let with_aux = run_dense(
            &circuit,
            &SimOptions {
                keep_aux: true,
                ..opts.clone()
            },
        )?;
        let ground = aux_ground_population(&with_aux)?;
        let rho = run_dense(&circuit, &opts)?;
        let f = fidelity(&rho, &ideal_state(a.kind, a.n)?)?;
        (Some(rho), Some(num(f)), Some(num(ground)))
    } else {
        (None, None, None)
    };
    ensure_dir(&g.out)?;
    write_json(
        &g.out,
        "state.json",
        &GenerateReport {
            kind: a.kind,
            n: a.n,
            noisy: opts.noisy,
            seed: g.seed,
            fidelity_to_ideal: fid,
            aux_ground_population: ground,
            photon_populations: nums(&pops),
            state,
        },
    )?;
    write_text(&g.out, "flux.csv", &flux.to_csv())
}

#[derive(Args, Debug)]
pub struct TomoArgs {
    /// Cluster, GHZ or W.
    #[arg(value_parser = parse_kind)]
    pub kind: StateKind,
    /// Number of photons (at most 4).
    pub n: usize,
    /// Shots of the signal histogram.
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    /// Shots of the noise histogram; defaults to ten times --shots.
    #[arg(long)]
    pub noise_shots: Option<u64>,
    /// Bins per quadrature; defaults to the largest power of two within the total-bin budget.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Mean photon number of the added detection noise.
    #[arg(long, default_value_t = DEFAULT_N_NOISE)]
    pub n_noise: f64,
}

#[derive(Serialize)]
struct NoiseReport {
    bins_per_quadrature: usize,
    mean_photon_number: f64,
    implied_efficiency: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct TomoReport {
    kind: StateKind,
    n: usize,
    noisy: bool,
    seed: u64,
    shots: Option<u64>,
    noise_shots: Option<u64>,
    bins_per_quadrature: usize,
    extent: f64,
    n_noise: f64,
    noise_estimate: NoiseReport,
    fidelity_to_ideal: f64,
    fidelity_to_source: f64,
    iterations: usize,
    converged: bool,
    log_likelihood: f64,
    state: DensityMatrix,
}

pub fn tomo(g: &Global, a: &TomoArgs) -> Result<()> {
    if a.n == 0 || a.n > MAX_TOMO_MODES {
        bail!("invalid n: full tomography supports 1..={MAX_TOMO_MODES} modes, got {}", a.n);
    }
    let opts = sim_options(g)?;
    let shots = shots(g, a.shots)?;
    let source = run_dense(&build_circuit(a.kind, a.n)?, &opts)?;
    let ideal = ideal_state(a.kind, a.n)?;

    let mut cfg = DetectionConfig::for_modes(a.n, a.n_noise)?;
    if let Some(b) = a.bins {
        cfg = cfg.with_bins(b)?;
    }
    cfg.total_bins(a.n)?;
    let noise = noise_mode_state(cfg.n_noise, cfg.fock_cutoff)?;
    // The single-mode reference histogram has its own bin budget.
    let noise_cfg = DetectionConfig::for_modes(1, a.n_noise)?;
    let coherent = coherent_povm(&noise_cfg, noise_cfg.fock_cutoff + 1)?;
    let noise_shots = match (shots, a.noise_shots) {
        (None, _) => None,
        (Some(_), Some(0)) => bail!("invalid noise_shots: must be positive"),
        (Some(_), Some(m)) => Some(m),
        (Some(n), None) => Some(n.saturating_mul(NOISE_SHOT_FACTOR)),
    };
    let h_off = synth_noise_histogram(&noise, &coherent, noise_shots, g.seed.wrapping_add(1))?;
    let mle = MleOptions::default();
    let noise_fit = reconstruct_noise(&h_off, &coherent, &mle)?;

    let h_on = synth_histogram(&source, &build_povm(&noise, &cfg, a.n)?, shots, g.seed)?;
    // Detection noise is phase-insensitive: keep only the Fock populations.
    let fit_matrix = noise_fit.state.matrix();
    let dephased = DensityMatrix::from_matrix(noise_fit.state.layout().clone(), CMatrix::from_diagonal(&fit_matrix.diagonal()))?;
    let povm = build_povm(&dephased, &cfg, a.n)?;
    let fit = mle_reconstruct(&h_on, &povm, &mle)?;

    ensure_dir(&g.out)?;
    h_on.write(&g.out.join("H_on.bin"))?;
    h_off.write(&g.out.join("H_off.bin"))?;
    write_json(
        &g.out,
        "tomo.json",
        &TomoReport {
            kind: a.kind,
            n: a.n,
            noisy: opts.noisy,
            seed: g.seed,
            shots,
            noise_shots,
            bins_per_quadrature: cfg.bins_per_quadrature,
            extent: num(cfg.extent),
            n_noise: num(cfg.n_noise),
            noise_estimate: NoiseReport {
                bins_per_quadrature: noise_cfg.bins_per_quadrature,
                mean_photon_number: num(mean_photon_number(&noise_fit.state)),
                implied_efficiency: num(implied_efficiency(&noise_fit.state)),
                iterations: noise_fit.iterations,
                converged: noise_fit.converged,
            },
            fidelity_to_ideal: num(fidelity(&fit.state, &ideal)?),
            fidelity_to_source: num(fidelity(&fit.state, &source)?),
            iterations: fit.iterations,
            converged: fit.converged,
            log_likelihood: num(*fit.log_likelihood.last().expect("start value recorded")),
            state: fit.state,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dense simulation, then projection.
    Dense,
    /// Projected propagation.
    Projected,
    /// Composition of simulated cycle maps.
    Procmap,
    /// W pairwise marginals with the background removed.
    Pairwise,
}

#[derive(Args, Debug)]
pub struct EntcurveArgs {
    /// Cluster, GHZ or W.
    #[arg(value_parser = parse_kind)]
    pub kind: StateKind,
    /// Largest chain length.
    pub n_max: usize,
    /// Defaults to pairwise for W and projected otherwise.
    #[arg(value_enum)]
    pub method: Option<Method>,
    /// Negativity threshold of the entanglement length.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Serialize)]
struct LengthReport {
    kind: StateKind,
    n_max: usize,
    method: Method,
    noisy: bool,
    seed: u64,
    eps: f64,
    entanglement_length: f64,
    crossed: bool,
}

pub fn entcurve(g: &Global, a: &EntcurveArgs) -> Result<()> {
    let opts = sim_options(g)?;
    let method = a.method.unwrap_or(if a.kind == StateKind::W {
        Method::Pairwise
    } else {
        Method::Projected
    });
    if a.n_max < 2 {
        bail!("invalid n_max: need at least 2, got {}", a.n_max);
    }
    let curve: NegativityCurve = match method {
        Method::Dense => dense_curve(a.kind, a.n_max, &opts)?,
        Method::Projected => projected_curve(a.kind, a.n_max, &opts)?,
        Method::Procmap => procmap_curve(a.kind, a.n_max, &opts)?,
        Method::Pairwise => {
            if a.kind != StateKind::W {
                bail!("invalid method: pairwise applies to W chains only");
            }
            w_pairwise_curve(a.n_max, &opts)?
        }
    };
    let length = entanglement_length(&curve, a.eps)?;
    ensure_dir(&g.out)?;
    write_text(&g.out, "curve.csv", &curve.to_csv())?;
    write_json(
        &g.out,
        "length.json",
        &LengthReport {
            kind: a.kind,
            n_max: a.n_max,
            method,
            noisy: opts.noisy,
            seed: g.seed,
            eps: num(a.eps),
            entanglement_length: num(length.value),
            crossed: length.crossed,
        },
    )
}

#[derive(Args, Debug)]
pub struct ProcmapArgs {
    /// CNOT, H+CNOT, SWAP or H+SWAP.
    #[arg(value_parser = parse_map_kind)]
    pub kind: CycleMapKind,
    /// Shots per (input, basis) setting.
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    /// Assignment matrix file (TOML or JSON with key `assignment`, rows indexed by declared level).
    #[arg(long)]
    pub assign: Option<PathBuf>,
    /// Bins per quadrature of the photon histograms.
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Mean photon number of the added detection noise.
    #[arg(long, default_value_t = DEFAULT_N_NOISE)]
    pub n_noise: f64,
    /// Also write the simulated dataset under <out>/dataset.
    #[arg(long)]
    pub save_dataset: bool,
}

#[derive(Deserialize)]
struct AssignmentFile {
    assignment: Assignment,
}

fn load_assignment(path: &Path) -> Result<Assignment> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading --assign {}", path.display()))?;
    let file: AssignmentFile = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        other => bail!("invalid assign: unsupported extension {other:?} (expected .toml or .json)"),
    };
    Ok(file.assignment)
}

#[derive(Serialize)]
struct ProcmapReport {
    kind: CycleMapKind,
    noisy: bool,
    seed: u64,
    shots: Option<u64>,
    bins_per_quadrature: usize,
    assignment: Assignment,
    fidelity_to_ideal: f64,
    fidelity_to_generator: f64,
    generator_fidelity_to_ideal: f64,
    tp_error: f64,
    min_choi_eigenvalue: f64,
}

pub fn procmap(g: &Global, a: &ProcmapArgs) -> Result<()> {
    let opts = sim_options(g)?;
    let shots = shots(g, a.shots)?;
    let assign = match &a.assign {
        Some(p) => load_assignment(p)?,
        None => IDENTITY_ASSIGNMENT,
    };
    let ideal = photonchain::seqsim::simulate_cycle_map(a.kind, &SimOptions::noiseless())?;
    let generator = photonchain::seqsim::simulate_cycle_map(a.kind, &opts)?;
    let cfg = DetectionConfig::for_modes(1, a.n_noise)?.with_bins(a.bins)?;
    let povm = build_povm(&noise_mode_state(cfg.n_noise, cfg.fock_cutoff)?, &cfg, 1)?;
    let raw = simulate_cardinal_dataset(&generator, &povm, &assign, shots, g.seed)?;
    let corrected = assignment_correct(&raw)?;
    let map = reconstruct_map(&corrected, &povm)?;
    let f_ideal = map.choi_fidelity(&ideal)?;
    ensure_dir(&g.out)?;
    if a.save_dataset {
        raw.write_dir(&g.out.join("dataset"))?;
    }
    let json: ProcessMapJson = map.to_json(Some(f_ideal));
    write_json(&g.out, "map.json", &json)?;
    write_json(
        &g.out,
        "procmap.json",
        &ProcmapReport {
            kind: a.kind,
            noisy: opts.noisy,
            seed: g.seed,
            shots,
            bins_per_quadrature: cfg.bins_per_quadrature,
            assignment: assign.map(|r| r.map(num)),
            fidelity_to_ideal: num(f_ideal),
            fidelity_to_generator: num(map.choi_fidelity(&generator)?),
            generator_fidelity_to_ideal: num(generator.choi_fidelity(&ideal)?),
            tp_error: num(map.tp_error()),
            min_choi_eigenvalue: num(map.min_choi_eigenvalue()),
        },
    )
}
