//! Maximum-likelihood reconstruction.
//!
//! The objective is the log-likelihood of the grid-normalized model
//! L(ρ) = Σ_j H_j log Tr(Π_j ρ) − H log Tr(G ρ). A short run of the
//! G-corrected RρR iteration seeds a monotone accelerated projected-gradient
//! ascent; every accepted iterate has L no smaller than its predecessor.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::{ModeElements, SeparableModel};
use super::povm::{CoherentPovm, PovmSet};
use super::{fock_layout, Histogram};
use crate::error::{Error, Result};
use crate::qstate::{hermitian_part, project_to_density, trace_distance, CMatrix, ComplexOperator, DensityMatrix, SubsystemLayout, C64};

/// Floor for model probabilities inside logarithms and ratios.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

pub(crate) struct Evaluation {
    pub log_likelihood: f64,
    pub normalization: f64,
    /// R(ρ) = Σ_j H_j Π_j / Tr(Π_j ρ) when requested.
    pub r: Option<CMatrix>,
}

pub(crate) trait LikelihoodModel {
    fn dim(&self) -> usize;
    fn total(&self) -> f64;
    fn completeness(&self) -> CMatrix;
    fn evaluate(&self, rho: &CMatrix, gradient: bool) -> Evaluation;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iter: usize,
    /// Trace distance between accepted iterates that ends the run.
    pub tol: f64,
    /// RρR steps before switching to projected gradient.
    pub warm_start: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-9,
            warm_start: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleResult {
    pub state: DensityMatrix,
    /// Log-likelihood of the start state and of every iterate.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn normalize(m: CMatrix) -> CMatrix {
    let m = hermitian_part(&m);
    let tr = m.trace().re;
    m.unscale(tr)
}

/// Stagnation window: stop after this many accepted steps without any
/// resolvable change of the objective.
const STALL_STEPS: usize = 25;

pub(crate) fn maximize(model: &dyn LikelihoodModel, opts: &MleOptions) -> Result<(CMatrix, Vec<f64>, usize, bool)> {
    let total = model.total();
    if !(total > 0.0) {
        return Err(Error::EmptyHistogram);
    }
    let d = model.dim();
    let g = model.completeness();
    let g_inv = g.clone().try_inverse().ok_or(Error::Singular("measurement completeness operator".into()))?;
    let mut x = CMatrix::identity(d, d).unscale(d as f64);
    let mut ev = model.evaluate(&x, true);
    let mut history = vec![ev.log_likelihood];
    let mut iterations = 0;

    for _ in 0..opts.warm_start.min(opts.max_iter) {
        let r = ev.r.take().expect("gradient requested");
        let cand = normalize(&g_inv * &r * &x * &r * &g_inv);
        let next = model.evaluate(&cand, true);
        if next.log_likelihood < ev.log_likelihood {
            ev = model.evaluate(&x, true);
            break;
        }
        iterations += 1;
        let step = trace_distance(&cand, &x);
        history.push(next.log_likelihood);
        x = cand;
        ev = next;
        if step < opts.tol {
            return Ok((x, history, iterations, true));
        }
    }

    // Minimize f = −L/H with a monotone accelerated projected gradient.
    let grad = |e: &Evaluation| -> CMatrix {
        let r = e.r.as_ref().expect("gradient requested");
        (r - g.scale(total / e.normalization)).unscale(-total)
    };
    let mut fx = -ev.log_likelihood / total;
    let mut y = x.clone();
    let mut y_eval = ev;
    let mut theta = 1.0f64;
    let mut step = 1.0f64;
    let mut stalled = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let gy = grad(&y_eval);
        let fy = -y_eval.log_likelihood / total;
        let mut first_try = true;
        let (z, fz) = loop {
            let z = project_to_density(&(&y - gy.scale(step)));
            let fz = -model.evaluate(&z, false).log_likelihood / total;
            let diff = &z - &y;
            let bound = fy + inner(&gy, &diff) + inner(&diff, &diff) / (2.0 * step);
            if fz <= bound + 1e-14 * fy.abs().max(1.0) || step < 1e-12 {
                break (z, fz);
            }
            step *= 0.5;
            first_try = false;
        };
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let accepted = fz <= fx;
        let x_next = if accepted { z.clone() } else { x.clone() };
        let f_next = fz.min(fx);
        let moved = trace_distance(&x_next, &x);
        let y_raw = &x_next + (&z - &x_next).scale(theta / theta_next) + (&x_next - &x).scale((theta - 1.0) / theta_next);
        if (fx - f_next).abs() <= 1e-15 * fx.abs().max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = x_next;
        fx = f_next;
        history.push(-fx * total);
        if accepted && moved < opts.tol {
            converged = true;
            break;
        }
        if stalled >= STALL_STEPS {
            converged = true;
            break;
        }
        if accepted {
            theta = theta_next;
            y = project_to_density(&y_raw);
        } else {
            theta = 1.0;
            y = x.clone();
        }
        y_eval = model.evaluate(&y, true);
        if first_try {
            step *= 1.25;
        }
    }
    Ok((x, history, iterations, converged))
}

/// Reconstruct the qubit-subspace state of the histogram's modes.
pub fn mle_reconstruct(hist: &Histogram, povm: &PovmSet, opts: &MleOptions) -> Result<MleResult> {
    let modes = hist.modes().len();
    if modes != povm.modes()
        || hist.bins_per_quadrature() != povm.config().bins_per_quadrature
        || hist.extent() != povm.config().extent
    {
        return Err(Error::DimensionMismatch(format!(
            "histogram grid ({modes} modes, {} bins, L={}) does not match the POVM grid ({} modes, {} bins, L={})",
            hist.bins_per_quadrature(),
            hist.extent(),
            povm.modes(),
            povm.config().bins_per_quadrature,
            povm.config().extent
        )));
    }
    if hist.total() <= 0.0 {
        return Err(Error::EmptyHistogram);
    }
    let elements = ModeElements::new(povm.pauli().to_vec());
    let counts = hist.counts().as_f64();
    let model = SeparableModel::new(vec![elements; modes], &counts)?;
    let (rho, log_likelihood, iterations, converged) = maximize(&model, opts)?;
    let layout = SubsystemLayout::qubits(hist.modes())?;
    let state = DensityMatrix::new(ComplexOperator::new(layout, rho)?)?;
    Ok(MleResult {
        state,
        log_likelihood,
        iterations,
        converged,
    })
}

/// Occupied coherent-state cells as rows of V = V_r + i V_i, so that
/// p = diag(V̄ ρ Vᵀ) and R = Vᵀ diag(h/p) V̄ reduce to real matrix products.
struct CoherentModel<'a> {
    povm: &'a CoherentPovm,
    vr: DMatrix<f64>,
    vi: DMatrix<f64>,
    counts: Vec<f64>,
    total: f64,
}

impl<'a> CoherentModel<'a> {
    fn new(povm: &'a CoherentPovm, dense: &[f64]) -> Self {
        let occupied: Vec<(usize, f64)> = dense.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
        let vectors = povm.vectors();
        let vr = DMatrix::from_fn(occupied.len(), povm.dim(), |r, a| vectors[occupied[r].0][a].re);
        let vi = DMatrix::from_fn(occupied.len(), povm.dim(), |r, a| vectors[occupied[r].0][a].im);
        let counts: Vec<f64> = occupied.iter().map(|(_, c)| *c).collect();
        Self {
            povm,
            vr,
            vi,
            total: counts.iter().sum(),
            counts,
        }
    }
}

impl LikelihoodModel for CoherentModel<'_> {
    fn dim(&self) -> usize {
        self.povm.dim()
    }

    fn total(&self) -> f64 {
        self.total
    }

    fn completeness(&self) -> CMatrix {
        self.povm.completeness().clone()
    }

    fn evaluate(&self, rho: &CMatrix, gradient: bool) -> Evaluation {
        let rr = rho.map(|z| z.re);
        let ri = rho.map(|z| z.im);
        // V̄ρ = (V_r ρ_r + V_i ρ_i) + i (V_r ρ_i − V_i ρ_r)
        let mr = &self.vr * &rr + &self.vi * &ri;
        let mi = &self.vr * &ri - &self.vi * &rr;
        let p = mr.component_mul(&self.vr) - mi.component_mul(&self.vi);
        let mut sum = 0.0;
        let mut weights = Vec::with_capacity(self.counts.len());
        for (j, &h) in self.counts.iter().enumerate() {
            let pj = p.row(j).sum().max(PROBABILITY_FLOOR);
            sum += h * pj.ln();
            weights.push(h / pj);
        }
        let r = gradient.then(|| {
            let mut sr = self.vr.clone();
            let mut si = self.vi.clone();
            for (j, w) in weights.iter().enumerate() {
                sr.row_mut(j).scale_mut(*w);
                si.row_mut(j).scale_mut(*w);
            }
            let re = self.vr.tr_mul(&sr) + self.vi.tr_mul(&si);
            let im = self.vi.tr_mul(&sr) - self.vr.tr_mul(&si);
            CMatrix::from_fn(re.nrows(), re.ncols(), |a, b| C64::new(re[(a, b)], im[(a, b)]))
        });
        let norm = (rho * self.povm.completeness()).trace().re;
        Evaluation {
            log_likelihood: sum - self.total * norm.max(PROBABILITY_FLOOR).ln(),
            normalization: norm,
            r,
        }
    }
}

/// Fock-space noise state from a single-mode H_off histogram.
pub fn reconstruct_noise(hist_off: &Histogram, povm: &CoherentPovm, opts: &MleOptions) -> Result<MleResult> {
    if hist_off.modes().len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "noise reconstruction needs a single-mode histogram, got {} modes",
            hist_off.modes().len()
        )));
    }
    if hist_off.bins_per_quadrature() != povm.config().bins_per_quadrature || hist_off.extent() != povm.config().extent {
        return Err(Error::DimensionMismatch("histogram grid does not match the coherent-state grid".into()));
    }
    let model = CoherentModel::new(povm, &hist_off.counts().as_f64());
    if model.counts.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let (rho, log_likelihood, iterations, converged) = maximize(&model, opts)?;
    let state = DensityMatrix::new(ComplexOperator::new(fock_layout(povm.dim())?, rho)?)?;
    Ok(MleResult {
        state,
        log_likelihood,
        iterations,
        converged,
    })
}

/// True if no entry falls below its predecessor by more than rounding.
pub fn is_non_decreasing(history: &[f64]) -> bool {
    history.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
}
