//! Likelihood model for product measurements on qubit modes.
//!
//! With ρ = Σ_s c_s σ_s and per-mode elements E_j, the cell probability is
//! p_j = Σ_s c_s Π_i a_i[j_i, s_i] where a[j, s] = Tr(E_j σ_s). Occupied
//! cells are visited in row-major order and partial contractions are cached
//! per index prefix, so each cell costs a few multiply-adds.

use super::mle::{Evaluation, LikelihoodModel, PROBABILITY_FLOOR};
use crate::error::{Error, Result};
use crate::qstate::{pauli_assemble, pauli_expand, CMatrix, ComplexOperator, PauliCoefficients, SubsystemLayout};

/// Pauli traces Tr(E_j σ_s) of one mode's measurement elements.
#[derive(Clone, Debug)]
pub(crate) struct ModeElements {
    traces: Vec<[f64; 4]>,
    completeness: [f64; 4],
}

impl ModeElements {
    pub fn new(traces: Vec<[f64; 4]>) -> Self {
        let mut completeness = [0.0; 4];
        for t in &traces {
            for s in 0..4 {
                completeness[s] += t[s];
            }
        }
        Self { traces, completeness }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SeparableModel {
    layout: SubsystemLayout,
    modes: Vec<ModeElements>,
    /// Occupied cells in row-major order, grouped into runs that share all
    /// but the last mode index: N − 1 prefix indices per run and the cell
    /// range of each run.
    prefixes: Vec<u32>,
    runs: Vec<(usize, usize)>,
    last: Vec<u32>,
    counts: Vec<f64>,
    total: f64,
}

/// out[pre, r, post] = Σ_k m[r * cols + k] t[pre, k, post]
fn mode_product(t: &[f64], pre: usize, cols: usize, post: usize, m: &[f64], rows: usize) -> Vec<f64> {
    let mut out = vec![0.0; pre * rows * post];
    for a in 0..pre {
        let src = &t[a * cols * post..(a + 1) * cols * post];
        let dst = &mut out[a * rows * post..(a + 1) * rows * post];
        for r in 0..rows {
            let d = &mut dst[r * post..(r + 1) * post];
            for k in 0..cols {
                let w = m[r * cols + k];
                for (o, s) in d.iter_mut().zip(&src[k * post..(k + 1) * post]) {
                    *o += w * s;
                }
            }
        }
    }
    out
}

/// Cell probabilities for every combination of the modes' elements.
pub(crate) fn forward(modes: &[ModeElements], c: &[f64]) -> Vec<f64> {
    let mut t = c.to_vec();
    let mut pre = 1;
    let n = modes.len();
    for (k, mode) in modes.iter().enumerate() {
        let post = 1usize << (2 * (n - k - 1));
        let m: Vec<f64> = mode.traces.iter().flat_map(|a| a.iter().copied()).collect();
        t = mode_product(&t, pre, 4, post, &m, mode.len());
        pre *= mode.len();
    }
    t
}

/// out[t] = Σ_s a[s] v[s * len + t] with len = out.len().
fn contract_leading(a: &[f64; 4], v: &[f64], out: &mut [f64]) {
    let len = out.len();
    for (t, o) in out.iter_mut().enumerate() {
        *o = a[0] * v[t] + a[1] * v[len + t] + a[2] * v[2 * len + t] + a[3] * v[3 * len + t];
    }
}

/// acc[s * len + t] += a[s] v[t] with len = v.len().
fn expand_leading(a: &[f64; 4], v: &[f64], acc: &mut [f64]) {
    let len = v.len();
    for s in 0..4 {
        for (o, x) in acc[s * len..(s + 1) * len].iter_mut().zip(v) {
            *o += a[s] * x;
        }
    }
}

impl SeparableModel {
    /// `counts` is dense in row-major order over the modes' element indices.
    pub fn new(modes: Vec<ModeElements>, counts: &[f64]) -> Result<Self> {
        let n = modes.len();
        let cells: usize = modes.iter().map(|m| m.len()).product();
        if counts.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for {} cells",
                counts.len(),
                cells
            )));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("model needs at least one mode".into()));
        }
        let labels: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let layout = SubsystemLayout::qubits(&labels)?;
        let m_last = modes[n - 1].len();
        let mut prefixes = Vec::new();
        let mut runs = Vec::new();
        let mut last = Vec::new();
        let mut kept = Vec::new();
        for (block, chunk) in counts.chunks(m_last).enumerate() {
            let start = kept.len();
            for (j, &c) in chunk.iter().enumerate() {
                if c != 0.0 {
                    last.push(j as u32);
                    kept.push(c);
                }
            }
            if kept.len() == start {
                continue;
            }
            let mut rem = block;
            let at = prefixes.len();
            prefixes.resize(at + n - 1, 0);
            for i in (0..n - 1).rev() {
                let m = modes[i].len();
                prefixes[at + i] = (rem % m) as u32;
                rem /= m;
            }
            runs.push((start, kept.len()));
        }
        Ok(Self {
            layout,
            modes,
            prefixes,
            runs,
            last,
            total: kept.iter().sum(),
            counts: kept,
        })
    }

    fn coefficients(&self, rho: &CMatrix) -> Vec<f64> {
        let op = ComplexOperator::new(self.layout.clone(), rho.clone()).expect("model dimension");
        pauli_expand(&op).expect("iterates are Hermitian qubit operators").coeffs().to_vec()
    }

    /// Σ_s x_s σ_s / 2^N from Pauli traces x_s = Tr(X σ_s).
    fn assemble(&self, traces: Vec<f64>) -> CMatrix {
        let scale = 1.0 / (1usize << self.modes.len()) as f64;
        let coeffs = traces.into_iter().map(|x| x * scale).collect();
        let pc = PauliCoefficients::new(self.layout.clone(), coeffs).expect("coefficient count");
        pauli_assemble(&pc).into_matrix()
    }

    fn normalization(&self, c: &[f64]) -> f64 {
        let mut v = c.to_vec();
        for mode in &self.modes {
            let mut out = vec![0.0; v.len() / 4];
            contract_leading(&mode.completeness, &v, &mut out);
            v = out;
        }
        v[0]
    }

    /// Σ_j h_j ln p_j and, if requested, the Pauli traces of Σ_j (h_j/p_j) E_j.
    fn pass(&self, c: &[f64], gradient: bool) -> (f64, Option<Vec<f64>>) {
        let n = self.modes.len();
        let len = |level: usize| 1usize << (2 * (n - level));
        // fwd[k]: c contracted with the first k modes of the current prefix.
        let mut fwd: Vec<Vec<f64>> = (0..n).map(|k| vec![0.0; len(k)]).collect();
        fwd[0].copy_from_slice(c);
        // acc[k]: sum over cells sharing the current length-k prefix of
        // w Π_{l ≥ k} a_l, laid out over the trailing modes.
        let mut acc: Vec<Vec<f64>> = if gradient {
            (0..n).map(|k| vec![0.0; len(k)]).collect()
        } else {
            Vec::new()
        };
        let last_traces = &self.modes[n - 1].traces;
        let mut sum = 0.0;
        let mut prev: Option<&[u32]> = None;
        for (r, &(start, end)) in self.runs.iter().enumerate() {
            let prefix = &self.prefixes[r * (n - 1)..(r + 1) * (n - 1)];
            let first = match prev {
                None => 0,
                Some(p) => p.iter().zip(prefix).position(|(a, b)| a != b).unwrap_or(n - 1),
            };
            if let (true, Some(p)) = (gradient, prev) {
                self.flush(&mut acc, p, first);
            }
            for k in first..n - 1 {
                let (lo, hi) = fwd.split_at_mut(k + 1);
                contract_leading(&self.modes[k].traces[prefix[k] as usize], &lo[k], &mut hi[0]);
            }
            let v = &fwd[n - 1];
            let (v0, v1, v2, v3) = (v[0], v[1], v[2], v[3]);
            let mut u = [0.0; 4];
            for (&j, &h) in self.last[start..end].iter().zip(&self.counts[start..end]) {
                let a = &last_traces[j as usize];
                let q = (a[0] * v0 + a[1] * v1 + a[2] * v2 + a[3] * v3).max(PROBABILITY_FLOOR);
                sum += h * q.ln();
                if gradient {
                    let w = h / q;
                    u[0] += w * a[0];
                    u[1] += w * a[1];
                    u[2] += w * a[2];
                    u[3] += w * a[3];
                }
            }
            if gradient {
                for (o, x) in acc[n - 1].iter_mut().zip(u) {
                    *o += x;
                }
            }
            prev = Some(prefix);
        }
        if !gradient {
            return (sum, None);
        }
        if let Some(p) = prev {
            self.flush(&mut acc, p, 0);
        }
        (sum, Some(std::mem::take(&mut acc[0])))
    }

    /// Fold accumulators deeper than `keep` into their parents.
    fn flush(&self, acc: &mut [Vec<f64>], prefix: &[u32], keep: usize) {
        let n = self.modes.len();
        for k in (keep + 1..n).rev() {
            let (lo, hi) = acc.split_at_mut(k);
            expand_leading(&self.modes[k - 1].traces[prefix[k - 1] as usize], &hi[0], &mut lo[k - 1]);
            hi[0].iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

impl LikelihoodModel for SeparableModel {
    fn dim(&self) -> usize {
        1 << self.modes.len()
    }

    fn total(&self) -> f64 {
        self.total
    }

    fn completeness(&self) -> CMatrix {
        let n = self.modes.len();
        let traces = (0..1usize << (2 * n))
            .map(|s| {
                (0..n)
                    .map(|i| self.modes[i].completeness[(s >> (2 * (n - 1 - i))) & 3])
                    .product()
            })
            .collect();
        self.assemble(traces)
    }

    fn evaluate(&self, rho: &CMatrix, gradient: bool) -> Evaluation {
        let c = self.coefficients(rho);
        let norm = self.normalization(&c);
        let (sum, r) = self.pass(&c, gradient);
        Evaluation {
            log_likelihood: sum - self.total * norm.max(PROBABILITY_FLOOR).ln(),
            normalization: norm,
            r: r.map(|t| self.assemble(t)),
        }
    }
}
