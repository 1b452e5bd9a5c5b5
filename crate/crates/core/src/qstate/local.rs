use super::{CMatrix, C64, ZERO};

/// Index bookkeeping for an operator acting on a subset of tensor factors.
///
/// A full basis index is split into a composite index over the target
/// factors (in the order given) and a composite index over the remaining
/// factors (in layout order).
#[derive(Clone, Debug)]
pub struct Split {
    tdim: usize,
    rdim: usize,
    /// full index -> (target, rest)
    parts: Vec<(usize, usize)>,
    /// target * rdim + rest -> full index
    join: Vec<usize>,
}

impl Split {
    pub fn new(dims: &[usize], targets: &[usize]) -> Self {
        let n = dims.len();
        let full: usize = dims.iter().product();
        let rest: Vec<usize> = (0..n).filter(|i| !targets.contains(i)).collect();
        let tdim: usize = targets.iter().map(|&t| dims[t]).product();
        let rdim: usize = rest.iter().map(|&r| dims[r]).product();
        let mut parts = Vec::with_capacity(full);
        let mut join = vec![0usize; full];
        let mut digits = vec![0usize; n];
        for idx in 0..full {
            let mut rem = idx;
            for k in (0..n).rev() {
                digits[k] = rem % dims[k];
                rem /= dims[k];
            }
            let t = targets.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
            let r = rest.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
            parts.push((t, r));
            join[t * rdim + r] = idx;
        }
        Self {
            tdim,
            rdim,
            parts,
            join,
        }
    }

    pub fn target_dim(&self) -> usize {
        self.tdim
    }

    pub fn rest_dim(&self) -> usize {
        self.rdim
    }

    #[inline]
    pub fn parts(&self, full: usize) -> (usize, usize) {
        self.parts[full]
    }

    #[inline]
    pub fn join(&self, target: usize, rest: usize) -> usize {
        self.join[target * self.rdim + rest]
    }

    /// (U ⊗ 1) M (U ⊗ 1)† with U acting on the targets.
    pub fn conjugate(&self, u: &CMatrix, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        let t = self.tdim;
        // left: L = U_T M
        let mut left = CMatrix::zeros(d, d);
        for i in 0..d {
            let (ti, ri) = self.parts[i];
            for tp in 0..t {
                let coef = u[(ti, tp)];
                if coef == ZERO {
                    continue;
                }
                let src = self.join(tp, ri);
                for c in 0..d {
                    left[(i, c)] += coef * m[(src, c)];
                }
            }
        }
        // right: L U_T†
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            let (tj, rj) = self.parts[j];
            for tp in 0..t {
                let coef = u[(tj, tp)].conj();
                if coef == ZERO {
                    continue;
                }
                let src = self.join(tp, rj);
                for r in 0..d {
                    out[(r, j)] += left[(r, src)] * coef;
                }
            }
        }
        out
    }

    /// Apply a superoperator on the targets. `s` acts on row-major vectorized
    /// target matrices: index (a, b) -> a * tdim + b.
    pub fn apply_superop(&self, s: &CMatrix, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        let t = self.tdim;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            let (ti, ri) = self.parts[i];
            for j in 0..d {
                let (tj, rj) = self.parts[j];
                let row = ti * t + tj;
                let mut acc = ZERO;
                for a in 0..t {
                    let ia = self.join(a, ri);
                    for b in 0..t {
                        let coef = s[(row, a * t + b)];
                        if coef != ZERO {
                            acc += coef * m[(ia, self.join(b, rj))];
                        }
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Trace over the non-target factors; result indexed by target composite.
    pub fn trace_rest(&self, m: &CMatrix) -> CMatrix {
        let t = self.tdim;
        CMatrix::from_fn(t, t, |a, b| {
            (0..self.rdim)
                .map(|r| m[(self.join(a, r), self.join(b, r))])
                .sum::<C64>()
        })
    }

    /// ⟨k| ⊗ 1 · M · |k⟩ ⊗ 1 on the targets; result indexed by rest composite.
    pub fn sandwich(&self, ket: &[C64], m: &CMatrix) -> CMatrix {
        let r = self.rdim;
        CMatrix::from_fn(r, r, |r1, r2| {
            let mut acc = ZERO;
            for (a, ka) in ket.iter().enumerate() {
                if *ka == ZERO {
                    continue;
                }
                for (b, kb) in ket.iter().enumerate() {
                    if *kb == ZERO {
                        continue;
                    }
                    acc += ka.conj() * kb * m[(self.join(a, r1), self.join(b, r2))];
                }
            }
            acc
        })
    }

    /// Transpose the target indices between row and column.
    pub fn transpose_targets(&self, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        CMatrix::from_fn(d, d, |i, j| {
            let (ti, ri) = self.parts[i];
            let (tj, rj) = self.parts[j];
            m[(self.join(tj, ri), self.join(ti, rj))]
        })
    }
}
