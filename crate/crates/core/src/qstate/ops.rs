use super::{ComplexOperator, DensityMatrix, Split, SubsystemLayout, C64};
use crate::error::{Error, Result};

pub fn kron(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    ComplexOperator {
        layout: a.layout().concat(b.layout()),
        mat: a.matrix().kronecker(b.matrix()),
    }
}

/// Reduced state on the kept subsystems (kept in layout order).
pub fn ptrace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidLayout("keep set must be nonempty".into()));
    }
    let layout = rho.layout();
    let mut idx = layout.indices_of(keep)?;
    idx.sort_unstable();
    idx.dedup();
    let split = Split::new(layout.dims(), &idx);
    let mat = split.trace_rest(rho.matrix());
    let out = ComplexOperator::new(layout.select(&idx), mat)?;
    Ok(DensityMatrix::from_trusted(out))
}

/// Partial transpose on the listed subsystems.
pub fn ptranspose<S: AsRef<str>>(rho: &DensityMatrix, part: &[S]) -> Result<ComplexOperator> {
    let layout = rho.layout();
    let idx = layout.indices_of(part)?;
    let split = Split::new(layout.dims(), &idx);
    ComplexOperator::new(layout.clone(), split.transpose_targets(rho.matrix()))
}

/// Project one subsystem onto `ket` and renormalize the remainder.
///
/// Returns the post-measurement state on the other subsystems together with
/// the outcome probability.
pub fn project_subsystem(
    rho: &DensityMatrix,
    label: &str,
    ket: &[C64],
) -> Result<(DensityMatrix, f64)> {
    let layout = rho.layout();
    let pos = layout.index_of(label)?;
    let local = layout.dims()[pos];
    if ket.len() != local {
        return Err(Error::DimensionMismatch(format!(
            "ket of length {} for subsystem `{label}` of dimension {local}",
            ket.len()
        )));
    }
    let norm: f64 = ket.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("projection ket has norm² {norm}")));
    }
    if layout.len() < 2 {
        return Err(Error::InvalidLayout(
            "cannot project the only subsystem of a layout".into(),
        ));
    }
    let split = Split::new(layout.dims(), &[pos]);
    let mat = split.sandwich(ket, rho.matrix());
    let p = mat.trace().re;
    if p < 1e-12 {
        return Err(Error::ImpossibleOutcome(p));
    }
    let rest: Vec<usize> = (0..layout.len()).filter(|&i| i != pos).collect();
    let rest_layout: SubsystemLayout = layout.select(&rest);
    let out = ComplexOperator::new(rest_layout, super::hermitian_part(&mat.unscale(p)))?;
    Ok((DensityMatrix::from_trusted(out), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::testutil::*;
    use crate::qstate::{trace_distance, CMatrix, ONE, ZERO};

    fn q(labels: &[&str]) -> SubsystemLayout {
        SubsystemLayout::qubits(labels).unwrap()
    }

    fn pauli_x() -> ComplexOperator {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        ComplexOperator::new(q(&["a"]), m).unwrap()
    }

    fn pauli_z() -> ComplexOperator {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        ComplexOperator::new(q(&["b"]), m).unwrap()
    }

    fn w_ket(n: usize) -> Vec<C64> {
        let d = 1 << n;
        let mut v = vec![ZERO; d];
        for i in 0..n {
            v[1 << (n - 1 - i)] = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        }
        v
    }

    #[test]
    fn kron_identities_and_projectors() {
        let i2 = ComplexOperator::identity(q(&["a"]));
        let i2b = ComplexOperator::identity(q(&["b"]));
        assert_eq!(kron(&i2, &i2b).matrix(), &CMatrix::identity(4, 4));

        let p0 = DensityMatrix::basis(q(&["a"]), 0).unwrap();
        let p1 = DensityMatrix::basis(q(&["b"]), 1).unwrap();
        let k = kron(p0.op(), p1.op());
        let expect = DensityMatrix::basis(q(&["a", "b"]), 1).unwrap();
        assert_eq!(k.matrix(), expect.matrix());
        assert_eq!(k.layout().labels(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn kron_x_z_maps_00_to_10() {
        // (X ⊗ Z)|00⟩ = |1⟩ ⊗ (+|0⟩)
        let k = kron(&pauli_x(), &pauli_z());
        let col = k.matrix().column(0);
        assert_eq!(col[2], ONE);
        for (i, c) in col.iter().enumerate() {
            if i != 2 {
                assert_eq!(*c, ZERO);
            }
        }
    }

    #[test]
    fn ptrace_of_bell_is_maximally_mixed() {
        let s = C64::new(0.5f64.sqrt(), 0.0);
        let bell = DensityMatrix::pure(q(&["a", "b"]), &[s, ZERO, ZERO, s]).unwrap();
        let red = ptrace(&bell, &["a"]).unwrap();
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!((red.matrix() - half).norm() < 1e-15);
        assert!(matches!(ptrace(&bell, &["zz"]), Err(Error::UnknownLabel(l)) if l == "zz"));
    }

    #[test]
    fn ptrace_of_w4_pair() {
        // Brute force: sum over the traced indices directly on the 16x16 matrix.
        let w4 = DensityMatrix::pure(SubsystemLayout::photons(4).unwrap(), &w_ket(4)).unwrap();
        let m = w4.matrix();
        let mut brute = CMatrix::zeros(4, 4);
        for a in 0..4usize {
            for b in 0..4usize {
                for r in 0..4usize {
                    // kept qubits 1,2 are the two most significant bits
                    brute[(a, b)] += m[((a << 2) | r, (b << 2) | r)];
                }
            }
        }
        let red = ptrace(&w4, &["P1", "P2"]).unwrap();
        assert!((red.matrix() - &brute).norm() < 1e-14);
        // 0.5|W2⟩⟨W2| + 0.5|00⟩⟨00|
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = C64::new(0.5, 0.0);
        for &(i, j) in &[(1, 1), (1, 2), (2, 1), (2, 2)] {
            expect[(i, j)] = C64::new(0.25, 0.0);
        }
        assert!((red.matrix() - expect).norm() < 1e-14);
    }

    #[test]
    fn ptrace_keeps_product_factor() {
        let mut r = rng(3);
        for _ in 0..20 {
            let a = random_density(&mut r, q(&["A"]), 2);
            let b = random_density(&mut r, SubsystemLayout::new(vec![3], vec!["B"]).unwrap(), 3);
            let ab = DensityMatrix::new(kron(a.op(), b.op())).unwrap();
            let back = ptrace(&ab, &["A"]).unwrap();
            assert!((back.matrix() - a.matrix()).norm() < 1e-12);
            let back_b = ptrace(&ab, &["B"]).unwrap();
            assert!((back_b.matrix() - b.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn ptranspose_bell_spectrum() {
        let s = C64::new(0.5f64.sqrt(), 0.0);
        let bell = DensityMatrix::pure(q(&["a", "b"]), &[s, ZERO, ZERO, s]).unwrap();
        let pt = ptranspose(&bell, &["b"]).unwrap();
        let (ev, _) = crate::qstate::eigh(&pt).unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let mixed = DensityMatrix::maximally_mixed(q(&["a", "b"]));
        let pt = ptranspose(&mixed, &["a"]).unwrap();
        assert_eq!(pt.matrix(), mixed.matrix());
    }

    #[test]
    fn projections() {
        let s = C64::new(0.5f64.sqrt(), 0.0);
        let bell = DensityMatrix::pure(q(&["a", "b"]), &[s, ZERO, ZERO, s]).unwrap();
        let (post, p) = project_subsystem(&bell, "a", &[s, s]).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
        let plus = DensityMatrix::pure(q(&["b"]), &[s, s]).unwrap();
        assert!(trace_distance(post.matrix(), plus.matrix()) < 1e-14);

        let zz = DensityMatrix::basis(q(&["a", "b"]), 0).unwrap();
        let (post, p) = project_subsystem(&zz, "b", &[ONE, ZERO]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!((post.population(0) - 1.0).abs() < 1e-15);
        assert!(matches!(
            project_subsystem(&zz, "b", &[ZERO, ONE]),
            Err(Error::ImpossibleOutcome(_))
        ));

        let w3 = DensityMatrix::pure(SubsystemLayout::photons(3).unwrap(), &w_ket(3)).unwrap();
        let (post, p) = project_subsystem(&w3, "P2", &[ONE, ZERO]).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-14);
        let w2 = DensityMatrix::pure(q(&["P1", "P3"]), &w_ket(2)).unwrap();
        assert!(trace_distance(post.matrix(), w2.matrix()) < 1e-14);
        assert_eq!(post.layout().labels(), w2.layout().labels());
    }
}
