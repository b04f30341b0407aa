use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};

/// Generalized Gell-Mann matrices plus the identity: a Hilbert-Schmidt
/// orthogonal basis of the d² real-dimensional space of d×d Hermitian
/// matrices.
///
/// Ordering: the d(d−1)/2 symmetric matrices |j⟩⟨k|+|k⟩⟨j|, then the
/// antisymmetric i(|k⟩⟨j|−|j⟩⟨k|) (both over j<k, lexicographic), then the
/// d−1 diagonal ones, then the identity last.
#[derive(Clone, Debug)]
pub struct GellMannBasis {
    d: usize,
    matrices: Vec<ComplexMatrix>,
}

impl GellMannBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::OutOfRange(format!(
                "Gell-Mann basis needs d >= 2, got {d}"
            )));
        }
        let mut matrices = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in (j + 1)..d {
                let mut m = ComplexMatrix::zeros(d, d);
                m[(j, k)] = C64::new(1.0, 0.0);
                m[(k, j)] = C64::new(1.0, 0.0);
                matrices.push(m);
            }
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let mut m = ComplexMatrix::zeros(d, d);
                m[(j, k)] = C64::new(0.0, -1.0);
                m[(k, j)] = C64::new(0.0, 1.0);
                matrices.push(m);
            }
        }
        for l in 1..d {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut diag = vec![0.0; d];
            for x in diag.iter_mut().take(l) {
                *x = norm;
            }
            diag[l] = -(l as f64) * norm;
            matrices.push(ComplexMatrix::from_diag(&diag));
        }
        matrices.push(ComplexMatrix::identity(d));
        Ok(Self { d, matrices })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    /// Σ a_i Λ_i
    pub fn combine(&self, coeffs: &[f64]) -> Result<ComplexMatrix> {
        if coeffs.len() != self.matrices.len() {
            return Err(Error::LengthMismatch {
                expected: self.matrices.len(),
                got: coeffs.len(),
            });
        }
        let mut h = ComplexMatrix::zeros(self.d, self.d);
        for (a, m) in coeffs.iter().zip(&self.matrices) {
            if *a != 0.0 {
                h = &h + &m.scale_re(*a);
            }
        }
        Ok(h)
    }

    /// Coordinates of a Hermitian matrix: a_i = Tr(Λ_i h) / Tr(Λ_i²).
    pub fn coefficients(&self, h: &ComplexMatrix) -> Vec<f64> {
        self.matrices
            .iter()
            .map(|m| m.trace_product(h).re / m.hs_norm_sq())
            .collect()
    }
}

/// exp(i Σ a_i Λ_i)
pub fn unitary_from_params(coeffs: &[f64], basis: &GellMannBasis) -> Result<ComplexMatrix> {
    linalg::unitary_from_hermitian(&basis.combine(coeffs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng64;

    fn gram_rank(basis: &GellMannBasis) -> usize {
        // real inner products ⟨Λ_a, Λ_b⟩ = Tr(Λ_a Λ_b); rank via its eigenvalues
        let n = basis.len();
        let mut g = ComplexMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                g[(a, b)] = C64::new(
                    basis.matrices()[a].trace_product(&basis.matrices()[b]).re,
                    0.0,
                );
            }
        }
        linalg::rank_with_tol(&linalg::eigvalsh(&g).unwrap(), 1e-9)
    }

    #[test]
    fn qubit_basis_is_pauli_plus_identity() {
        let b = GellMannBasis::new(2).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.matrices()[0], linalg::pauli_x());
        assert_eq!(b.matrices()[1], linalg::pauli_y());
        assert_eq!(b.matrices()[2], linalg::pauli_z());
        assert_eq!(b.matrices()[3], ComplexMatrix::identity(2));
    }

    #[test]
    fn qutrit_basis_is_orthogonal() {
        let b = GellMannBasis::new(3).unwrap();
        assert_eq!(b.len(), 9);
        for (i, x) in b.matrices().iter().enumerate() {
            assert!(x.is_hermitian(1e-12));
            for (j, y) in b.matrices().iter().enumerate() {
                if i != j {
                    assert!(x.trace_product(y).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn ququart_basis_spans() {
        let b = GellMannBasis::new(4).unwrap();
        assert_eq!(b.len(), 16);
        assert_eq!(gram_rank(&b), 16);
        assert!(GellMannBasis::new(1).is_err());
    }

    #[test]
    fn coefficients_round_trip() {
        let b = GellMannBasis::new(4).unwrap();
        let mut rng = Rng64::new(3, 0);
        let a: Vec<f64> = (0..16).map(|_| rng.gaussian()).collect();
        let h = b.combine(&a).unwrap();
        let back = b.coefficients(&h);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_from_params_examples() {
        let b = GellMannBasis::new(4).unwrap();
        let u = unitary_from_params(&[0.0; 16], &b).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        assert!(matches!(
            unitary_from_params(&[0.0; 15], &b),
            Err(Error::LengthMismatch { .. })
        ));

        let mut rng = Rng64::new(9, 0);
        for _ in 0..50 {
            let a: Vec<f64> = (0..16).map(|_| rng.gaussian()).collect();
            let u = unitary_from_params(&a, &b).unwrap();
            assert!((&u.dagger() * &u).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-10);
        }

        // identity generator alone is a global phase
        let mut a = vec![0.0; 16];
        a[15] = 0.7;
        let u = unitary_from_params(&a, &b).unwrap();
        let phase = C64::new(0.0, 0.7).exp();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4).scale(phase)) < 1e-14);
    }
}
