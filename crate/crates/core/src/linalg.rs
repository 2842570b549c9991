//! Dense complex helpers: Kronecker products, elementwise norms, a cyclic
//! Jacobi eigensolver for Hermitian matrices and leading principal minors.

use crate::error::{Error, Result};
use crate::{CMatrix, Complex64};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `x ⊗ x ⊗ ⋯ ⊗ x` with `n` factors.
pub fn kron_power(x: &CMatrix, n: usize) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for _ in 0..n {
        acc = acc.kronecker(x);
    }
    acc
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |M - M†|` over entries.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
    pub sweeps: usize,
}

impl HermitianEigen {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= lam;
            }
        }
        scaled * v.adjoint()
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
///
/// Rejects input whose Hermiticity defect exceeds `1e-10 · max(1, max|H|)`.
/// Each rotation first rotates the phase of `h_pq` away and then applies
/// the real symmetric 2×2 Jacobi rotation, so the iteration is the classic
/// real algorithm on a unitarily rephased matrix. Sweeps stop once the
/// off-diagonal Frobenius norm is below `1e-15 · ‖H‖_F`.
pub fn hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::dim(format!(
            "eigensolver needs a square matrix, got {:?}",
            h.shape()
        )));
    }
    let scale = max_abs(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > 1e-10 * scale {
        return Err(Error::invalid(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let n = h.nrows();
    // symmetrize the input so rounding noise in the lower triangle is ignored
    let mut a = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(h[(i, i)].re, 0.0)
        } else {
            0.5 * (h[(i, j)] + h[(j, i)].conj())
        }
    });
    let mut v = CMatrix::identity(n, n);
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-15 * frob.max(f64::MIN_POSITIVE);

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if off_diagonal_norm(&a) > 1e-12 * frob.max(1.0) {
        return Err(Error::Consistency(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_spectrum(h: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(h).map(|e| e.eigenvalues)
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let h = a[(p, q)];
    let c = h.norm();
    if c == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip entries already negligible against both diagonal entries
    if c < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = h / c; // e^{iφ}
    let theta = (aqq - app) / (2.0 * c);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    // J = diag(1, e^{-iφ}) · [[cs, sn], [-sn, cs]] on the (p, q) plane
    let jpp = Complex64::new(cs, 0.0);
    let jpq = Complex64::new(sn, 0.0);
    let jqp = -sn * phase.conj();
    let jqq = cs * phase.conj();

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(m: &CMatrix) -> Complex64 {
    assert!(m.is_square());
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap_or(col);
        if a[(pivot, col)].norm() == 0.0 {
            return ZERO;
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        let d = a[(col, col)];
        det *= d;
        for r in (col + 1)..n {
            let f = a[(r, col)] / d;
            if f != ZERO {
                for c in col..n {
                    let sub = f * a[(col, c)];
                    a[(r, c)] -= sub;
                }
            }
        }
    }
    det
}

/// Real parts of the `k × k` leading principal minors, `k = 1..=n`
/// (for Hermitian input these minors are real).
pub fn leading_principal_minors(m: &CMatrix) -> Vec<f64> {
    (1..=m.nrows())
        .map(|k| determinant(&m.view((0, 0), (k, k)).into_owned()).re)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut s = Stream::new(seed);
        let g = CMatrix::from_fn(n, n, |_, _| s.complex_gaussian());
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    }

    #[test]
    fn diagonal_and_identity() {
        let id = CMatrix::identity(4, 4);
        let e = hermitian_eigen(&id).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1e-3, 0.0),
        ]));
        let e = hermitian_eigen(&d).unwrap();
        assert_eq!(e.eigenvalues, vec![-1e-3, 1.0]);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = CMatrix::from_row_slice(2, 2, &[ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO]);
        let e = hermitian_eigen(&y).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert!(max_abs_diff(&e.reconstruct(), &y) < 1e-15);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for (n, seed) in [(3, 1), (8, 2), (27, 3), (64, 4)] {
            let h = random_hermitian(n, seed);
            let e = hermitian_eigen(&h).unwrap();
            let scale = max_abs(&h);
            assert!(max_abs_diff(&e.reconstruct(), &h) <= 1e-12 * scale.max(1.0) * n as f64);
            let vv = e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!(max_abs_diff(&vv, &CMatrix::identity(n, n)) < 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let tr: f64 = e.eigenvalues.iter().sum();
            assert!((tr - trace(&h).re).abs() < 1e-11 * n as f64);
        }
    }

    #[test]
    fn agrees_with_nalgebra_on_real_symmetric() {
        let mut s = Stream::new(9);
        let g = nalgebra::DMatrix::<f64>::from_fn(10, 10, |_, _| s.gaussian());
        let sym = &g + g.transpose();
        let mut reference: Vec<f64> = nalgebra::SymmetricEigen::new(sym.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        reference.sort_by(f64::total_cmp);
        let ours = hermitian_spectrum(&sym.map(|x| Complex64::new(x, 0.0))).unwrap();
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(hermitian_eigen(&m), Err(Error::Invalid(_))));
        assert!(matches!(
            hermitian_eigen(&CMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn kron_power_dims() {
        let x = CMatrix::identity(2, 2);
        assert_eq!(kron_power(&x, 3).shape(), (8, 8));
        assert_eq!(kron_power(&x, 0).shape(), (1, 1));
    }

    #[test]
    fn minors_of_diagonal() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        assert_eq!(leading_principal_minors(&d), vec![2.0, 6.0, -6.0]);
    }
}
