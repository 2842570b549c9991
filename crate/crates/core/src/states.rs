//! Pure states, product states, Dicke states and density matrices on
//! `(C^d)^{⊗n}`.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{self, dense_dim, hilbert_dim, Composition};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::Stream;
use crate::{CMatrix, CVector, Complex64};

/// Normalization tolerance for physical states and factor rows.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_FLOOR: f64 = -1e-9;

/// Big-endian basis index of a tuple: the first symbol is most significant.
pub fn basis_index(tuple: &[usize], d: usize) -> Result<usize> {
    let mut idx: usize = 0;
    for &j in tuple {
        if j >= d {
            return Err(Error::invalid(format!("symbol {j} out of range for d = {d}")));
        }
        idx = idx
            .checked_mul(d)
            .and_then(|x| x.checked_add(j))
            .ok_or_else(|| Error::size("basis index overflows"))?;
    }
    Ok(idx)
}

/// Inverse of [`basis_index`] for `n` symbols.
pub fn basis_tuple(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut t = vec![0; n];
    for slot in t.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    t
}

/// Vector in `(C^d)^{⊗n}`; unit norm unless built as an intermediate.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    d: usize,
    n: usize,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector, d: usize, n: usize) -> Result<Self> {
        let dim = hilbert_dim(d, n)?;
        if amplitudes.len() != dim {
            return Err(Error::dim(format!(
                "{} amplitudes for d = {d}, n = {n} (need {dim})",
                amplitudes.len()
            )));
        }
        Ok(Self { d, n, amplitudes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, m: &CMatrix) -> Complex64 {
        self.amplitudes.dotc(&(m * &self.amplitudes))
    }
}

/// Equal-weight superposition over the orbit of `k`.
pub fn dicke_state(k: &Composition) -> Result<PureState> {
    let (d, n) = (k.d(), k.n());
    let dim = hilbert_dim(d, n)?;
    let orbit = combinatorics::multiset_orbit(k)?;
    let amp = Complex64::new(1.0 / (orbit.len() as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(dim);
    for t in &orbit {
        v[basis_index(t, d)?] = amp;
    }
    PureState::new(v, d, n)
}

/// Factor coefficients of a product state: row `m` holds `|ψ_m⟩` in the
/// computational basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::MatrixFile", into = "crate::io::MatrixFile")]
pub struct FMatrix {
    entries: CMatrix,
}

impl FMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::dim("F-matrix needs at least one row and one column"));
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::dim("ragged F-matrix rows"));
        }
        Self::new(CMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, m: usize, j: usize) -> Complex64 {
        self.entries[(m, j)]
    }

    pub fn row(&self, m: usize) -> CVector {
        self.entries.row(m).transpose()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.n()).map(|m| self.entries.row(m).norm()).collect()
    }

    pub fn max_row_norm(&self) -> f64 {
        self.row_norms().into_iter().fold(0.0, f64::max)
    }

    /// Fails on the first row whose norm is off by more than [`NORM_TOL`].
    pub fn check_unit_rows(&self) -> Result<()> {
        for (m, r) in self.row_norms().into_iter().enumerate() {
            if (r - 1.0).abs() > NORM_TOL {
                return Err(Error::invalid(format!(
                    "row {m} of the F-matrix has norm {r}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// `G[a][b] = ⟨ψ_a|ψ_b⟩`.
    pub fn gram(&self) -> CMatrix {
        self.entries.conjugate() * self.entries.transpose()
    }

    /// Rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n() {
            return Err(Error::dim("row order has the wrong length"));
        }
        Self::new(CMatrix::from_fn(self.n(), self.d(), |i, j| self.entries[(order[i], j)]))
    }

    /// Applies the same single-site operator `x` to every factor.
    pub fn apply_local(&self, x: &CMatrix) -> Result<Self> {
        if x.shape() != (self.d(), self.d()) {
            return Err(Error::dim(format!(
                "local operator is {:?}, need {d}x{d}",
                x.shape(),
                d = self.d()
            )));
        }
        Self::new(&self.entries * x.transpose())
    }
}

/// How [`product_state`] treats factor rows that are not unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Reject non-unit rows.
    #[default]
    Strict,
    /// Accept any rows, logging a warning.
    Lax,
}

/// `|ψ_1⟩ ⊗ ⋯ ⊗ |ψ_n⟩`.
pub fn product_state(f: &FMatrix, mode: Normalization) -> Result<PureState> {
    if let Err(e) = f.check_unit_rows() {
        match mode {
            Normalization::Strict => return Err(e),
            Normalization::Lax => log::warn!("building product state from non-normalized rows: {e}"),
        }
    }
    let (n, d) = (f.n(), f.d());
    let dim = hilbert_dim(d, n)?;
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for m in 0..n {
        let mut next = Vec::with_capacity(amps.len() * d);
        for a in &amps {
            for j in 0..d {
                next.push(a * f.get(m, j));
            }
        }
        amps = next;
    }
    debug_assert_eq!(amps.len(), dim);
    PureState::new(CVector::from_vec(amps), d, n)
}

/// Hermitian, unit-trace, positive semidefinite matrix on `(C^d)^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    d: usize,
    n: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix, d: usize, n: usize) -> Result<Self> {
        let rho = Self::from_parts(matrix, d, n)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape check only; callers guarantee the remaining invariants.
    pub(crate) fn from_parts(matrix: CMatrix, d: usize, n: usize) -> Result<Self> {
        let dim = dense_dim(d, n)?;
        if matrix.shape() != (dim, dim) {
            return Err(Error::dim(format!(
                "{:?} matrix for d = {d}, n = {n} (need {dim}x{dim})",
                matrix.shape()
            )));
        }
        Ok(Self { d, n, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        let defect = linalg::hermiticity_defect(&self.matrix);
        if defect > DENSITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix not Hermitian (max |ρ - ρ†| = {defect:e})"
            )));
        }
        let tr = linalg::trace(&self.matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = linalg::hermitian_eigen(&self.matrix)?.min_eigenvalue();
        if min < PSD_FLOOR {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, o: &CMatrix) -> Complex64 {
        linalg::trace_of_product(o, &self.matrix)
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let v = psi.amplitudes();
    DensityMatrix {
        d: psi.d(),
        n: psi.n(),
        matrix: v * v.adjoint(),
    }
}

/// Weighted mixture of product states.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    factors: Vec<FMatrix>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, factors: Vec<FMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != factors.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} product terms",
                weights.len(),
                factors.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| w.is_nan() || w <= 0.0) {
            return Err(Error::invalid(format!("mixture weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DENSITY_TOL {
            return Err(Error::invalid(format!("mixture weights sum to {total}, expected 1")));
        }
        let shape = (factors[0].n(), factors[0].d());
        for f in &factors {
            if (f.n(), f.d()) != shape {
                return Err(Error::dim("mixture terms have different shapes"));
            }
            f.check_unit_rows()?;
        }
        Ok(Self { weights, factors })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[FMatrix] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors[0].n()
    }

    pub fn d(&self) -> usize {
        self.factors[0].d()
    }
}

/// `Σ_j ω_j |ψ_j⟩⟨ψ_j|`.
pub fn mixture_density(spec: &MixtureSpec) -> Result<DensityMatrix> {
    let (d, n) = (spec.d(), spec.n());
    let dim = dense_dim(d, n)?;
    let mut acc = CMatrix::zeros(dim, dim);
    for (w, f) in spec.weights().iter().zip(spec.factors()) {
        let psi = product_state(f, Normalization::Strict)?;
        let v = psi.amplitudes();
        acc += (v * v.adjoint()) * Complex64::new(*w, 0.0);
    }
    DensityMatrix::from_parts(acc, d, n)
}

/// Product state whose rows are independent normalized complex Gaussian
/// vectors.
pub fn random_fmatrix(n: usize, d: usize, rng: &mut Stream) -> FMatrix {
    let mut entries = CMatrix::from_fn(n, d, |_, _| rng.complex_gaussian());
    for m in 0..n {
        let norm = entries.row(m).norm();
        entries.row_mut(m).unscale_mut(norm);
    }
    FMatrix { entries }
}

/// [`random_fmatrix`] on stream 0 of `seed`.
pub fn random_product_state(n: usize, d: usize, seed: u64) -> FMatrix {
    random_fmatrix(n, d, &mut Stream::new(seed))
}

/// Haar unitary: Gram–Schmidt (two passes) on the columns of a complex
/// Gaussian matrix, which leaves the triangular factor with a positive real
/// diagonal.
pub fn random_unitary_from(d: usize, rng: &mut Stream) -> CMatrix {
    let mut q = CMatrix::from_fn(d, d, |_, _| rng.complex_gaussian());
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let ck = q.column(k).clone_owned();
                q.column_mut(j).axpy(-proj, &ck, Complex64::new(1.0, 0.0));
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    random_unitary_from(d, &mut Stream::new(seed))
}

/// Random separable mixture with `terms` product states and Dirichlet(1)
/// weights.
pub fn random_separable_mixture(n: usize, d: usize, terms: usize, rng: &mut Stream) -> Result<MixtureSpec> {
    let raw: Vec<f64> = (0..terms).map(|_| -(1.0 - rng.uniform()).ln().max(1e-300)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let factors = (0..terms).map(|_| random_fmatrix(n, d, rng)).collect();
    MixtureSpec::new(weights, factors)
}

/// `G G† / Tr(G G†)` for a `d^n × rank` complex Gaussian `G`.
pub fn random_density_matrix(d: usize, n: usize, rank: usize, rng: &mut Stream) -> Result<DensityMatrix> {
    let dim = dense_dim(d, n)?;
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| rng.complex_gaussian());
    let mut m = &g * g.adjoint();
    // exact Hermitian symmetry
    for i in 0..dim {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    let tr = linalg::trace(&m).re;
    m.unscale_mut(tr);
    DensityMatrix::from_parts(m, d, n)
}
