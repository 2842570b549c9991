//! The orthogonal projector `Π` onto the symmetric sector and the overlap of
//! states with it.
//!
//! `Π` is built two ways: as `Σ_k |φ_k⟩⟨φ_k|` over the Dicke basis, and as
//! the group average `(1/n!) Σ_S P_S` of the factor-permutation operators.
//! For product states the weight `‖ψ‖²_SS = ⟨ψ|Π|ψ⟩` is evaluated without
//! materializing `Π`: once through the Dicke amplitudes (orbit sums of the
//! F-matrix) and once through the cycle structure of every permutation.
//!
//! Permutation operators act on tensor positions: `P_σ` moves the factor in
//! position `m` to position `σ(m)`, so `P_σ P_τ = P_{σ∘τ}` and
//! `⟨ψ|P_σ|ψ⟩ = Π_m ⟨ψ_{σ(m)}|ψ_m⟩` for a product state.

use std::collections::HashMap;

use crate::combinatorics::{
    self, count_vectors, cycle_decomposition, dense_dim, enumerate_compositions, enumerate_permutations, hilbert_dim,
    symmetric_dim, Composition, Permutation,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::states::{self, basis_index, basis_tuple, dicke_state, DensityMatrix, FMatrix, Normalization};
use crate::{CMatrix, Complex64};

/// Imaginary parts below this are rounding noise on a real quantity.
pub const IMAG_NOISE: f64 = 1e-10;
/// Imaginary parts above this on a real quantity are a bug.
pub const IMAG_FAIL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    d: usize,
    n: usize,
    matrix: CMatrix,
}

/// Worst-case deviations from the projector identities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProjectorDefects {
    /// `max |Π² − Π|`
    pub idempotency: f64,
    /// `max |Π − Π†|`
    pub hermiticity: f64,
    /// `|Tr Π − rank|`
    pub trace: f64,
}

impl Projector {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `binomial(n + d − 1, d − 1)`.
    pub fn rank(&self) -> usize {
        symmetric_dim(self.d, self.n).expect("validated at construction")
    }

    pub fn defects(&self) -> ProjectorDefects {
        let sq = &self.matrix * &self.matrix;
        ProjectorDefects {
            idempotency: linalg::max_abs_diff(&sq, &self.matrix),
            hermiticity: linalg::hermiticity_defect(&self.matrix),
            trace: (linalg::trace(&self.matrix) - Complex64::new(self.rank() as f64, 0.0)).norm(),
        }
    }

    /// `1 − Π`.
    pub fn complement(&self) -> CMatrix {
        CMatrix::identity(self.matrix.nrows(), self.matrix.ncols()) - &self.matrix
    }
}

/// `Σ_k |φ_k⟩⟨φ_k|` over `Δ_{d,n}`.
pub fn projector_dicke(d: usize, n: usize) -> Result<Projector> {
    let dim = dense_dim(d, n)?;
    let mut m = CMatrix::zeros(dim, dim);
    for k in enumerate_compositions(d, n)? {
        let orbit = combinatorics::multiset_orbit(&k)?;
        let idx: Vec<usize> = orbit.iter().map(|t| basis_index(t, d)).collect::<Result<_>>()?;
        let w = Complex64::new(1.0 / idx.len() as f64, 0.0);
        for &a in &idx {
            for &b in &idx {
                m[(a, b)] += w;
            }
        }
    }
    Ok(Projector { d, n, matrix: m })
}

/// `(1/n!) Σ_{S ∈ S_n} P_S`.
pub fn projector_permutation(d: usize, n: usize) -> Result<Projector> {
    let dim = dense_dim(d, n)?;
    let perms = enumerate_permutations(n)?;
    let w = 1.0 / perms.len() as f64;
    let mut acc = vec![0.0f64; dim * dim];
    for p in &perms {
        for (from, to) in permutation_index_map(p, d).into_iter().enumerate() {
            acc[to * dim + from] += 1.0;
        }
    }
    let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(acc[i * dim + j] * w, 0.0));
    Ok(Projector { d, n, matrix: m })
}

/// For each basis index, the index it is sent to by `P_σ`.
pub fn permutation_index_map(p: &Permutation, d: usize) -> Vec<usize> {
    let n = p.len();
    let dim = d.pow(n as u32);
    let mut out_tuple = vec![0; n];
    (0..dim)
        .map(|from| {
            let t = basis_tuple(from, d, n);
            for (m, &j) in t.iter().enumerate() {
                out_tuple[p.apply(m)] = j;
            }
            basis_index(&out_tuple, d).expect("symbols come from a valid tuple")
        })
        .collect()
}

/// 0/1 matrix of `P_σ`: `|j_1 … j_n⟩ ↦ |j_{σ⁻¹(1)} … j_{σ⁻¹(n)}⟩`.
pub fn permutation_operator(p: &Permutation, d: usize) -> Result<CMatrix> {
    let dim = hilbert_dim(d, p.len())?;
    let mut m = CMatrix::zeros(dim, dim);
    for (from, to) in permutation_index_map(p, d).into_iter().enumerate() {
        m[(to, from)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Literal orbit sum `Σ_{(j_1…j_n) ∈ G_k} Π_m f_{m, j_m}`.
pub fn orbit_sum(f: &FMatrix, k: &Composition) -> Result<Complex64> {
    k.expect_shape(f.d(), f.n())?;
    Ok(combinatorics::multiset_orbit(k)?
        .iter()
        .map(|t| t.iter().enumerate().map(|(m, &j)| f.get(m, j)).product::<Complex64>())
        .sum())
}

/// `⟨φ_k|ψ⟩ = √(k_0!⋯k_{d−1}!/n!) · Σ_{G_k} Π_m f_{m,j_m}`.
pub fn symmetric_amplitude(f: &FMatrix, k: &Composition) -> Result<Complex64> {
    let size = combinatorics::multinomial(k)? as f64;
    Ok(orbit_sum(f, k)? / size.sqrt())
}

/// All orbit sums at once.
///
/// The orbit sum for `k` is the coefficient of `t_0^{k_0} ⋯ t_{d−1}^{k_{d−1}}`
/// in `Π_m (Σ_j f_{m,j} t_j)`; the plan expands that product one factor at a
/// time over precomputed composition indices, so evaluation allocates only
/// two scratch buffers.
#[derive(Debug, Clone)]
pub struct OrbitSumPlan {
    d: usize,
    n: usize,
    /// `step[l][i][j]`: index at level `l + 1` of level-`l` vector `i` plus `e_j`.
    step: Vec<Vec<Vec<usize>>>,
    compositions: Vec<Composition>,
    /// `1 / |G_k|` per final composition.
    inv_orbit: Vec<f64>,
}

impl OrbitSumPlan {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::invalid("need d >= 1 and n >= 1"));
        }
        let levels: Vec<Vec<Vec<usize>>> = (0..=n).map(|l| count_vectors(d, l)).collect();
        let mut step = Vec::with_capacity(n);
        for l in 0..n {
            let next: HashMap<&[usize], usize> = levels[l + 1]
                .iter()
                .enumerate()
                .map(|(i, v)| (v.as_slice(), i))
                .collect();
            let table = levels[l]
                .iter()
                .map(|v| {
                    (0..d)
                        .map(|j| {
                            let mut w = v.clone();
                            w[j] += 1;
                            next[w.as_slice()]
                        })
                        .collect()
                })
                .collect();
            step.push(table);
        }
        let compositions = enumerate_compositions(d, n)?;
        let inv_orbit = compositions
            .iter()
            .map(|k| combinatorics::multinomial(k).map(|g| 1.0 / g as f64))
            .collect::<Result<_>>()?;
        Ok(Self {
            d,
            n,
            step,
            compositions,
            inv_orbit,
        })
    }

    pub fn compositions(&self) -> &[Composition] {
        &self.compositions
    }

    fn expand(&self, f: &FMatrix) -> Vec<Complex64> {
        assert_eq!((f.n(), f.d()), (self.n, self.d), "F-matrix shape does not match plan");
        let mut cur = vec![Complex64::new(1.0, 0.0)];
        for (l, table) in self.step.iter().enumerate() {
            let mut next =
                vec![Complex64::new(0.0, 0.0); self.step.get(l + 1).map_or(self.compositions.len(), Vec::len)];
            for (i, coef) in cur.iter().enumerate() {
                for (j, &target) in table[i].iter().enumerate() {
                    next[target] += coef * f.get(l, j);
                }
            }
            cur = next;
        }
        cur
    }

    /// Orbit sums in [`enumerate_compositions`] order.
    pub fn orbit_sums(&self, f: &FMatrix) -> Vec<Complex64> {
        self.expand(f)
    }

    /// `Σ_k |orbit_sum_k|² / |G_k|`.
    pub fn symmetric_norm_squared(&self, f: &FMatrix) -> f64 {
        self.expand(f)
            .iter()
            .zip(&self.inv_orbit)
            .map(|(s, w)| s.norm_sqr() * w)
            .sum()
    }
}

/// `Σ_k |⟨φ_k|ψ⟩|²` for the product state with F-matrix `f`.
pub fn symmetric_norm_squared(f: &FMatrix) -> Result<f64> {
    Ok(OrbitSumPlan::new(f.d(), f.n())?.symmetric_norm_squared(f))
}

/// `⟨ψ|Π|ψ⟩` as the average over `S_n` of products of cyclic Gram
/// products, one per cycle of `S`.
pub fn symmetric_norm_squared_cycles(f: &FMatrix) -> Result<f64> {
    let gram = f.gram();
    let perms = enumerate_permutations(f.n())?;
    let mut total = Complex64::new(0.0, 0.0);
    for p in &perms {
        let mut term = Complex64::new(1.0, 0.0);
        for cycle in cycle_decomposition(p) {
            let e = cycle.elements();
            for (i, &a) in e.iter().enumerate() {
                let next = e[(i + 1) % e.len()];
                term *= gram[(next, a)];
            }
        }
        total += term;
    }
    let value = total / perms.len() as f64;
    real_part_checked(value, "cycle-sum symmetric norm")
}

/// `⟨ψ|Π|ψ⟩` with an explicit projector.
pub fn symmetric_norm_squared_explicit(f: &FMatrix, pi: &Projector) -> Result<f64> {
    if (f.d(), f.n()) != (pi.d(), pi.n()) {
        return Err(Error::dim("F-matrix and projector shapes differ"));
    }
    let psi = states::product_state(f, Normalization::Lax)?;
    real_part_checked(psi.expectation(pi.matrix()), "explicit symmetric norm")
}

/// `Tr(Π ρ) = Σ_k ⟨φ_k|ρ|φ_k⟩`.
pub fn symmetric_trace(rho: &DensityMatrix) -> Result<f64> {
    let (d, n) = (rho.d(), rho.n());
    let m = rho.matrix();
    let mut total = Complex64::new(0.0, 0.0);
    for k in enumerate_compositions(d, n)? {
        let idx: Vec<usize> = combinatorics::multiset_orbit(&k)?
            .iter()
            .map(|t| basis_index(t, d))
            .collect::<Result<_>>()?;
        let mut block = Complex64::new(0.0, 0.0);
        for &a in &idx {
            for &b in &idx {
                block += m[(a, b)];
            }
        }
        total += block / idx.len() as f64;
    }
    real_part_checked(total, "symmetric trace")
}

/// The Dicke basis as rows `(composition, state)`.
pub fn dicke_basis(d: usize, n: usize) -> Result<Vec<(Composition, states::PureState)>> {
    enumerate_compositions(d, n)?
        .into_iter()
        .map(|k| dicke_state(&k).map(|s| (k, s)))
        .collect()
}

pub(crate) fn real_part_checked(z: Complex64, what: &str) -> Result<f64> {
    let scale = z.re.abs().max(1.0);
    if z.im.abs() > IMAG_FAIL * scale {
        return Err(Error::Consistency(format!("{what} has imaginary part {:e}", z.im)));
    }
    if z.im.abs() > IMAG_NOISE * scale {
        log::warn!("{what}: discarding imaginary residue {:e}", z.im);
    }
    Ok(z.re)
}
