//! Entanglement witnesses `W = Π − B·1`, multipartite partial transposes and
//! the generalized Werner family.
//!
//! Separable states satisfy `Tr(Πρ) ≥ B` whenever every product state has
//! symmetric weight at least `B`, so `Tr(Wρ) < 0` certifies entanglement.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_defect, max_abs, trace_of_product};
use crate::optimizer::known_bound;
use crate::projector::{projector_dicke, real_part_checked};
use crate::states::DensityMatrix;
use crate::{CMatrix, Complex64};

/// Relative tolerance of [`is_psd`] used by the sweeps.
pub const PSD_TOL: f64 = 1e-9;
/// Largest operator dimension handed to the eigensolver.
pub const MAX_PT_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub d: usize,
    pub n: usize,
    pub bound: f64,
    #[serde(skip)]
    pub matrix: CMatrix,
}

/// `Π − B·1`; `bound = None` falls back to [`known_bound`].
pub fn witness(d: usize, n: usize, bound: Option<f64>) -> Result<Witness> {
    let b = match bound {
        Some(b) => b,
        None => known_bound(n, d).ok_or(Error::MissingBound { n, d })?,
    };
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::invalid(format!("witness bound must lie in [0, 1], got {b}")));
    }
    let mut matrix = projector_dicke(d, n)?.into_matrix();
    for i in 0..matrix.nrows() {
        matrix[(i, i)] -= Complex64::new(b, 0.0);
    }
    Ok(Witness { d, n, bound: b, matrix })
}

/// `Tr(Wρ)`.
pub fn witness_value(w: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if (w.d, w.n) != (rho.d(), rho.n()) {
        return Err(Error::dim(format!(
            "witness is for d = {}, n = {} but the state has d = {}, n = {}",
            w.d,
            w.n,
            rho.d(),
            rho.n()
        )));
    }
    real_part_checked(trace_of_product(&w.matrix, rho.matrix()), "Tr(Wρ)")
}

/// Subset of the particles `{1, …, n}`; bit `m` stands for particle `m + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    /// From 1-based particle labels.
    pub fn from_members(members: &[usize]) -> Result<Self> {
        members.iter().try_fold(Self(0), |acc, &m| {
            if (1..=32).contains(&m) {
                Ok(Self(acc.0 | 1 << (m - 1)))
            } else {
                Err(Error::invalid(format!("particle label {m} out of range")))
            }
        })
    }

    pub fn full(n: usize) -> Self {
        Self(((1u64 << n) - 1) as u32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// 0-based.
    pub fn contains(self, m: usize) -> bool {
        m < 32 && self.0 >> m & 1 == 1
    }

    /// 1-based labels, ascending.
    pub fn members(self) -> Vec<usize> {
        (0..32).filter(|&m| self.contains(m)).map(|m| m + 1).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        Self(!self.0 & Self::full(n).0)
    }

    fn check(self, n: usize) -> Result<()> {
        if self.0 & !Self::full(n).0 != 0 {
            return Err(Error::dim(format!("subset {self} names particles beyond n = {n}")));
        }
        Ok(())
    }
}

impl From<SubsetMask> for Vec<usize> {
    fn from(s: SubsetMask) -> Self {
        s.members()
    }
}

impl TryFrom<Vec<usize>> for SubsetMask {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        SubsetMask::from_members(&v)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.members().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Subsets containing particle 1 other than the full set: one
/// representative of each `{I, N − I}` pair, `2^(n−1) − 1` in all.
pub fn canonical_subsets(n: usize) -> Vec<SubsetMask> {
    if n < 2 {
        return Vec::new();
    }
    (0..(1u32 << (n - 1)) - 1)
        .map(|rest| SubsetMask(1 | rest << 1))
        .collect()
}

/// Transposes the tensor legs in `subset`: entry `(a, b)` of the result is
/// the entry of `rho` with digits `a_m ↔ b_m` exchanged for `m ∈ subset`.
pub fn partial_transpose(rho: &DensityMatrix, subset: SubsetMask) -> Result<CMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.d(), rho.n(), subset)
}

/// [`partial_transpose`] on a bare operator over `(C^d)^{⊗n}`.
pub fn partial_transpose_matrix(m: &CMatrix, d: usize, n: usize, subset: SubsetMask) -> Result<CMatrix> {
    subset.check(n)?;
    let dim = d.checked_pow(n as u32).ok_or_else(|| Error::size("d^n overflows"))?;
    if m.shape() != (dim, dim) {
        return Err(Error::dim(format!(
            "{:?} operator does not act on (C^{d})^⊗{n}",
            m.shape()
        )));
    }
    // place value of factor k, first factor most significant
    let places: Vec<usize> = (0..n)
        .filter(|&k| subset.contains(k))
        .map(|k| d.pow((n - 1 - k) as u32))
        .collect();
    Ok(CMatrix::from_fn(dim, dim, |a, b| {
        let (mut src_a, mut src_b) = (a, b);
        for &pv in &places {
            let da = a / pv % d;
            let db = b / pv % d;
            src_a = src_a - da * pv + db * pv;
            src_b = src_b - db * pv + da * pv;
        }
        m[(src_a, src_b)]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdResult {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// `tol · max(1, ‖H‖_max)`.
    pub threshold: f64,
    /// `|min eigenvalue| ≤ threshold`: the operator is singular to within
    /// tolerance.
    pub boundary: bool,
}

/// PSD test by full eigendecomposition: PSD iff the smallest eigenvalue is
/// at least `−tol · max(1, ‖H‖_max)`.
pub fn is_psd(h: &CMatrix, tol: f64) -> Result<PsdResult> {
    if h.nrows() > MAX_PT_DIM {
        return Err(Error::size(format!(
            "{}-dimensional operator exceeds {MAX_PT_DIM}",
            h.nrows()
        )));
    }
    let threshold = tol * max_abs(h).max(1.0);
    let min_eigenvalue = hermitian_eigen(h)?.min_eigenvalue();
    Ok(PsdResult {
        is_psd: min_eigenvalue >= -threshold,
        min_eigenvalue,
        threshold,
        boundary: min_eigenvalue.abs() <= threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetResult {
    pub subset: SubsetMask,
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptReport {
    pub n: usize,
    pub d: usize,
    pub subsets: Vec<SubsetResult>,
    pub is_ppt: bool,
    pub subsets_checked: usize,
    pub tolerance: f64,
}

impl PptReport {
    pub fn min_eigenvalue(&self) -> f64 {
        self.subsets
            .iter()
            .map(|s| s.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

/// I-PPT test over [`canonical_subsets`] with [`PSD_TOL`].
pub fn ppt_sweep(rho: &DensityMatrix) -> Result<PptReport> {
    ppt_sweep_with_tol(rho, PSD_TOL)
}

pub fn ppt_sweep_with_tol(rho: &DensityMatrix, tol: f64) -> Result<PptReport> {
    if rho.dim() > MAX_PT_DIM {
        return Err(Error::size(format!(
            "{}-dimensional state exceeds {MAX_PT_DIM}",
            rho.dim()
        )));
    }
    let subsets: Vec<SubsetResult> = canonical_subsets(rho.n())
        .into_par_iter()
        .map(|s| {
            let r = is_psd(&partial_transpose(rho, s)?, tol)?;
            Ok(SubsetResult {
                subset: s,
                min_eigenvalue: r.min_eigenvalue,
                is_psd: r.is_psd,
                boundary: r.boundary,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PptReport {
        n: rho.n(),
        d: rho.d(),
        is_ppt: subsets.iter().all(|s| s.is_psd),
        subsets_checked: subsets.len(),
        subsets,
        tolerance: tol,
    })
}

/// `p·Π/Tr Π + (1 − p)(1 − Π)/Tr(1 − Π)`; for three qubits both ranks are
/// 4, giving `(p/4)Π + ((1 − p)/4)(1 − Π)`.
pub fn werner_state(p: f64, d: usize, n: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let pi = projector_dicke(d, n)?;
    let dim = pi.matrix().nrows();
    let sym = pi.rank();
    if sym == dim {
        return Err(Error::invalid(format!(
            "no antisymmetric complement for d = {d}, n = {n}"
        )));
    }
    let a = p / sym as f64;
    let b = (1.0 - p) / (dim - sym) as f64;
    let m = pi.matrix().map(|z| z * (a - b)) + CMatrix::identity(dim, dim).map(|z| z * b);
    DensityMatrix::new(m, d, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WernerThresholds {
    /// Smallest `p` with a PSD partial transpose on particle 1.
    pub ppt_boundary: f64,
    /// Zero of `p ↦ Tr(Wρ(p))`.
    pub witness_threshold: f64,
    pub bisection_steps: usize,
}

/// Thresholds for three qubits.
pub fn werner_thresholds() -> Result<WernerThresholds> {
    werner_thresholds_for(2, 3)
}

/// Bisects the smallest eigenvalue of `ρ(p)^{Γ_{1}}` on `[0, 1]` to `1e-9`;
/// the witness threshold is exact because `Tr(Wρ(p))` is affine in `p`.
pub fn werner_thresholds_for(d: usize, n: usize) -> Result<WernerThresholds> {
    let first = SubsetMask::from_bits(1);
    let min_pt = |p: f64| -> Result<f64> {
        Ok(hermitian_eigen(&partial_transpose(&werner_state(p, d, n)?, first)?)?.min_eigenvalue())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if min_pt(hi)? < 0.0 || min_pt(lo)? >= 0.0 {
        return Err(Error::Consistency(format!(
            "partial-transpose eigenvalue does not change sign on [0, 1] for d = {d}, n = {n}"
        )));
    }
    let mut steps = 0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if min_pt(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }

    let w = witness(d, n, None)?;
    let w0 = witness_value(&w, &werner_state(0.0, d, n)?)?;
    let w1 = witness_value(&w, &werner_state(1.0, d, n)?)?;
    Ok(WernerThresholds {
        ppt_boundary: 0.5 * (lo + hi),
        witness_threshold: -w0 / (w1 - w0),
        bisection_steps: steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WernerRow {
    pub p: f64,
    pub witness_value: f64,
    pub min_pt_eigenvalue: f64,
    pub is_ppt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WernerScan {
    pub d: usize,
    pub n: usize,
    pub bound: f64,
    pub rows: Vec<WernerRow>,
    pub thresholds: WernerThresholds,
}

/// `steps` evenly spaced values of `p` from `p_min` to `p_max` inclusive
/// (just `p_min` when `steps == 1`), each with the witness value and the
/// full PPT sweep.
pub fn werner_scan(p_min: f64, p_max: f64, steps: usize, d: usize, n: usize) -> Result<WernerScan> {
    if !(0.0 <= p_min && p_min < p_max && p_max <= 1.0) {
        return Err(Error::invalid(format!(
            "need 0 <= p_min < p_max <= 1, got [{p_min}, {p_max}]"
        )));
    }
    if steps == 0 {
        return Err(Error::invalid("steps must be at least 1"));
    }
    let w = witness(d, n, None)?;
    let rows = (0..steps)
        .into_par_iter()
        .map(|i| {
            let p = if steps == 1 {
                p_min
            } else {
                p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64
            };
            let rho = werner_state(p, d, n)?;
            let report = ppt_sweep(&rho)?;
            Ok(WernerRow {
                p,
                witness_value: witness_value(&w, &rho)?,
                min_pt_eigenvalue: report.min_eigenvalue(),
                is_ppt: report.is_ppt,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WernerScan {
        d,
        n,
        bound: w.bound,
        rows,
        thresholds: werner_thresholds_for(d, n)?,
    })
}

/// Hermiticity check exposed for callers validating external operators.
pub fn is_hermitian(h: &CMatrix, tol: f64) -> bool {
    h.is_square() && hermiticity_defect(h) <= tol * max_abs(h).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Permutation;
    use crate::linalg::{hermitian_spectrum, leading_principal_minors, max_abs_diff};
    use crate::projector::{permutation_operator, symmetric_trace};
    use crate::states::{density_from_pure, PureState};
    use crate::CVector;

    fn real(rows: &[[f64; 8]], scale: f64) -> CMatrix {
        CMatrix::from_fn(8, 8, |i, j| Complex64::new(rows[i][j] * scale, 0.0))
    }

    fn pt_reference(p: f64) -> CMatrix {
        let a = [
            [6., 0., 0., 0., 0., 2., 2., 0.],
            [0., 2., 2., 0., 0., 0., 0., 2.],
            [0., 2., 2., 0., 0., 0., 0., 2.],
            [0., 0., 0., 2., 0., 0., 0., 0.],
            [0., 0., 0., 0., 2., 0., 0., 0.],
            [2., 0., 0., 0., 0., 2., 2., 0.],
            [2., 0., 0., 0., 0., 2., 2., 0.],
            [0., 2., 2., 0., 0., 0., 0., 6.],
        ];
        let b = [
            [0., 0., 0., 0., 0., -2., -2., 0.],
            [0., 4., -2., 0., 0., 0., 0., -2.],
            [0., -2., 4., 0., 0., 0., 0., -2.],
            [0., 0., 0., 4., 0., 0., 0., 0.],
            [0., 0., 0., 0., 4., 0., 0., 0.],
            [-2., 0., 0., 0., 0., 4., -2., 0.],
            [-2., 0., 0., 0., 0., -2., 4., 0.],
            [0., -2., -2., 0., 0., 0., 0., 0.],
        ];
        real(&a, p / 24.0) + real(&b, (1.0 - p) / 24.0)
    }

    fn sorted_spectrum(m: &CMatrix) -> Vec<f64> {
        hermitian_spectrum(m).unwrap()
    }

    #[test]
    fn witness_spectra() {
        let w = witness(2, 3, Some(0.25)).unwrap();
        let s = sorted_spectrum(&w.matrix);
        for (i, v) in s.iter().enumerate() {
            let want = if i < 4 { -0.25 } else { 0.75 };
            assert!((v - want).abs() < 1e-12);
        }
        let w = witness(2, 2, None).unwrap();
        assert_eq!(w.bound, 0.5);
        let s = sorted_spectrum(&w.matrix);
        assert!((s[0] + 0.5).abs() < 1e-12 && s[1..].iter().all(|v| (v - 0.5).abs() < 1e-12));
        let w = witness(2, 3, Some(0.0)).unwrap();
        assert!(is_psd(&w.matrix, PSD_TOL).unwrap().is_psd);
    }

    #[test]
    fn witness_errors() {
        assert!(matches!(witness(2, 4, None), Err(Error::MissingBound { n: 4, d: 2 })));
        assert!(witness(2, 3, Some(1.5)).is_err());
        let w = witness(2, 2, None).unwrap();
        assert!(witness_value(&w, &werner_state(0.5, 2, 3).unwrap()).is_err());
    }

    #[test]
    fn singlet_has_negative_value() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(
            vec![0.0, s, -s, 0.0]
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect(),
        );
        let rho = density_from_pure(&PureState::new(v, 2, 2).unwrap());
        let w = witness(2, 2, None).unwrap();
        assert!((witness_value(&w, &rho).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn werner_witness_is_p_minus_quarter() {
        let w = witness(2, 3, None).unwrap();
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let rho = werner_state(p, 2, 3).unwrap();
            assert!((witness_value(&w, &rho).unwrap() - (p - 0.25)).abs() < 1e-14);
            assert!((symmetric_trace(&rho).unwrap() - p).abs() < 1e-14);
        }
    }

    #[test]
    fn werner_family_endpoints() {
        let pi = projector_dicke(2, 3).unwrap();
        let rho1 = werner_state(1.0, 2, 3).unwrap();
        assert!(max_abs_diff(rho1.matrix(), &pi.matrix().map(|z| z / 4.0)) < 1e-16);
        let rho0 = werner_state(0.0, 2, 3).unwrap();
        assert!(max_abs_diff(rho0.matrix(), &pi.complement().map(|z| z / 4.0)) < 1e-16);
        assert!(werner_state(1.1, 2, 3).is_err());
        assert!(werner_state(0.5, 1, 3).is_err());
        // other sizes normalize by rank
        let rho = werner_state(0.3, 3, 2).unwrap();
        assert!((symmetric_trace(&rho).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_of_werner_matches_block_swap() {
        for p in [0.0, 0.2, 0.25, 0.6, 1.0] {
            let pt = partial_transpose(&werner_state(p, 2, 3).unwrap(), SubsetMask::from_bits(1)).unwrap();
            assert!(max_abs_diff(&pt, &pt_reference(p)) < 1e-15, "p = {p}");
        }
    }

    #[test]
    fn ppt_boundary_is_one_fifth() {
        // eigenvalues (5p − 1)/12, (1 − p)/4, (2 − p)/12
        let spec = sorted_spectrum(&pt_reference(0.37));
        assert!((spec[0] - (5.0 * 0.37 - 1.0) / 12.0).abs() < 1e-14);
        let t = werner_thresholds().unwrap();
        assert!((t.ppt_boundary - 0.2).abs() < 1e-6);
        assert!((t.witness_threshold - 0.25).abs() < 1e-12);
        let at = is_psd(&pt_reference(0.2), PSD_TOL).unwrap();
        assert!(at.is_psd && at.boundary);
    }

    #[test]
    fn sylvester_cross_check_at_quarter() {
        let m = pt_reference(0.25);
        let minors = leading_principal_minors(&m);
        assert!(minors.iter().all(|&x| x > 0.0), "{minors:?}");
        assert!(is_psd(&m, PSD_TOL).unwrap().is_psd);
    }

    #[test]
    fn psd_examples() {
        let id = CMatrix::identity(3, 3);
        let r = is_psd(&id, PSD_TOL).unwrap();
        assert!(r.is_psd && (r.min_eigenvalue - 1.0).abs() < 1e-15);
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1e-3, 0.0),
        ]));
        let r = is_psd(&m, 1e-9).unwrap();
        assert!(!r.is_psd && (r.min_eigenvalue + 1e-3).abs() < 1e-15);
        let bad = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(is_psd(&bad, PSD_TOL).is_err());
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(canonical_subsets(2).len(), 1);
        assert_eq!(canonical_subsets(3).len(), 3);
        assert_eq!(canonical_subsets(5).len(), 15);
        for s in canonical_subsets(4) {
            assert!(s.contains(0) && s != SubsetMask::full(4));
        }
        let s = SubsetMask::from_members(&[1, 3]).unwrap();
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.complement(3).members(), vec![2]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3]");
        assert!(SubsetMask::from_members(&[0]).is_err());
    }

    #[test]
    fn partial_transpose_edge_cases() {
        let rho = werner_state(0.4, 2, 3).unwrap();
        assert_eq!(&partial_transpose(&rho, SubsetMask::EMPTY).unwrap(), rho.matrix());
        assert_eq!(
            partial_transpose(&rho, SubsetMask::full(3)).unwrap(),
            rho.matrix().transpose()
        );
        assert!(partial_transpose(&rho, SubsetMask::from_bits(8)).is_err());
    }

    #[test]
    fn werner_sweeps() {
        let r = ppt_sweep(&werner_state(0.22, 2, 3).unwrap()).unwrap();
        assert!(r.is_ppt && r.subsets_checked == 3);
        assert!(!ppt_sweep(&werner_state(0.1, 2, 3).unwrap()).unwrap().is_ppt);
        let r = ppt_sweep(&werner_state(0.5, 2, 2).unwrap()).unwrap();
        assert_eq!(r.subsets_checked, 1);
    }

    #[test]
    fn permutation_covariance_on_werner() {
        let rho = werner_state(0.3, 2, 3).unwrap();
        let g1 = partial_transpose(&rho, SubsetMask::from_bits(1)).unwrap();
        for (bits, swap) in [(2u32, vec![1, 0, 2]), (4, vec![2, 1, 0])] {
            let g = partial_transpose(&rho, SubsetMask::from_bits(bits)).unwrap();
            let p = permutation_operator(&Permutation::new(swap).unwrap(), 2).unwrap();
            assert!(max_abs_diff(&g, &(&p * &g1 * p.transpose())) < 1e-15);
        }
    }

    #[test]
    fn scan_rows() {
        let s = werner_scan(0.0, 1.0, 101, 2, 3).unwrap();
        assert_eq!(s.rows.len(), 101);
        for r in &s.rows {
            assert_eq!(r.witness_value < 0.0, r.p < 0.25 - 1e-12, "p = {}", r.p);
        }
        let s = werner_scan(0.2, 0.25, 6, 2, 3).unwrap();
        assert!(s.rows.iter().all(|r| r.is_ppt));
        assert!(s.rows[1..5].iter().all(|r| r.witness_value < 0.0));
        assert_eq!(werner_scan(0.3, 0.6, 1, 2, 3).unwrap().rows.len(), 1);
        assert!(werner_scan(0.5, 0.4, 3, 2, 3).is_err());
    }
}
