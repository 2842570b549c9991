//! Numerical checks of the orbit-sum condition ("property A").
//!
//! A complex `n × d` matrix `F` has property A when every orbit sum
//! `Σ_{G_k} Π_m f_{m,j_m}` vanishes, `k ∈ Δ_{d,n}`. A zero row forces this;
//! the converse (property A ⇒ some zero row) is what makes every product
//! state overlap the symmetric sector. The converse is probed here by
//! randomized falsification: matrices whose rows all have norm at least
//! `row_floor` must violate property A.

use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{Composition, Limits};
use crate::error::{Error, Result};
use crate::projector::OrbitSumPlan;
use crate::rng::Stream;
use crate::states::FMatrix;
use crate::{CMatrix, Complex64};

/// Tolerance used by [`lemma_fuzz`] to decide that an orbit sum vanishes.
pub const FUZZ_TOL: f64 = 1e-8;
pub const DEFAULT_ROW_FLOOR: f64 = 0.1;
/// Violations kept in serialized reports.
pub const REPORT_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub composition: Composition,
    pub sum: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyAReport {
    pub holds: bool,
    pub violations: Vec<Violation>,
    /// Number of violated compositions before any truncation.
    pub violation_count: usize,
    pub max_abs_sum: f64,
    pub tolerance: f64,
}

impl PropertyAReport {
    /// Keeps only the first `cap` violations.
    pub fn truncated(mut self, cap: usize) -> Self {
        self.violations.truncate(cap);
        self
    }
}

/// `1e-12 · (max row norm)^n`.
pub fn default_tolerance(f: &FMatrix) -> f64 {
    1e-12 * f.max_row_norm().powi(f.n() as i32)
}

/// Evaluates every orbit sum; a composition is violated when its sum has
/// modulus above `tol`.
pub fn property_a_check(f: &FMatrix, tol: f64) -> Result<PropertyAReport> {
    let plan = OrbitSumPlan::new(f.d(), f.n())?;
    Ok(check_with_plan(&plan, f, tol))
}

fn check_with_plan(plan: &OrbitSumPlan, f: &FMatrix, tol: f64) -> PropertyAReport {
    let sums = plan.orbit_sums(f);
    let max_abs_sum = sums.iter().fold(0.0f64, |acc, s| acc.max(s.norm()));
    let violations: Vec<Violation> = plan
        .compositions()
        .iter()
        .zip(&sums)
        .filter(|(_, s)| s.norm() > tol)
        .map(|(k, &sum)| Violation {
            composition: k.clone(),
            sum,
        })
        .collect();
    PropertyAReport {
        holds: violations.is_empty(),
        violation_count: violations.len(),
        violations,
        max_abs_sum,
        tolerance: tol,
    }
}

/// Smallest row index whose entries all have modulus at most `tol`.
pub fn has_zero_row(f: &FMatrix, tol: f64) -> Option<usize> {
    (0..f.n()).find(|&m| (0..f.d()).all(|j| f.get(m, j).norm() <= tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub row_floor: f64,
    pub tolerance: f64,
    /// Smallest `max_abs_sum` seen; `None` when no trials ran.
    pub min_max_abs_sum: Option<f64>,
    pub worst_trial: Option<usize>,
}

/// Random complex matrix whose row norms are uniform in
/// `[row_floor, max(1, row_floor)]`.
pub fn random_floored_fmatrix(n: usize, d: usize, row_floor: f64, rng: &mut Stream) -> FMatrix {
    let hi = row_floor.max(1.0);
    let mut m = CMatrix::from_fn(n, d, |_, _| rng.complex_gaussian());
    for r in 0..n {
        let norm = m.row(r).norm();
        let target = rng.uniform_in(row_floor, hi);
        m.row_mut(r).scale_mut(target / norm);
    }
    FMatrix::new(m).expect("non-empty shape")
}

/// Draws `trials` random matrices (trial `i` on stream `i` of `seed`) and
/// fails if any of them satisfies property A at [`FUZZ_TOL`].
pub fn lemma_fuzz(n: usize, d: usize, trials: usize, seed: u64, row_floor: f64) -> Result<FuzzReport> {
    Limits::default().check(d, n)?;
    if row_floor.is_nan() || row_floor <= 0.0 {
        return Err(Error::invalid(format!("row_floor must be positive, got {row_floor}")));
    }
    let plan = OrbitSumPlan::new(d, n)?;
    let outcomes: Vec<(usize, f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let f = random_floored_fmatrix(n, d, row_floor, &mut Stream::split(seed, i as u64));
            let report = check_with_plan(&plan, &f, FUZZ_TOL);
            (i, report.max_abs_sum, report.holds && has_zero_row(&f, 0.0).is_none())
        })
        .collect();

    if let Some(&(trial, max_abs_sum, _)) = outcomes.iter().find(|o| o.2) {
        return Err(Error::LemmaViolation { trial, max_abs_sum });
    }
    let worst = outcomes
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|&(i, v, _)| (i, v));
    Ok(FuzzReport {
        n,
        d,
        trials,
        seed,
        row_floor,
        tolerance: FUZZ_TOL,
        min_max_abs_sum: worst.map(|w| w.1),
        worst_trial: worst.map(|w| w.0),
    })
}

/// Copy of `f` with row `zero_row` set to zero.
pub fn with_zero_row(f: &FMatrix, zero_row: usize) -> FMatrix {
    let mut m = f.entries().clone();
    m.row_mut(zero_row).fill(Complex64::new(0.0, 0.0));
    FMatrix::new(m).expect("shape unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::multinomial;
    use crate::projector::symmetric_norm_squared;
    use crate::states::random_fmatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_row_gives_property_a_exactly() {
        let mut rng = Stream::new(1);
        for (n, d) in [(2, 2), (3, 3), (4, 2)] {
            let f = with_zero_row(&random_fmatrix(n, d, &mut rng), n - 1);
            let r = property_a_check(&f, 0.0).unwrap();
            assert!(r.holds);
            assert!(r.violations.is_empty());
            assert_eq!(r.max_abs_sum, 0.0);
        }
    }

    #[test]
    fn all_ones_violates_everywhere() {
        let f = FMatrix::from_rows(&vec![vec![c(1.0); 3]; 3]).unwrap();
        let r = property_a_check(&f, 1e-12).unwrap();
        assert!(!r.holds);
        assert_eq!(r.violations.len(), 10);
        for v in &r.violations {
            assert_eq!(v.sum, c(multinomial(&v.composition).unwrap() as f64));
        }
    }

    #[test]
    fn single_symbol_case() {
        let f = FMatrix::from_real_rows(&[vec![2.0], vec![0.0], vec![3.0]]).unwrap();
        assert!(property_a_check(&f, 0.0).unwrap().holds);
        let g = FMatrix::from_real_rows(&[vec![2.0], vec![0.5], vec![3.0]]).unwrap();
        let r = property_a_check(&g, 0.0).unwrap();
        assert!(!r.holds);
        assert_eq!(r.max_abs_sum, 3.0);
    }

    #[test]
    fn zero_row_examples() {
        let zero = FMatrix::new(CMatrix::zeros(3, 2)).unwrap();
        assert_eq!(has_zero_row(&zero, 0.0), Some(0));
        let id = FMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(has_zero_row(&id, 1e-12), None);
        let tiny = FMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1e-15, 0.0]]).unwrap();
        assert_eq!(has_zero_row(&tiny, 1e-12), Some(1));
    }

    #[test]
    fn row_permutation_invariance() {
        let mut rng = Stream::new(2);
        let f = random_fmatrix(4, 3, &mut rng);
        let a = property_a_check(&f, 1e-3).unwrap();
        let b = property_a_check(&f.permute_rows(&[2, 0, 3, 1]).unwrap(), 1e-3).unwrap();
        assert_eq!(a.holds, b.holds);
        assert!((a.max_abs_sum - b.max_abs_sum).abs() < 1e-14);
        let ka: Vec<_> = a.violations.iter().map(|v| &v.composition).collect();
        let kb: Vec<_> = b.violations.iter().map(|v| &v.composition).collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn small_orbit_sums_bound_the_symmetric_weight() {
        // orbit sums below τ imply ‖ψ‖²_SS ≤ |Δ_{d,n}| τ²
        let mut rng = Stream::new(3);
        for _ in 0..50 {
            let f = random_fmatrix(3, 2, &mut rng);
            let r = property_a_check(&f, 0.0).unwrap();
            let tau = r.max_abs_sum;
            let bound = 4.0 * tau * tau;
            assert!(symmetric_norm_squared(&f).unwrap() <= bound + 1e-15);
        }
    }

    #[test]
    fn fuzz_finds_no_counterexample() {
        let r = lemma_fuzz(3, 2, 2000, 7, DEFAULT_ROW_FLOOR).unwrap();
        assert!(r.min_max_abs_sum.unwrap() > FUZZ_TOL);
        let r = lemma_fuzz(4, 3, 500, 8, DEFAULT_ROW_FLOOR).unwrap();
        assert!(r.min_max_abs_sum.unwrap() > FUZZ_TOL);
    }

    #[test]
    fn fuzz_is_deterministic_and_handles_zero_trials() {
        let a = lemma_fuzz(3, 3, 200, 5, 0.2).unwrap();
        let b = lemma_fuzz(3, 3, 200, 5, 0.2).unwrap();
        assert_eq!(a, b);
        let empty = lemma_fuzz(3, 2, 0, 1, 0.1).unwrap();
        assert_eq!(empty.min_max_abs_sum, None);
        assert!(lemma_fuzz(3, 2, 1, 1, 0.0).is_err());
    }

    #[test]
    fn floored_rows_respect_floor() {
        let mut rng = Stream::new(4);
        for _ in 0..100 {
            let f = random_floored_fmatrix(4, 3, 0.1, &mut rng);
            assert!(f.row_norms().iter().all(|&r| (0.1 - 1e-15..=1.0 + 1e-15).contains(&r)));
        }
    }

    #[test]
    fn truncation_keeps_counts() {
        let f = FMatrix::from_rows(&vec![vec![c(1.0); 3]; 4]).unwrap();
        let r = property_a_check(&f, 0.0).unwrap().truncated(2);
        assert_eq!(r.violations.len(), 2);
        assert_eq!(r.violation_count, 15);
        assert!(!r.holds);
    }
}
