//! Minimization of the symmetric-sector weight over separable pure states.
//!
//! A collective unitary `X^{⊗n}` leaves `Π` invariant, so the first factor can
//! be rotated to `|0⟩`, the second into `span{|0⟩, |1⟩}` with real
//! coefficients, the third into `span{|0⟩, |1⟩, |2⟩}`, and so on. Factor `m`
//! (1-based) is then a hyperspherical unit vector on its first `min(m, d)`
//! basis states. Global phases make the leading coefficient real; while
//! `m ≤ d` a diagonal unitary also makes the newest coefficient real, so
//! factor `m` carries `m − 2` phases (entries `1 … m−2`) for `2 ≤ m ≤ d` and
//! `d − 1` phases otherwise. Parameters are ordered all angles first (factor
//! by factor), then all phases.
//!
//! [`minimize`] runs a dense grid (angles on `[0, π]`, phases on `[0, 2π)`)
//! and refines the best cells with Nelder–Mead. For four qubits the phase of
//! the last factor can be eliminated in closed form; [`objective_n4d2`] and
//! [`minimize_n4d2`] use that reduction.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Limits;
use crate::error::{Error, Result};
use crate::projector::OrbitSumPlan;
use crate::states::FMatrix;
use crate::{CMatrix, Complex64};

/// Published grid minimum for four qubits, `1.3572 / 24`.
pub const TYPESET_REFERENCE: f64 = 1.3572 / 24.0;
/// Agreement window around [`TYPESET_REFERENCE`].
pub const TYPESET_WINDOW: f64 = 5e-4;
/// Most parameters a grid search will take on.
pub const MAX_GRID_DIMENSION: usize = 8;

/// Gauge-fixed parameters of a product state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeParams {
    pub angles: Vec<f64>,
    pub phases: Vec<f64>,
}

impl GaugeParams {
    pub fn zeros(layout: &GaugeLayout) -> Self {
        Self {
            angles: vec![0.0; layout.angle_count()],
            phases: vec![0.0; layout.phase_count()],
        }
    }

    /// Angles then phases.
    pub fn to_vec(&self) -> Vec<f64> {
        self.angles.iter().chain(&self.phases).copied().collect()
    }

    pub fn from_slice(layout: &GaugeLayout, x: &[f64]) -> Result<Self> {
        if x.len() != layout.dimension() {
            return Err(Error::dim(format!(
                "{} parameters, layout needs {}",
                x.len(),
                layout.dimension()
            )));
        }
        let (a, p) = x.split_at(layout.angle_count());
        Ok(Self {
            angles: a.to_vec(),
            phases: p.to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FactorLayout {
    support: usize,
    angle_offset: usize,
    /// Basis entries that carry a free phase.
    phase_entries: Vec<usize>,
    phase_offset: usize,
}

/// Which parameters describe which factor for a given `(n, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeLayout {
    n: usize,
    d: usize,
    factors: Vec<FactorLayout>,
    angles: usize,
    phases: usize,
}

impl GaugeLayout {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid("need n >= 1 and d >= 1"));
        }
        let mut factors = Vec::with_capacity(n);
        let (mut angles, mut phases) = (0, 0);
        for m in 1..=n {
            let support = m.min(d);
            let phase_entries: Vec<usize> = if m <= d {
                (1..m.saturating_sub(1)).collect()
            } else {
                (1..d).collect()
            };
            factors.push(FactorLayout {
                support,
                angle_offset: angles,
                phase_offset: phases,
                phase_entries: phase_entries.clone(),
            });
            angles += support - 1;
            phases += phase_entries.len();
        }
        Ok(Self {
            n,
            d,
            factors,
            angles,
            phases,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn angle_count(&self) -> usize {
        self.angles
    }

    pub fn phase_count(&self) -> usize {
        self.phases
    }

    pub fn dimension(&self) -> usize {
        self.angles + self.phases
    }

    /// Builds the F-matrix; rows are unit vectors by construction.
    pub fn fmatrix(&self, params: &GaugeParams) -> Result<FMatrix> {
        if params.angles.len() != self.angles || params.phases.len() != self.phases {
            return Err(Error::invalid(format!(
                "layout for n = {}, d = {} needs {} angles and {} phases, got {} and {}",
                self.n,
                self.d,
                self.angles,
                self.phases,
                params.angles.len(),
                params.phases.len()
            )));
        }
        let mut m = CMatrix::zeros(self.n, self.d);
        for (row, f) in self.factors.iter().enumerate() {
            let angles = &params.angles[f.angle_offset..f.angle_offset + f.support - 1];
            let mut tail = 1.0;
            for j in 0..f.support {
                let mag = if j + 1 < f.support {
                    tail * angles[j].cos()
                } else {
                    tail
                };
                if j + 1 < f.support {
                    tail *= angles[j].sin();
                }
                m[(row, j)] = Complex64::new(mag, 0.0);
            }
            for (i, &j) in f.phase_entries.iter().enumerate() {
                m[(row, j)] *= Complex64::from_polar(1.0, params.phases[f.phase_offset + i]);
            }
        }
        FMatrix::new(m)
    }
}

/// F-matrix of the gauge-fixed product state.
pub fn gauge_fixed_fmatrix(params: &GaugeParams, n: usize, d: usize) -> Result<FMatrix> {
    GaugeLayout::new(n, d)?.fmatrix(params)
}

/// `‖ψ‖²_SS` as a function of gauge parameters, with the orbit-sum plan
/// built once.
#[derive(Debug, Clone)]
pub struct GenericObjective {
    layout: GaugeLayout,
    plan: OrbitSumPlan,
}

impl GenericObjective {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Ok(Self {
            layout: GaugeLayout::new(n, d)?,
            plan: OrbitSumPlan::new(d, n)?,
        })
    }

    pub fn layout(&self) -> &GaugeLayout {
        &self.layout
    }

    pub fn eval_params(&self, params: &GaugeParams) -> Result<f64> {
        Ok(self.plan.symmetric_norm_squared(&self.layout.fmatrix(params)?))
    }

    /// Angles then phases, as a flat slice.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let p = GaugeParams::from_slice(&self.layout, x).expect("caller passes layout-sized slices");
        self.eval_params(&p).expect("layout-sized parameters")
    }
}

/// `symmetric_norm_squared(gauge_fixed_fmatrix(params))`.
pub fn objective(params: &GaugeParams, n: usize, d: usize) -> Result<f64> {
    GenericObjective::new(n, d)?.eval_params(params)
}

/// Which closed form to use for the reduced four-qubit objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum N4d2Form {
    /// `R = 6 − 2(x+y+z) + 4(xy+xz+yz) + 12xyz`, which matches `⟨ψ|Π|ψ⟩`.
    Corrected,
    /// `R = 4 − x − y − z + 3(xy+xz+yz) + 13xyz` as originally typeset.
    AsPrinted,
}

/// Coefficients of the phase-dependent part `a cos α₃ + b cos α₄ + c cos(α₃ − α₄)`.
fn n4d2_abc(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let sx = (x - x * x).max(0.0);
    let sy = (y - y * y).max(0.0);
    let sz = (z - z * z).max(0.0);
    (
        4.0 * (2.0 + z) * (sx * sy).sqrt(),
        4.0 * (2.0 + y) * (sx * sz).sqrt(),
        4.0 * (2.0 + x) * (sy * sz).sqrt(),
    )
}

/// Unchecked reduced objective, already divided by `4! = 24`.
pub fn n4d2_value(x: f64, y: f64, z: f64, w: f64, form: N4d2Form) -> f64 {
    let r = match form {
        N4d2Form::Corrected => 6.0 - 2.0 * (x + y + z) + 4.0 * (x * y + x * z + y * z) + 12.0 * x * y * z,
        N4d2Form::AsPrinted => 4.0 - x - y - z + 3.0 * (x * y + x * z + y * z) + 13.0 * x * y * z,
    };
    let (a, b, c) = n4d2_abc(x, y, z);
    let cw = (TAU * w).cos();
    (r + a * cw - (b * b + c * c + 2.0 * b * c * cw).max(0.0).sqrt()) / 24.0
}

fn check_unit_box(v: &[f64]) -> Result<()> {
    if v.iter().all(|t| (0.0..=1.0).contains(t)) {
        Ok(())
    } else {
        Err(Error::invalid(format!("coordinates {v:?} leave the unit box")))
    }
}

/// Four-qubit weight with the last phase minimized out, in the coordinates
/// `x = cos²θ₂`, `y = cos²θ₃`, `z = cos²θ₄`, `w = α₃ / 2π`.
pub fn objective_n4d2(x: f64, y: f64, z: f64, w: f64) -> Result<f64> {
    check_unit_box(&[x, y, z, w])?;
    Ok(n4d2_value(x, y, z, w, N4d2Form::Corrected))
}

/// The published closed form exactly as typeset (divided by 24).
pub fn typeset_objective(x: f64, y: f64, z: f64, w: f64) -> Result<f64> {
    check_unit_box(&[x, y, z, w])?;
    Ok(n4d2_value(x, y, z, w, N4d2Form::AsPrinted))
}

/// Gauge parameters `(θ₂, θ₃, θ₄; α₃, α₄)` for reduced coordinates, with
/// `α₄` set to its minimizing value.
pub fn n4d2_gauge_params(x: f64, y: f64, z: f64, w: f64) -> GaugeParams {
    let theta = |t: f64| t.clamp(0.0, 1.0).sqrt().acos();
    let (_, b, c) = n4d2_abc(x, y, z);
    let alpha3 = TAU * w;
    // b cos α₄ + c cos(α₃ − α₄) = Re[e^{iα₄} (b + c e^{−iα₃})]
    let lead = Complex64::new(b, 0.0) + Complex64::from_polar(c, -alpha3);
    let alpha4 = (PI - lead.arg()).rem_euclid(TAU);
    GaugeParams {
        angles: vec![theta(x), theta(y), theta(z)],
        phases: vec![alpha3, alpha4],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    None,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Points per grid axis.
    pub grid_points: usize,
    pub refinement: Refinement,
    /// Local searches started from the best grid cells.
    pub restarts: usize,
    /// Simplex value spread at which Nelder–Mead stops.
    pub tolerance: f64,
    /// Simplex diameter at which Nelder–Mead stops.
    pub x_tolerance: f64,
    pub max_iterations: usize,
    /// Largest grid accepted.
    pub grid_budget: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points: 41,
            refinement: Refinement::NelderMead,
            restarts: 8,
            tolerance: 1e-10,
            x_tolerance: 1e-12,
            max_iterations: 2000,
            grid_budget: 20_000_000,
            workers: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points must be at least 2"));
        }
        if self.restarts < 1 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if [self.tolerance, self.x_tolerance]
            .iter()
            .any(|t| t.is_nan() || *t < 0.0)
        {
            return Err(Error::invalid("tolerances must be non-negative"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Grid,
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Generic,
    N4d2Corrected,
    N4d2AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub n: usize,
    pub d: usize,
    pub objective: ObjectiveKind,
    pub minimum: f64,
    pub argmin: GaugeParams,
    /// Optimizer coordinates of the minimizer (gauge parameters for the
    /// generic objective, `(x, y, z, w)` for the reduced four-qubit one).
    pub coordinates: Vec<f64>,
    pub grid_minimum: f64,
    pub grid_coordinates: Vec<f64>,
    pub evaluations: u64,
    pub stage: Stage,
    pub grid_step: f64,
    pub known_bound: Option<f64>,
    /// Published reference value when one exists for `(n, d)`.
    pub reference: Option<f64>,
    /// Set when the result falls more than [`TYPESET_WINDOW`] below the
    /// reference.
    pub below_reference: bool,
    /// Set when the result is more than [`TYPESET_WINDOW`] away from the
    /// reference in either direction.
    pub deviates_from_reference: bool,
}

/// Sharp bounds established in closed form: `1/2` for two particles, `1/4`
/// for three qubits, `1/6` for three qudits with `d ≥ 3`.
pub fn known_bound(n: usize, d: usize) -> Option<f64> {
    match (n, d) {
        (2, _) => Some(0.5),
        (3, 2) => Some(0.25),
        (3, d) if d >= 3 => Some(1.0 / 6.0),
        _ => None,
    }
}

/// One axis of the search grid.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    step: f64,
}

fn axis(lo: f64, hi: f64, points: usize, closed: bool) -> Axis {
    let intervals = if closed { points - 1 } else { points };
    Axis {
        lo,
        step: (hi - lo) / intervals as f64,
    }
}

/// Best `k` grid cells by `(value, index)`.
#[derive(Debug, Clone, Default)]
struct TopK {
    k: usize,
    items: Vec<(f64, u64)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn less(a: &(f64, u64), b: &(f64, u64)) -> bool {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).is_lt()
    }

    fn push(mut self, item: (f64, u64)) -> Self {
        if self.items.len() == self.k && !Self::less(&item, self.items.last().unwrap()) {
            return self;
        }
        let pos = self.items.partition_point(|x| Self::less(x, &item));
        self.items.insert(pos, item);
        self.items.truncate(self.k);
        self
    }

    fn merge(self, other: Self) -> Self {
        other.items.into_iter().fold(self, TopK::push)
    }
}

struct SearchSpace {
    axes: Vec<Axis>,
    points: usize,
}

impl SearchSpace {
    fn cardinality(&self) -> Option<u64> {
        (self.points as u64).checked_pow(self.axes.len() as u32)
    }

    /// First axis most significant.
    fn point(&self, mut index: u64) -> Vec<f64> {
        let mut x = vec![0.0; self.axes.len()];
        for (slot, a) in x.iter_mut().zip(&self.axes).rev() {
            let i = index % self.points as u64;
            index /= self.points as u64;
            *slot = a.lo + a.step * i as f64;
        }
        x
    }
}

struct SearchOutcome {
    grid_best: (f64, Vec<f64>),
    best: (f64, Vec<f64>),
    evaluations: u64,
    stage: Stage,
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn grid_then_refine<F>(space: &SearchSpace, config: &OptimizerConfig, f: F) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let total = space
        .cardinality()
        .filter(|&t| t <= config.grid_budget)
        .ok_or(Error::Budget {
            requested: (space.points as u128).saturating_pow(space.axes.len() as u32),
            budget: config.grid_budget as u128,
        })?;

    let top = (0..total)
        .into_par_iter()
        .fold(
            || TopK::new(config.restarts),
            |acc, i| acc.push((f(&space.point(i)), i)),
        )
        .reduce(|| TopK::new(config.restarts), TopK::merge);

    let (grid_value, grid_index) = top.items[0];
    let grid_best = (grid_value, space.point(grid_index));
    let mut evaluations = total;

    if config.refinement == Refinement::None || space.axes.is_empty() {
        return Ok(SearchOutcome {
            best: grid_best.clone(),
            grid_best,
            evaluations,
            stage: Stage::Grid,
        });
    }

    let steps: Vec<f64> = space.axes.iter().map(|a| a.step).collect();
    let opts = NelderMeadOptions {
        f_tolerance: config.tolerance,
        x_tolerance: config.x_tolerance,
        max_iterations: config.max_iterations,
    };
    let runs: Vec<NelderMeadResult> = top
        .items
        .par_iter()
        .map(|&(_, idx)| nelder_mead(&f, &space.point(idx), &steps, &opts))
        .collect();
    evaluations += runs.iter().map(|r| r.evaluations).sum::<u64>();
    // `runs` follow grid order, so min_by keeps the earliest of equal values
    let best_run = runs
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one restart");
    let best = if best_run.value <= grid_best.0 {
        (best_run.value, best_run.x)
    } else {
        grid_best.clone()
    };
    Ok(SearchOutcome {
        grid_best,
        best,
        evaluations,
        stage: Stage::Refined,
    })
}

/// Grid search plus Nelder–Mead over gauge-fixed product states.
pub fn minimize(n: usize, d: usize, config: &OptimizerConfig) -> Result<BoundResult> {
    config.validate()?;
    Limits::default().check(d, n)?;
    let obj = GenericObjective::new(n, d)?;
    let layout = obj.layout().clone();
    if layout.dimension() > MAX_GRID_DIMENSION {
        return Err(Error::size(format!(
            "{} gauge parameters exceed the grid limit of {MAX_GRID_DIMENSION}",
            layout.dimension()
        )));
    }
    let g = config.grid_points;
    let mut axes = vec![axis(0.0, PI, g, true); layout.angle_count()];
    axes.extend(std::iter::repeat_n(axis(0.0, TAU, g, false), layout.phase_count()));
    let space = SearchSpace { axes, points: g };

    let outcome = with_workers(config.workers, || grid_then_refine(&space, config, |x| obj.eval(x)))??;
    let argmin = GaugeParams::from_slice(&layout, &outcome.best.1)?;
    Ok(BoundResult {
        n,
        d,
        objective: ObjectiveKind::Generic,
        minimum: outcome.best.0,
        argmin,
        coordinates: outcome.best.1,
        grid_minimum: outcome.grid_best.0,
        grid_coordinates: outcome.grid_best.1,
        evaluations: outcome.evaluations,
        stage: outcome.stage,
        grid_step: PI / (g - 1) as f64,
        known_bound: known_bound(n, d),
        reference: None,
        below_reference: false,
        deviates_from_reference: false,
    })
}

/// Four-qubit search over `(x, y, z, w) ∈ [0, 1]^4` using the reduced
/// closed form; the minimizer is reported both in reduced coordinates and
/// as full gauge parameters.
pub fn minimize_n4d2(form: N4d2Form, config: &OptimizerConfig) -> Result<BoundResult> {
    config.validate()?;
    let g = config.grid_points;
    let space = SearchSpace {
        axes: vec![axis(0.0, 1.0, g, true); 4],
        points: g,
    };
    let f = move |v: &[f64]| {
        let c: Vec<f64> = v.iter().map(|t| t.clamp(0.0, 1.0)).collect();
        n4d2_value(c[0], c[1], c[2], c[3], form)
    };
    let outcome = with_workers(config.workers, || grid_then_refine(&space, config, f))??;
    let coords: Vec<f64> = outcome.best.1.iter().map(|t| t.clamp(0.0, 1.0)).collect();
    let minimum = outcome.best.0;
    let deviation = minimum - TYPESET_REFERENCE;
    Ok(BoundResult {
        n: 4,
        d: 2,
        objective: match form {
            N4d2Form::Corrected => ObjectiveKind::N4d2Corrected,
            N4d2Form::AsPrinted => ObjectiveKind::N4d2AsPrinted,
        },
        minimum,
        argmin: n4d2_gauge_params(coords[0], coords[1], coords[2], coords[3]),
        coordinates: coords,
        grid_minimum: outcome.grid_best.0,
        grid_coordinates: outcome.grid_best.1,
        evaluations: outcome.evaluations,
        stage: outcome.stage,
        grid_step: 1.0 / (g - 1) as f64,
        known_bound: known_bound(4, 2),
        reference: Some(TYPESET_REFERENCE),
        below_reference: deviation < -TYPESET_WINDOW,
        deviates_from_reference: deviation.abs() > TYPESET_WINDOW,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub f_tolerance: f64,
    pub x_tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: u64,
    pub converged: bool,
}

/// Downhill simplex with standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). The initial simplex offsets `x0` by
/// `steps[i]` along each axis. Stops when the spread of simplex values is at
/// most `f_tolerance` and the simplex diameter is at most `x_tolerance`, or
/// when either drops to zero, or after `max_iterations`; a converged run is
/// restarted once around its best vertex to guard against a collapsed
/// simplex.
pub fn nelder_mead<F>(f: &F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut evaluations = 0;
    let mut iterations = 0;
    let mut start = x0.to_vec();
    let mut scale: Vec<f64> = steps.to_vec();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = false;
    for _attempt in 0..3 {
        let run = simplex_run(f, &start, &scale, opts, opts.max_iterations.saturating_sub(iterations));
        evaluations += run.evaluations;
        iterations += run.iterations;
        converged = run.converged;
        let improved = best.as_ref().is_none_or(|(_, v)| run.value < *v);
        let stalled = best.as_ref().is_some_and(|(_, v)| v - run.value <= opts.f_tolerance);
        if improved {
            best = Some((run.x.clone(), run.value));
        }
        if !run.converged || stalled || iterations >= opts.max_iterations {
            break;
        }
        start = run.x;
        scale = scale.iter().map(|s| s * 1e-2).collect();
    }
    let (x, value) = best.expect("at least one run");
    NelderMeadResult {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}

fn simplex_run<F>(f: &F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions, budget: usize) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let dim = x0.len();
    let mut evaluations: u64 = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += if steps[i] != 0.0 { steps[i] } else { 1e-3 };
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < budget {
        let spread = simplex[dim].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if (spread <= opts.f_tolerance && diameter <= opts.x_tolerance.max(1e-6))
            || diameter <= opts.x_tolerance
            || spread == 0.0
        {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    *fv = eval(v);
                }
            }
        }
        order(&mut simplex);
    }
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}

/// Outcome of the constrained two-variable sub-problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubcaseResult {
    pub minimum: f64,
    pub x: f64,
    pub y: f64,
}

/// `(1/3)((x + y)² + 1 − x − y)`.
pub fn subcase_objective(x: f64, y: f64) -> f64 {
    ((x + y).powi(2) + 1.0 - x - y) / 3.0
}

/// `0 ≤ x, y ≤ 1` and `3xy ≥ 1 − x − y`.
pub fn subcase_feasible(x: f64, y: f64) -> bool {
    (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) && 3.0 * x * y >= 1.0 - x - y - 1e-15
}

/// Minimizes [`subcase_objective`] over the feasible set.
///
/// A dense feasible grid locates the basin; the minimum is then refined on
/// each boundary piece (`x = 1`, `y = 1`, and the curve
/// `y = (1 − x)/(3x + 1)`) by golden-section search, and the best feasible
/// candidate wins. Interior points only enter through the grid since the
/// objective has no stationary point in the feasible set.
pub fn constrained_subcase_check() -> SubcaseResult {
    let mut best = SubcaseResult {
        minimum: f64::INFINITY,
        x: f64::NAN,
        y: f64::NAN,
    };
    let mut consider = |x: f64, y: f64| {
        if subcase_feasible(x, y) {
            let v = subcase_objective(x, y);
            if v < best.minimum {
                best = SubcaseResult { minimum: v, x, y };
            }
        }
    };
    let g = 401;
    for i in 0..g {
        for j in 0..g {
            consider(i as f64 / (g - 1) as f64, j as f64 / (g - 1) as f64);
        }
    }
    let curve = |x: f64| (1.0 - x) / (3.0 * x + 1.0);
    let (x, _) = golden_section(|x| subcase_objective(x, curve(x)), 0.0, 1.0, 1e-12);
    consider(x, curve(x));
    let (y, _) = golden_section(|y| subcase_objective(1.0, y), 0.0, 1.0, 1e-12);
    consider(1.0, y);
    let (x, _) = golden_section(|x| subcase_objective(x, 1.0), 0.0, 1.0, 1e-12);
    consider(x, 1.0);
    best
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::symmetric_norm_squared;
    use crate::rng::Stream;
    use std::f64::consts::FRAC_PI_3;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn layouts() {
        let l = GaugeLayout::new(3, 2).unwrap();
        assert_eq!((l.angle_count(), l.phase_count()), (2, 1));
        let l = GaugeLayout::new(3, 3).unwrap();
        assert_eq!((l.angle_count(), l.phase_count()), (3, 1));
        let l = GaugeLayout::new(4, 2).unwrap();
        assert_eq!((l.angle_count(), l.phase_count()), (3, 2));
        let l = GaugeLayout::new(2, 5).unwrap();
        assert_eq!(l.dimension(), 1);
        assert_eq!(GaugeLayout::new(4, 1).unwrap().dimension(), 0);
    }

    #[test]
    fn three_qubit_matrix_shape() {
        let (t, e, a) = (0.4, 1.3, 2.2);
        let p = GaugeParams {
            angles: vec![t, e],
            phases: vec![a],
        };
        let f = gauge_fixed_fmatrix(&p, 3, 2).unwrap();
        let expected = FMatrix::from_rows(&[
            vec![c(1.0), c(0.0)],
            vec![c(t.cos()), c(t.sin())],
            vec![c(e.cos()), Complex64::from_polar(e.sin(), a)],
        ])
        .unwrap();
        assert!((f.entries() - expected.entries()).norm() < 1e-15);
    }

    #[test]
    fn three_qutrit_matrix_shape() {
        let (t, e, g, r) = (0.4, 1.3, 0.8, 2.2);
        let p = GaugeParams {
            angles: vec![t, e, g],
            phases: vec![r],
        };
        let f = gauge_fixed_fmatrix(&p, 3, 3).unwrap();
        let expected = FMatrix::from_rows(&[
            vec![c(1.0), c(0.0), c(0.0)],
            vec![c(t.cos()), c(t.sin()), c(0.0)],
            vec![
                c(e.cos()),
                Complex64::from_polar(e.sin() * g.cos(), r),
                c(e.sin() * g.sin()),
            ],
        ])
        .unwrap();
        assert!((f.entries() - expected.entries()).norm() < 1e-15);
        f.check_unit_rows().unwrap();
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let p = GaugeParams {
            angles: vec![0.1],
            phases: vec![],
        };
        assert!(gauge_fixed_fmatrix(&p, 3, 2).is_err());
    }

    #[test]
    fn objective_examples() {
        let p = GaugeParams {
            angles: vec![2.0 * PI / 3.0, FRAC_PI_3],
            phases: vec![0.0],
        };
        assert!((objective(&p, 3, 2).unwrap() - 0.25).abs() < 1e-15);
        let p = GaugeParams {
            angles: vec![PI / 2.0],
            phases: vec![],
        };
        assert!((objective(&p, 2, 2).unwrap() - 0.5).abs() < 1e-15);
        for (n, d) in [(2, 3), (3, 3), (4, 2)] {
            let l = GaugeLayout::new(n, d).unwrap();
            assert!((objective(&GaugeParams::zeros(&l), n, d).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn printed_closed_form_examples() {
        assert!((typeset_objective(0.0, 0.0, 0.0, 0.0).unwrap() - 4.0 / 24.0).abs() < 1e-15);
        assert!((typeset_objective(1.0, 1.0, 1.0, 0.3).unwrap() - 23.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn corrected_closed_form_endpoints() {
        // |0111⟩ has weight 1/4, the all-|0⟩ state weight 1
        assert!((objective_n4d2(0.0, 0.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((objective_n4d2(1.0, 1.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(objective_n4d2(1.2, 0.0, 0.0, 0.0).is_err());
        assert!(typeset_objective(0.0, -0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn reduced_params_reproduce_reduced_value() {
        let obj = GenericObjective::new(4, 2).unwrap();
        let mut rng = Stream::new(21);
        for _ in 0..200 {
            let v: Vec<f64> = (0..4).map(|_| rng.uniform()).collect();
            let p = n4d2_gauge_params(v[0], v[1], v[2], v[3]);
            let generic = obj.eval_params(&p).unwrap();
            let reduced = objective_n4d2(v[0], v[1], v[2], v[3]).unwrap();
            assert!((generic - reduced).abs() < 1e-12, "{v:?}: {generic} vs {reduced}");
        }
    }

    #[test]
    fn known_bounds() {
        assert_eq!(known_bound(2, 5), Some(0.5));
        assert_eq!(known_bound(3, 2), Some(0.25));
        assert_eq!(known_bound(3, 7), Some(1.0 / 6.0));
        assert_eq!(known_bound(4, 2), None);
        assert_eq!(known_bound(3, 1), None);
    }

    #[test]
    fn nelder_mead_on_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            f_tolerance: 1e-20,
            x_tolerance: 1e-12,
            max_iterations: 5000,
        };
        let r = nelder_mead(&rosen, &[-1.2, 1.0], &[0.1, 0.1], &opts);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
        assert!(r.value < 1e-12);
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, v) = golden_section(|x| (x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn topk_is_order_independent() {
        let items = [(0.5, 3), (0.1, 9), (0.1, 2), (0.7, 1), (0.2, 5)];
        let forward = items.iter().fold(TopK::new(3), |t, &i| t.push(i));
        let backward = items.iter().rev().fold(TopK::new(3), |t, &i| t.push(i));
        assert_eq!(forward.items, vec![(0.1, 2), (0.1, 9), (0.2, 5)]);
        assert_eq!(forward.items, backward.items);
    }

    #[test]
    fn two_qubit_minimum() {
        let r = minimize(2, 2, &OptimizerConfig::default()).unwrap();
        assert!((r.minimum - 0.5).abs() < 1e-9);
        assert!(r.minimum <= r.grid_minimum + 1e-15);
        assert_eq!(r.stage, Stage::Refined);
    }

    #[test]
    fn grid_only_mode_and_budget() {
        let cfg = OptimizerConfig {
            refinement: Refinement::None,
            grid_points: 21,
            ..Default::default()
        };
        let r = minimize(3, 2, &cfg).unwrap();
        assert_eq!(r.stage, Stage::Grid);
        assert_eq!(r.minimum, r.grid_minimum);
        assert_eq!(r.evaluations, 21u64.pow(3));

        let tight = OptimizerConfig {
            grid_budget: 1000,
            ..Default::default()
        };
        assert!(matches!(minimize(3, 3, &tight), Err(Error::Budget { .. })));
        assert!(minimize(
            3,
            2,
            &OptimizerConfig {
                grid_points: 1,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn trivial_dimension_returns_one() {
        let r = minimize(3, 1, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.minimum, 1.0);
    }

    #[test]
    fn minimize_is_deterministic_across_worker_counts() {
        let base = OptimizerConfig {
            grid_points: 17,
            restarts: 3,
            ..Default::default()
        };
        let one = minimize(
            3,
            2,
            &OptimizerConfig {
                workers: Some(1),
                ..base.clone()
            },
        )
        .unwrap();
        let four = minimize(
            3,
            2,
            &OptimizerConfig {
                workers: Some(4),
                ..base
            },
        )
        .unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn subcase_boundary_values() {
        assert!((subcase_objective(1.0, 0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(subcase_feasible(1.0, 0.0));
        // the unconstrained stationary line x + y = 1/2 is infeasible
        for i in 0..=100 {
            let x = 0.5 * i as f64 / 100.0;
            assert!(!subcase_feasible(x, 0.5 - x));
        }
        let r = constrained_subcase_check();
        assert!((r.minimum - 7.0 / 27.0).abs() < 1e-9);
        assert!((r.x - 1.0 / 3.0).abs() < 1e-4 && (r.y - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn grid_values_respect_bounds() {
        let obj = GenericObjective::new(3, 2).unwrap();
        let mut rng = Stream::new(30);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..3).map(|_| rng.uniform_in(0.0, TAU)).collect();
            let v = obj.eval(&x);
            assert!((0.25 - 1e-9..=1.0 + 1e-12).contains(&v));
        }
        let f = gauge_fixed_fmatrix(
            &GaugeParams {
                angles: vec![1.0, 2.0],
                phases: vec![0.5],
            },
            3,
            2,
        )
        .unwrap();
        assert!((symmetric_norm_squared(&f).unwrap() - obj.eval(&[1.0, 2.0, 0.5])).abs() < 1e-15);
    }
}
