//! `symsector` command-line tool.
//!
//! Every subcommand prints a JSON envelope `{"manifest": …, "result": …}` on
//! stdout (or CSV with `--csv` where offered). Exit codes: 0 success,
//! 1 failed reference assertion or falsified check, 2 usage or input error,
//! 3 size or budget limit exceeded.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use symsector::combinatorics::Composition;
use symsector::io::{read_matrix_file, write_json, MatrixFile, VectorFile};
use symsector::lemma_oracle::{self, property_a_check, REPORT_CAP};
use symsector::linalg::max_abs_diff;
use symsector::optimizer::{
    self, BoundResult, N4d2Form, OptimizerConfig, Refinement, TYPESET_REFERENCE, TYPESET_WINDOW,
};
use symsector::projector::{
    self, symmetric_norm_squared, symmetric_norm_squared_cycles, symmetric_norm_squared_explicit,
};
use symsector::rng::Stream;
use symsector::states::{dicke_state, random_fmatrix, FMatrix};
use symsector::witness_ppt::{self, ppt_sweep_with_tol, witness, witness_value, PSD_TOL};
use symsector::Error;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "symsector",
    version,
    about = "Symmetric-sector bounds, witnesses and PPT checks"
)]
struct Cli {
    /// Worker threads (SYMSECTOR_WORKERS takes precedence).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write the result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Emit one Dicke state, or the whole Dicke basis.
    Dicke(DickeArgs),
    /// Build the symmetric projector both ways and report its invariants.
    Projector(DimsArgs),
    /// Symmetric weight of a product state by three formulas.
    Overlap(OverlapArgs),
    /// Randomized search for matrices with vanishing orbit sums.
    LemmaCheck(LemmaArgs),
    /// Smallest symmetric weight over product states.
    MinBound(MinBoundArgs),
    /// Tr(Wρ) for a density-matrix file.
    WitnessEval(WitnessArgs),
    /// Partial-transpose positivity over all bipartitions.
    PptCheck(PptArgs),
    /// Witness value and PPT status along the Werner family.
    WernerScan(ScanArgs),
    /// Write a Werner state in the matrix file format.
    WernerState(WernerArgs),
}

#[derive(Args, Debug, Serialize)]
struct DimsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct DickeArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Composition such as `1,0,2`.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
}

#[derive(Args, Debug, Serialize)]
struct OverlapArgs {
    /// F-matrix file (`n` rows of `d` entries).
    #[arg(long, conflicts_with = "random")]
    state: Option<PathBuf>,
    /// Draw a random product state instead (needs --n, --d).
    #[arg(long)]
    random: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct LemmaArgs {
    /// Check a single F-matrix file instead of fuzzing.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = lemma_oracle::DEFAULT_ROW_FLOOR)]
    row_floor: f64,
    /// Orbit-sum tolerance for --state (default 1e-12·(max row norm)^n).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct MinBoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Skip Nelder–Mead refinement.
    #[arg(long)]
    grid_only: bool,
    /// Four-qubit reduced closed form (requires --n 4 --d 2).
    #[arg(long)]
    specialized: bool,
    /// With --specialized: use the closed form exactly as typeset in the
    /// literature instead of the corrected one.
    #[arg(long, requires = "specialized")]
    typeset_form: bool,
    /// Compare against the known bound (or the published four-qubit value)
    /// and exit 1 on disagreement.
    #[arg(long)]
    assert_paper: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug, Serialize)]
struct WitnessArgs {
    #[arg(long)]
    state: PathBuf,
    /// Witness offset B; defaults to the known bound for (n, d).
    #[arg(long)]
    bound: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct PptArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = PSD_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    #[arg(long, default_value_t = 0.0)]
    p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug, Serialize)]
struct WernerArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Debug)]
enum Failure {
    Assertion(String),
    Usage(String),
    Limit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Assertion(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Limit(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Assertion(m) | Failure::Usage(m) | Failure::Limit(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } | Error::Size(_) => Failure::Limit(e.to_string()),
            Error::LemmaViolation { .. } => Failure::Assertion(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// What a subcommand produced.
struct Output {
    result: Value,
    /// Replaces the JSON envelope on stdout when `--csv` is given.
    csv: Option<String>,
    /// Written by `--out` instead of the envelope when present.
    artifact: Option<Value>,
    /// Raised after output is written, so reports survive a failed check.
    failure: Option<Failure>,
    seed: Option<u64>,
}

impl Output {
    fn json<T: Serialize>(value: &T) -> Result<Self, Failure> {
        Ok(Self {
            result: to_value(value)?,
            csv: None,
            artifact: None,
            failure: None,
            seed: None,
        })
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| usage(format!("serialization: {e}")))
}

fn read_fmatrix(path: &Path) -> Result<FMatrix, Failure> {
    Ok(read_matrix_file(path)?.to_fmatrix()?)
}

fn dicke(a: &DickeArgs) -> Result<Output, Failure> {
    match &a.k {
        Some(k) => {
            let k = Composition::new(k.clone())?;
            k.expect_shape(a.d, a.n)?;
            let psi = dicke_state(&k)?;
            let state = VectorFile::from_state(&psi);
            let mut out = Output::json(&json!({ "composition": k, "state": state }))?;
            out.artifact = Some(to_value(&state)?);
            Ok(out)
        }
        None => {
            let basis: Vec<Value> = projector::dicke_basis(a.d, a.n)?
                .into_iter()
                .map(|(k, psi)| json!({ "composition": k, "state": VectorFile::from_state(&psi) }))
                .collect();
            Output::json(&json!({ "count": basis.len(), "basis": basis }))
        }
    }
}

fn projector_cmd(a: &DimsArgs) -> Result<Output, Failure> {
    let pi = projector::projector_dicke(a.d, a.n)?;
    let perm = projector::projector_permutation(a.d, a.n)?;
    let result = json!({
        "d": a.d,
        "n": a.n,
        "rank": pi.rank(),
        "defects": pi.defects(),
        "constructions_max_difference": max_abs_diff(pi.matrix(), perm.matrix()),
    });
    let mut out = Output::json(&result)?;
    out.artifact = Some(to_value(&MatrixFile::from_matrix(pi.matrix(), a.d, a.n))?);
    Ok(out)
}

fn overlap(a: &OverlapArgs) -> Result<Output, Failure> {
    let f = match (&a.state, a.random) {
        (Some(path), false) => read_fmatrix(path)?,
        (None, true) => {
            let (n, d) = a.n.zip(a.d).ok_or_else(|| usage("--random needs --n and --d"))?;
            symsector::Limits::default().check(d, n)?;
            random_fmatrix(n, d, &mut Stream::new(a.seed))
        }
        _ => return Err(usage("give exactly one of --state or --random")),
    };
    let pi = projector::projector_dicke(f.d(), f.n())?;
    let orbit = symmetric_norm_squared(&f)?;
    let cycles = symmetric_norm_squared_cycles(&f)?;
    let explicit = symmetric_norm_squared_explicit(&f, &pi)?;
    let spread = (orbit - cycles)
        .abs()
        .max((orbit - explicit).abs())
        .max((cycles - explicit).abs());
    let mut out = Output::json(&json!({
        "n": f.n(),
        "d": f.d(),
        "row_norms": f.row_norms(),
        "orbit_sums": orbit,
        "cycles": cycles,
        "explicit": explicit,
        "max_difference": spread,
        "known_bound": optimizer::known_bound(f.n(), f.d()),
        "fmatrix": MatrixFile::from(f.clone()),
    }))?;
    out.seed = a.random.then_some(a.seed);
    Ok(out)
}

fn lemma_check(a: &LemmaArgs) -> Result<Output, Failure> {
    if let Some(path) = &a.state {
        let f = read_fmatrix(path)?;
        let tol = a.tol.unwrap_or_else(|| lemma_oracle::default_tolerance(&f));
        let report = property_a_check(&f, tol)?.truncated(REPORT_CAP);
        let zero_row = lemma_oracle::has_zero_row(&f, tol);
        let mut out = Output::json(&json!({ "report": report, "zero_row": zero_row }))?;
        // property A without a zero row would contradict the lemma
        if report.holds && zero_row.is_none() {
            out.failure = Some(Failure::Assertion("orbit sums vanish but no row is zero".into()));
        }
        return Ok(out);
    }
    let (n, d) =
        a.n.zip(a.d)
            .ok_or_else(|| usage("fuzzing needs --n and --d (or pass --state)"))?;
    let report = lemma_oracle::lemma_fuzz(n, d, a.trials, a.seed, a.row_floor)?;
    let mut out = Output::json(&report)?;
    out.seed = Some(a.seed);
    Ok(out)
}

fn bound_csv(r: &BoundResult) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n", "d", "objective", "stage", "minimum", "grid_minimum", "evaluations"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend((0..r.coordinates.len()).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(|e| usage(e.to_string()))?;
    let objective = to_value(&r.objective)?.as_str().unwrap_or_default().to_string();
    let stage = to_value(&r.stage)?.as_str().unwrap_or_default().to_string();
    let mut row = vec![
        r.n.to_string(),
        r.d.to_string(),
        objective,
        stage,
        r.minimum.to_string(),
        r.grid_minimum.to_string(),
        r.evaluations.to_string(),
    ];
    row.extend(r.coordinates.iter().map(f64::to_string));
    w.write_record(&row).map_err(|e| usage(e.to_string()))?;
    String::from_utf8(w.into_inner().map_err(|e| usage(e.to_string()))?).map_err(|e| usage(e.to_string()))
}

fn min_bound(a: &MinBoundArgs, workers: Option<usize>) -> Result<Output, Failure> {
    let config = OptimizerConfig {
        grid_points: a.grid,
        restarts: a.restarts,
        tolerance: a.tol,
        refinement: if a.grid_only {
            Refinement::None
        } else {
            Refinement::NelderMead
        },
        workers,
        ..OptimizerConfig::default()
    };
    let r = if a.specialized {
        if (a.n, a.d) != (4, 2) {
            return Err(usage("--specialized applies to --n 4 --d 2 only"));
        }
        let form = if a.typeset_form {
            N4d2Form::AsPrinted
        } else {
            N4d2Form::Corrected
        };
        optimizer::minimize_n4d2(form, &config)?
    } else {
        optimizer::minimize(a.n, a.d, &config)?
    };

    let mut out = Output::json(&r)?;
    if a.csv {
        out.csv = Some(bound_csv(&r)?);
    }
    if a.assert_paper {
        let (target, window) = match (r.known_bound, r.reference) {
            (Some(b), _) => (b, if a.grid_only { 5e-3 } else { 1e-8 }),
            (None, Some(reference)) => (reference, TYPESET_WINDOW),
            (None, None) if (a.n, a.d) == (4, 2) => (TYPESET_REFERENCE, TYPESET_WINDOW),
            _ => return Err(usage(format!("no reference value for n = {}, d = {}", a.n, a.d))),
        };
        if (r.minimum - target).abs() > window {
            out.failure = Some(Failure::Assertion(format!(
                "minimum {} differs from reference {target} by more than {window}",
                r.minimum
            )));
        }
    }
    Ok(out)
}

fn witness_eval(a: &WitnessArgs) -> Result<Output, Failure> {
    let rho = read_matrix_file(&a.state)?.to_density()?;
    let w = witness(rho.d(), rho.n(), a.bound)?;
    let value = witness_value(&w, &rho)?;
    Output::json(&json!({
        "d": rho.d(),
        "n": rho.n(),
        "bound": w.bound,
        "value": value,
        "certifies_entanglement": value < 0.0,
    }))
}

fn ppt_check(a: &PptArgs) -> Result<Output, Failure> {
    let rho = read_matrix_file(&a.state)?.to_density()?;
    Output::json(&ppt_sweep_with_tol(&rho, a.tol)?)
}

fn werner_scan(a: &ScanArgs) -> Result<Output, Failure> {
    let scan = witness_ppt::werner_scan(a.p_min, a.p_max, a.steps, a.d, a.n)?;
    let mut out = Output::json(&scan)?;
    if a.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &scan.rows {
            w.serialize(row).map_err(|e| usage(e.to_string()))?;
        }
        out.csv = Some(
            String::from_utf8(w.into_inner().map_err(|e| usage(e.to_string()))?).map_err(|e| usage(e.to_string()))?,
        );
    }
    Ok(out)
}

fn werner_state(a: &WernerArgs) -> Result<Output, Failure> {
    let rho = witness_ppt::werner_state(a.p, a.d, a.n)?;
    let file = MatrixFile::from(&rho);
    let mut out = Output::json(&json!({ "p": a.p, "d": a.d, "n": a.n, "state": file }))?;
    out.artifact = Some(to_value(&file)?);
    Ok(out)
}

fn workers(cli: &Cli) -> Result<Option<usize>, Failure> {
    let from_env = match std::env::var("SYMSECTOR_WORKERS") {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("SYMSECTOR_WORKERS must be a positive integer, got {v:?}")))?,
        ),
        _ => None,
    };
    match from_env.or(cli.workers) {
        Some(0) => Err(usage("worker count must be at least 1")),
        w => Ok(w),
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let workers = workers(cli)?;
    if let Some(w) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Dicke(a) => dicke(a),
        Command::Projector(a) => projector_cmd(a),
        Command::Overlap(a) => overlap(a),
        Command::LemmaCheck(a) => lemma_check(a),
        Command::MinBound(a) => min_bound(a, workers),
        Command::WitnessEval(a) => witness_eval(a),
        Command::PptCheck(a) => ppt_check(a),
        Command::WernerScan(a) => werner_scan(a),
        Command::WernerState(a) => werner_state(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(&cli);
    let elapsed = start.elapsed().as_secs_f64();

    let out = match outcome {
        Ok(out) => out,
        Err(f) => {
            eprintln!("error: {f}");
            return ExitCode::from(f.code());
        }
    };
    let params = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let command = params.get("command").cloned().unwrap_or(Value::Null);
    let envelope = json!({
        "manifest": {
            "command": command,
            "params": params,
            "seed": out.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "duration_seconds": elapsed,
        },
        "result": out.result,
    });

    if let Some(path) = &cli.out {
        let artifact = out.artifact.as_ref().unwrap_or(&envelope);
        if let Err(e) = write_json(path, artifact) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let text = match &out.csv {
        Some(csv) => csv.clone(),
        None => serde_json::to_string_pretty(&envelope).expect("JSON values serialize") + "\n",
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(2);
    }
    match out.failure {
        Some(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
        None => ExitCode::SUCCESS,
    }
}
