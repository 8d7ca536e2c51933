use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qbar_core::exact::Q;
use qbar_core::p1::{
    endomorphism_dimension, expected_dimension, is_stable, scan_existence, QBarBundleP1,
    ScanConfig, SlopeParams,
};
use qbar_core::point_rep::{moment_complex, moment_real, Convention, PointRep, StabilityParams};
use qbar_core::quiver::{rep_space_dimension, Quiver};
use qbar_core::solver::{kempf_ness_flow, project_complex, tangent_dimension, SolverConfig};
use qbar_core::spec_io::{
    cmat_json, parse_spec, point_json, CMatJson, Scalar, SolveJson, SpecFile, StabilityJson,
};
use qbar_core::torus::{check_nilpotent, find_weights, TorusData, TorusMode, WeightAssignment};
use qbar_core::Error;

mod reproduce;

#[derive(Parser)]
#[command(
    name = "qbar",
    version,
    about = "Moment maps, stability and fixed points for double-quiver data"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check a spec file against the schema and the quiver rules.
    Validate(Input),
    /// Moment map values at the spec's point, or at a seeded random point.
    Moment(Input),
    /// Run the descent flow to a zero of the moment map.
    Solve(Input),
    /// Stability verdict for the bundle data in the spec.
    Stability(Input),
    /// Sample random data over every splitting and count stable outcomes.
    Scan(Input),
    /// Torus weights that fix the spec's data.
    FixedPoints(Input),
    /// Dimension counts for the spec.
    Dimension(Input),
    /// Run the worked examples end to end.
    Reproduce(Opts),
}

#[derive(Args)]
struct Input {
    input: PathBuf,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone)]
struct Opts {
    /// Comma-separated per-vertex values; integers, `p/q` or decimals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sigma: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Degree bound for sub-objects, or weight bound for fixed points.
    #[arg(long, allow_hyphen_values = true)]
    bound: Option<i64>,
    #[arg(long, value_enum, default_value_t = Mode::Circle)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Conv::Commutator)]
    convention: Conv,
    #[arg(long)]
    json: bool,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Samples per splitting for `scan`.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Summand degree range `lo,hi` for `scan`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-3, 3])]
    range: Vec<i64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Circle,
    Torus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conv {
    Commutator,
    Literal,
}

impl Mode {
    fn core(self) -> TorusMode {
        match self {
            Mode::Circle => TorusMode::Circle,
            Mode::Torus => TorusMode::Torus,
        }
    }
}

impl Conv {
    fn core(self) -> Convention {
        match self {
            Conv::Commutator => Convention::Commutator,
            Conv::Literal => Convention::Literal,
        }
    }
}

pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconsistent { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn emit<T: Serialize>(o: &Opts, report: &T, text: impl FnOnce() -> String) {
    let out = if o.json {
        serde_json::to_string_pretty(report).expect("reports serialize") + "\n"
    } else {
        text()
    };
    // A closed pipe is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn load(path: &PathBuf) -> Result<(SpecFile, Quiver), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))?;
    let spec = parse_spec(&text)?;
    let q = spec.quiver()?;
    // Unused parts are still checked.
    spec.split_bundle(&q)?;
    spec.point_rep(&q)?;
    Ok((spec, q))
}

fn scalars(v: &Option<Vec<String>>) -> Option<Vec<Scalar>> {
    v.as_ref().map(|s| {
        s.iter()
            .map(|x| Scalar::Text(x.trim().to_string()))
            .collect()
    })
}

fn tau_scalars(o: &Opts, spec: &SpecFile) -> Option<Vec<Scalar>> {
    scalars(&o.tau).or_else(|| spec.tau.clone())
}

fn sigma_scalars(o: &Opts, spec: &SpecFile) -> Option<Vec<Scalar>> {
    scalars(&o.sigma).or_else(|| spec.sigma.clone())
}

fn to_q(v: &[Scalar]) -> Result<Vec<Q>, Failure> {
    v.iter().map(|s| s.to_q().map_err(Failure::from)).collect()
}

fn to_f64(v: &[Scalar]) -> Result<Vec<f64>, Failure> {
    v.iter()
        .map(|s| s.to_f64().map_err(Failure::from))
        .collect()
}

fn stability_params(o: &Opts, spec: &SpecFile) -> Result<StabilityParams, Failure> {
    let n = spec.vertices.len();
    let sigma = match sigma_scalars(o, spec) {
        Some(s) => to_f64(&s)?,
        None => vec![1.0; n],
    };
    let tau = match tau_scalars(o, spec) {
        Some(t) => to_f64(&t)?,
        None => {
            let l = &spec.label;
            let num: f64 = sigma
                .iter()
                .zip(&l.degree)
                .map(|(s, &d)| s * d as f64)
                .sum();
            vec![-num / l.total_rank() as f64; n]
        }
    };
    Ok(StabilityParams::new(sigma, tau)?)
}

fn slope_params(o: &Opts, spec: &SpecFile, bb: &QBarBundleP1) -> Result<SlopeParams, Failure> {
    let n = spec.vertices.len();
    let sigma = match sigma_scalars(o, spec) {
        Some(s) => to_q(&s)?,
        None => vec![Q::from_integer(1.into()); n],
    };
    Ok(match tau_scalars(o, spec) {
        Some(t) => SlopeParams::new(sigma, to_q(&t)?)?,
        None => SlopeParams::normalized(bb.bundle(), sigma)?,
    })
}

fn point_or_random(spec: &SpecFile, q: &Quiver, seed: u64) -> Result<PointRep, Failure> {
    match spec.point_rep(q)? {
        Some(p) => Ok(p),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(PointRep::random(q, &spec.label, &mut rng)?)
        }
    }
}

fn require_bundle(spec: &SpecFile, q: &Quiver) -> Result<QBarBundleP1, Failure> {
    spec.bundle(q)?
        .ok_or_else(|| fail(2, "this verb needs a `splitting` in the spec"))
}

#[derive(Serialize)]
struct ValidateJson {
    valid: bool,
    issues: Vec<String>,
}

fn validate(inp: &Input) -> Outcome {
    let text = std::fs::read_to_string(&inp.input)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", inp.input.display())))?;
    let mut issues = Vec::new();
    match parse_spec(&text) {
        Err(e) => issues.push(e.to_string()),
        Ok(spec) => {
            issues.extend(spec.issues().iter().map(|i| i.to_string()));
            if issues.is_empty() {
                let q = spec.quiver()?;
                if let Err(e) = spec.point_rep(&q) {
                    issues.push(e.to_string());
                }
                match spec.bundle(&q) {
                    Err(Error::Inconsistent { vertex, detail }) => {
                        let r = ValidateJson {
                            valid: false,
                            issues: vec![format!("inconsistent at `{vertex}`: {detail}")],
                        };
                        emit(&inp.opts, &r, || format!("invalid: {}\n", r.issues[0]));
                        return Ok(4);
                    }
                    Err(e) => issues.push(e.to_string()),
                    Ok(_) => {}
                }
            }
        }
    }
    let r = ValidateJson {
        valid: issues.is_empty(),
        issues,
    };
    emit(&inp.opts, &r, || {
        if r.valid {
            "valid\n".to_string()
        } else {
            r.issues.iter().map(|i| format!("invalid: {i}\n")).collect()
        }
    });
    Ok(if r.valid { 0 } else { 2 })
}

#[derive(Serialize)]
struct MomentJson {
    convention: &'static str,
    real: Vec<CMatJson>,
    complex: Vec<CMatJson>,
    complex_trace_sum: [f64; 2],
}

fn moment(inp: &Input) -> Outcome {
    let (spec, q) = load(&inp.input)?;
    let p = point_or_random(&spec, &q, inp.opts.seed)?;
    let conv = inp.opts.convention.core();
    let mr = moment_real(&q, &p, conv);
    let mc = moment_complex(&q, &p);
    let tr: num_complex::Complex64 = mc.iter().map(|m| m.trace()).sum();
    let r = MomentJson {
        convention: conv.name(),
        real: mr.iter().map(cmat_json).collect(),
        complex: mc.iter().map(cmat_json).collect(),
        complex_trace_sum: [tr.re, tr.im],
    };
    emit(&inp.opts, &r, || {
        let mut s = format!("convention: {}\n", conv.name());
        for (v, name) in q.vertices().iter().enumerate() {
            s += &format!(
                "vertex {name}: |mu_R| = {:.6e}, |mu_C| = {:.6e}\n",
                mr[v].norm(),
                mc[v].norm()
            );
        }
        s + &format!("sum of tr mu_C: {:.3e}\n", tr.norm())
    });
    Ok(0)
}

fn solve(inp: &Input) -> Outcome {
    let o = &inp.opts;
    let (spec, q) = load(&inp.input)?;
    let sp = stability_params(o, &spec)?;
    let cfg = SolverConfig {
        max_iterations: o.max_iter,
        tolerance_mu: o.tol,
        rng_seed: o.seed,
        convention: o.convention.core(),
        ..SolverConfig::default()
    };
    let start = point_or_random(&spec, &q, o.seed)?;
    let proj = project_complex(&q, &start, &cfg)?;
    let s = kempf_ness_flow(&q, &proj.point, &sp, &cfg)?;
    let td = if s.converged {
        Some(tangent_dimension(&s, &q, &spec.label, &cfg)?)
    } else {
        None
    };
    let r = SolveJson {
        converged: s.converged,
        residual_real: s.residual_real,
        residual_complex: s.residual_complex,
        iterations: s.iterations,
        dimension: td.as_ref().map(|t| t.dimension),
        warnings: td.as_ref().map(|t| t.warnings.clone()).unwrap_or_default(),
        tau: sp.tau.clone(),
        convention: cfg.convention.name().to_string(),
        point: point_json(&s.point),
    };
    emit(o, &r, || {
        let mut t = format!(
            "convention: {}\nconverged: {}\niterations: {}\nresidual_real: {:.3e}\nresidual_complex: {:.3e}\n",
            r.convention, r.converged, r.iterations, r.residual_real, r.residual_complex
        );
        if let Some(d) = r.dimension {
            t += &format!("dimension: {d}\n");
        }
        for w in &r.warnings {
            t += &format!("warning: {w}\n");
        }
        t
    });
    Ok(if s.converged { 0 } else { 3 })
}

fn stability(inp: &Input) -> Outcome {
    let o = &inp.opts;
    let (spec, q) = load(&inp.input)?;
    let bb = require_bundle(&spec, &q)?;
    let sp = slope_params(o, &spec, &bb)?;
    let rep = is_stable(&bb, &sp, o.bound)?;
    let endo = endomorphism_dimension(&bb);
    let dim = match expected_dimension(&bb, &sp) {
        Ok(d) => Some(d),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let r =
        StabilityJson::from_report(&q, bb.bundle(), &rep, endo, dim, o.convention.core().name());
    emit(o, &r, || {
        let mut t = format!(
            "convention: {}\nverdict: {}\nslope: {}\nendomorphisms: {}\n",
            r.convention, r.verdict, r.slope, r.endomorphisms
        );
        if let Some(d) = r.dimension {
            t += &format!("dimension: {d}\n");
        }
        if let (Some(w), Some(ws)) = (&r.witness, &r.witness_slope) {
            t += &format!("witness (slope {ws}):\n");
            for part in w {
                t += &format!(
                    "  vertex {}: rank {}, degree {}\n",
                    part.vertex, part.rank, part.degree
                );
            }
        }
        t
    });
    Ok(0)
}

#[derive(Serialize)]
struct ScanJson {
    samples: usize,
    seed: u64,
    range: [i64; 2],
    rows: Vec<ScanRowJson>,
}

#[derive(Serialize)]
struct ScanRowJson {
    splitting: Vec<Vec<i64>>,
    valid: usize,
    stable: usize,
    semistable: usize,
}

fn scan(inp: &Input) -> Outcome {
    let o = &inp.opts;
    let (spec, q) = load(&inp.input)?;
    let sigma = sigma_scalars(o, &spec).map(|s| to_q(&s)).transpose()?;
    let cfg = ScanConfig {
        samples: o.samples,
        seed: o.seed,
        sigma,
        bound: o.bound,
        ..ScanConfig::default()
    };
    let [lo, hi] = o.range[..] else {
        return Err(fail(2, "--range takes exactly two values, `lo,hi`"));
    };
    let range = (lo, hi);
    let rows = scan_existence(
        &q,
        &spec.label.rank,
        std::slice::from_ref(&spec.label.degree),
        range,
        &cfg,
    )?;
    let r = ScanJson {
        samples: o.samples,
        seed: o.seed,
        range: [range.0, range.1],
        rows: rows
            .into_iter()
            .map(|row| ScanRowJson {
                splitting: row.splitting,
                valid: row.valid,
                stable: row.stable,
                semistable: row.semistable,
            })
            .collect(),
    };
    emit(o, &r, || {
        let mut t = "splitting,valid,stable,semistable\n".to_string();
        for row in &r.rows {
            let s: Vec<String> = row
                .splitting
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            t += &format!(
                "{},{},{},{}\n",
                s.join(" | "),
                row.valid,
                row.stable,
                row.semistable
            );
        }
        t
    });
    Ok(0)
}

#[derive(Serialize)]
struct FixedJson {
    mode: &'static str,
    bound: i64,
    nilpotent: Vec<bool>,
    weights: Vec<WeightAssignment>,
}

fn fixed_points(inp: &Input) -> Outcome {
    let o = &inp.opts;
    let (spec, q) = load(&inp.input)?;
    let data = match spec.bundle(&q)? {
        Some(bb) => TorusData::from_bundle(&bb)?,
        None => TorusData::from_point_rep(&q, &point_or_random(&spec, &q, o.seed)?)?,
    };
    let mode = o.mode.core();
    let bound = o.bound.unwrap_or(3);
    let found = find_weights(&q, &data, bound, mode)?;
    let r = FixedJson {
        mode: mode.name(),
        bound,
        nilpotent: check_nilpotent(data.phi()),
        weights: found,
    };
    emit(o, &r, || {
        let mut t = format!(
            "mode: {}\nbound: {}\nnilpotent: {:?}\nweight assignments: {}\n",
            r.mode,
            r.bound,
            r.nilpotent,
            r.weights.len()
        );
        for w in &r.weights {
            t += &format!("  {:?}\n", w.weights());
        }
        t
    });
    Ok(0)
}

#[derive(Serialize)]
struct DimensionJson {
    rep_space_real: usize,
    endomorphisms: Option<usize>,
    expected: Option<usize>,
    verdict: Option<String>,
}

fn dimension(inp: &Input) -> Outcome {
    let o = &inp.opts;
    let (spec, q) = load(&inp.input)?;
    let rep = rep_space_dimension(&q, &spec.label)?;
    let mut r = DimensionJson {
        rep_space_real: rep,
        endomorphisms: None,
        expected: None,
        verdict: None,
    };
    if let Some(bb) = spec.bundle(&q)? {
        let sp = slope_params(o, &spec, &bb)?;
        r.endomorphisms = Some(endomorphism_dimension(&bb));
        r.verdict = Some(is_stable(&bb, &sp, o.bound)?.verdict.name().to_string());
        r.expected = match expected_dimension(&bb, &sp) {
            Ok(d) => Some(d),
            Err(Error::Precondition(_)) => None,
            Err(e) => return Err(e.into()),
        };
    }
    emit(o, &r, || {
        let mut t = format!(
            "real dimension of the point representation space: {}\n",
            r.rep_space_real
        );
        if let (Some(e), Some(v)) = (r.endomorphisms, &r.verdict) {
            t += &format!("verdict: {v}\nendomorphisms: {e}\n");
            match r.expected {
                Some(d) => t += &format!("expected dimension: {d}\n"),
                None => t += "expected dimension: undefined for non-stable input\n",
            }
        }
        t
    });
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match cli.verb {
        Verb::Validate(i) => validate(&i),
        Verb::Moment(i) => moment(&i),
        Verb::Solve(i) => solve(&i),
        Verb::Stability(i) => stability(&i),
        Verb::Scan(i) => scan(&i),
        Verb::FixedPoints(i) => fixed_points(&i),
        Verb::Dimension(i) => dimension(&i),
        Verb::Reproduce(o) => reproduce::run(&o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
