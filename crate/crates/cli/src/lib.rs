//! Command implementations behind the `fleming` binary.
//!
//! Every command writes data to the given sink and returns whether all
//! checks passed. Input problems surface as errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fleming_core::bounds::{
    classify_dichotomy, default_probes, find_passage_time, passage_time_lower_bound, verify_fleming,
    verify_mt_inequality, BoundReport, DichotomyVerdict,
};
use fleming_core::campaign::{run_campaign, CampaignConfig, CampaignReport, CampaignSummary};
use fleming_core::dynamics::{energy_spread, linspace, DecayCurve};
use fleming_core::intelligent::{construct_mixed_intelligent, construct_pure_intelligent, variance_mixing};
use fleming_core::odecmp::{comparison_lower_envelope, window_samples};
use fleming_core::{ensemble, tol, ComplexMatrix, DensityOperator, Hamiltonian, MixedIntelligentSpec, C64};

pub type Entry = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Density(Vec<Vec<Entry>>),
    Pure(Vec<Entry>),
}

/// On-disk problem: a Hamiltonian and an initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub hamiltonian: Vec<Vec<Entry>>,
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, String>>,
}

/// A problem after validation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub h: Hamiltonian,
    pub rho: DensityOperator,
}

fn to_entries(v: &[C64]) -> Vec<Entry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_entries(v: &[Entry]) -> Vec<C64> {
    v.iter().map(|e| C64::new(e[0], e[1])).collect()
}

fn matrix_entries(m: &ComplexMatrix) -> Vec<Vec<Entry>> {
    m.rows().iter().map(|r| to_entries(r)).collect()
}

fn parse_matrix(field: &str, rows: &[Vec<Entry>], dim: usize) -> anyhow::Result<ComplexMatrix> {
    ensure!(rows.len() == dim, "{field}: expected {dim} rows, found {}", rows.len());
    for (i, r) in rows.iter().enumerate() {
        ensure!(r.len() == dim, "{field}: row {i} has {} entries, expected {dim}", r.len());
    }
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| from_entries(r)).collect();
    ComplexMatrix::from_rows(&rows).with_context(|| format!("{field}: invalid matrix"))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("malformed problem file")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files serialize");
        s.push('\n');
        s
    }

    pub fn new(h: &ComplexMatrix, state: StateSpec, metadata: BTreeMap<String, String>) -> Self {
        Self {
            dim: h.dim(),
            hamiltonian: matrix_entries(h),
            state,
            metadata: (!metadata.is_empty()).then_some(metadata),
        }
    }

    pub fn with_density(h: &ComplexMatrix, rho: &ComplexMatrix, metadata: BTreeMap<String, String>) -> Self {
        Self::new(h, StateSpec::Density(matrix_entries(rho)), metadata)
    }

    /// Validates both operators; module errors are reported verbatim.
    pub fn build(&self, rank_tol: f64) -> anyhow::Result<Problem> {
        ensure!(self.dim >= 1, "dim: must be at least 1");
        let hm = parse_matrix("hamiltonian", &self.hamiltonian, self.dim)?;
        let h = Hamiltonian::new(hm).context("hamiltonian")?;
        let rho = match &self.state {
            StateSpec::Density(rows) => {
                let m = parse_matrix("state.density", rows, self.dim)?;
                DensityOperator::new(&m, rank_tol).context("state.density")?
            }
            StateSpec::Pure(v) => {
                ensure!(v.len() == self.dim, "state.pure: expected {} entries, found {}", self.dim, v.len());
                let phi = fleming_core::PureState::new(from_entries(v)).context("state.pure")?;
                phi.to_density()
            }
        };
        Ok(Problem { h, rho })
    }
}

#[derive(Debug, Parser)]
#[command(name = "fleming", version, about = "Survival probabilities and the Fleming bound for mixed states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample P(t) with the Fleming bound as CSV.
    Eval(EvalArgs),
    /// Run all checks on a problem and print a JSON report.
    Verify(VerifyArgs),
    /// Write a problem file holding an intelligent state.
    #[command(subcommand)]
    Construct(ConstructKind),
    /// Seeded randomized campaign.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub problem: PathBuf,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::PI)]
    pub t_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[arg(long, default_value_t = tol::RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long, default_value_t = tol::EQ_TOL)]
    pub eq_tol: f64,
    #[arg(long, default_value_t = tol::BOUND_TOL)]
    pub bound_tol: f64,
    #[arg(long, default_value_t = tol::RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Passage-time search horizon; defaults to 2π/Δh.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ConstructKind {
    /// `(e_i + e_j)/√2` for `h = diag(spectrum)`.
    Pure(PureArgs),
    /// Mixture of matched pairs from two degenerate levels.
    Mixed(MixedArgs),
}

#[derive(Debug, Args)]
pub struct PureArgs {
    /// Diagonal of h, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
    pub spectrum: Vec<f64>,
    /// Indices of the two eigenvectors.
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1])]
    pub pair: Vec<usize>,
    /// Rotate everything by a random unitary drawn from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MixedArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub omega1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub omega2: f64,
    /// Dimension of the ω₁-eigenspace.
    #[arg(long)]
    pub mult1: usize,
    /// Dimension of the ω₂-eigenspace.
    #[arg(long)]
    pub mult2: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub weights: Vec<f64>,
    /// Further eigenvalues of h not touched by the state.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub extra: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// JSON campaign config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eq_tol: Option<f64>,
    #[arg(long)]
    pub bound_tol: Option<f64>,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-instance CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn emit(output: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => stdout.write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

/// Runs one command. `Ok(false)` means a check failed.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> anyhow::Result<bool> {
    match cli.command {
        Command::Eval(a) => cmd_eval(&a, stdout),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Construct(k) => cmd_construct(&k, stdout),
        Command::Scan(a) => cmd_scan(&a, stdout),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn eval_csv(problem: &Problem, t_min: f64, t_max: f64, steps: usize) -> anyhow::Result<String> {
    ensure!(steps >= 2, "--steps must be at least 2, got {steps}");
    ensure!(t_min.is_finite() && t_max.is_finite(), "time range must be finite");
    let curve = DecayCurve::evaluate(&problem.rho, &problem.h, &linspace(t_min, t_max, steps))?;
    let mut out = String::from("t,P,bound,margin,in_window\n");
    for i in 0..curve.len() {
        let (b, m) = match (curve.bound[i], curve.margin[i]) {
            (Some(b), Some(m)) => (num(b), num(m)),
            _ => (String::new(), String::new()),
        };
        writeln!(out, "{},{},{},{},{}", num(curve.times[i]), num(curve.values[i]), b, m, curve.bound[i].is_some())
            .expect("writing to a String");
    }
    Ok(out)
}

fn cmd_eval(a: &EvalArgs, stdout: &mut dyn Write) -> anyhow::Result<bool> {
    let problem = ProblemFile::load(&a.problem)?.build(a.rank_tol)?;
    emit(&a.output, stdout, &eval_csv(&problem, a.t_min, a.t_max, a.steps)?)?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub pass: bool,
    pub min_margin: f64,
    pub argmin_t: f64,
    pub violations: usize,
    pub tol: f64,
}

impl From<&BoundReport> for BoundCheck {
    fn from(r: &BoundReport) -> Self {
        Self { pass: r.passed(), min_margin: r.min_margin, argmin_t: r.argmin_t, violations: r.violations.len(), tol: r.tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyCheck {
    pub pass: bool,
    pub verdict: Option<DichotomyVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingCheck {
    pub pass: bool,
    pub total: Option<f64>,
    pub within: Option<f64>,
    pub between: Option<f64>,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub pass: bool,
    pub min_margin_forward: f64,
    pub min_margin_backward: f64,
    pub agrees_with_fleming: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PassageCheck {
    pub pass: bool,
    pub epsilon: f64,
    pub t_max: f64,
    pub time: Option<f64>,
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Checks {
    pub fleming: BoundCheck,
    pub mandelstam_tamm: BoundCheck,
    pub dichotomy: DichotomyCheck,
    pub variance_mixing: MixingCheck,
    pub comparison_envelope: EnvelopeCheck,
    pub passage: PassageCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub dim: usize,
    pub rank: usize,
    pub delta_h: f64,
    pub checks: Checks,
    pub all_pass: bool,
}

/// Runs every check on `problem`. Numerical faults inside a check mark
/// that check failed instead of aborting.
pub fn verify_problem(problem: &Problem, a: &VerifyArgs) -> anyhow::Result<VerifyReport> {
    let Problem { h, rho } = problem;
    ensure!(a.grid >= 2, "--grid must be at least 2, got {}", a.grid);
    let delta_h = energy_spread(rho, h)?;
    let fleming = verify_fleming(rho, h, a.grid, a.bound_tol)?;
    let mt = verify_mt_inequality(rho, h, &fleming.curve.times, a.bound_tol)?;

    let dichotomy = match classify_dichotomy(rho, h, &default_probes(delta_h), a.eq_tol) {
        Ok(v) => DichotomyCheck { pass: true, verdict: Some(v), error: None },
        Err(e) => DichotomyCheck { pass: false, verdict: None, error: Some(e.to_string()) },
    };
    let variance_mixing = match variance_mixing(rho, h) {
        Ok(m) => MixingCheck {
            pass: m.between >= -1e-12,
            total: Some(m.total),
            within: Some(m.within),
            between: Some(m.between),
            residual: Some(m.residual()),
            error: None,
        },
        Err(e) => MixingCheck {
            pass: false,
            total: None,
            within: None,
            between: None,
            residual: None,
            error: Some(e.to_string()),
        },
    };

    let (forward, backward) = window_samples(rho, h, a.grid)?;
    let f = comparison_lower_envelope(&forward, a.bound_tol)?;
    let b = comparison_lower_envelope(&backward, a.bound_tol)?;
    let envelope_pass = f.passed() && b.passed();
    let comparison_envelope = EnvelopeCheck {
        pass: envelope_pass,
        min_margin_forward: f.min_margin,
        min_margin_backward: b.min_margin,
        agrees_with_fleming: envelope_pass == fleming.passed(),
    };

    let scale = if delta_h > tol::STATIONARY_TOL { delta_h } else { 1.0 };
    let t_max = a.t_max.unwrap_or(2.0 * std::f64::consts::PI / scale);
    let lower_bound = (delta_h > tol::STATIONARY_TOL)
        .then(|| passage_time_lower_bound(delta_h, a.epsilon))
        .transpose()?;
    let passage = match find_passage_time(rho, h, a.epsilon, t_max, 1e-9) {
        Ok(time) => PassageCheck { pass: true, epsilon: a.epsilon, t_max, time, lower_bound, error: None },
        Err(e @ fleming_core::Error::PassageBelowBound { .. }) => {
            PassageCheck { pass: false, epsilon: a.epsilon, t_max, time: None, lower_bound, error: Some(e.to_string()) }
        }
        Err(e) => return Err(e.into()),
    };

    let checks = Checks {
        fleming: (&fleming).into(),
        mandelstam_tamm: (&mt).into(),
        dichotomy,
        variance_mixing,
        comparison_envelope,
        passage,
    };
    let all_pass = checks.fleming.pass
        && checks.mandelstam_tamm.pass
        && checks.dichotomy.pass
        && checks.variance_mixing.pass
        && checks.comparison_envelope.pass
        && checks.comparison_envelope.agrees_with_fleming
        && checks.passage.pass;
    Ok(VerifyReport { dim: rho.dim(), rank: rho.rank(), delta_h, checks, all_pass })
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> anyhow::Result<bool> {
    let problem = ProblemFile::load(&a.problem)?.build(a.rank_tol)?;
    let report = verify_problem(&problem, a)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(&a.output, stdout, &text)?;
    Ok(report.all_pass)
}

fn unit(dim: usize, i: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[i] = C64::new(1.0, 0.0);
    v
}

/// `h = W diag W†` and the map `v ↦ W v`; `W = I` without a seed.
fn rotated(diag: &[f64], seed: Option<u64>) -> (ComplexMatrix, Option<ComplexMatrix>) {
    let d = ComplexMatrix::from_diagonal(diag);
    match seed {
        None => (d, None),
        Some(s) => {
            let w = ensemble::random_unitary(&mut ensemble::instance_rng(s, 0), diag.len());
            ((&(&w * &d) * &w.adjoint()).hermitian_part(), Some(w))
        }
    }
}

fn apply(w: &Option<ComplexMatrix>, v: Vec<C64>) -> Vec<C64> {
    match w {
        Some(w) => w.apply(&v),
        None => v,
    }
}

pub fn construct_pure(a: &PureArgs) -> anyhow::Result<ProblemFile> {
    let dim = a.spectrum.len();
    ensure!(dim >= 2, "--spectrum needs at least two eigenvalues");
    ensure!(a.pair.len() == 2, "--pair takes two indices");
    let (i, j) = (a.pair[0], a.pair[1]);
    ensure!(i < dim && j < dim, "--pair indices must be below {dim}");
    let (hm, w) = rotated(&a.spectrum, a.seed);
    let h = Hamiltonian::new(hm.clone())?;
    let phi = construct_pure_intelligent(&apply(&w, unit(dim, i)), &apply(&w, unit(dim, j)), &h)?;
    let mut meta = BTreeMap::from([("kind".to_string(), "pure-intelligent".to_string())]);
    if let Some(s) = a.seed {
        meta.insert("seed".into(), s.to_string());
    }
    Ok(ProblemFile::new(&hm, StateSpec::Pure(to_entries(phi.vector())), meta))
}

pub fn construct_mixed(a: &MixedArgs) -> anyhow::Result<ProblemFile> {
    ensure!(a.mult1 >= 1 && a.mult2 >= 1, "--mult1 and --mult2 must be positive");
    let mut diag = vec![a.omega1; a.mult1];
    diag.extend(std::iter::repeat_n(a.omega2, a.mult2));
    diag.extend(&a.extra);
    let dim = diag.len();
    let (hm, w) = rotated(&diag, a.seed);
    let h = Hamiltonian::new(hm.clone())?;
    // Components beyond an eigenspace's dimension repeat its vectors, so
    // the constructor reports the undersized eigenspace.
    let n = a.weights.len();
    let spec = MixedIntelligentSpec {
        dim,
        omega1: a.omega1,
        omega2: a.omega2,
        weights: a.weights.clone(),
        basis1: (0..n).map(|k| apply(&w, unit(dim, k % a.mult1))).collect(),
        basis2: (0..n).map(|k| apply(&w, unit(dim, a.mult1 + k % a.mult2))).collect(),
    };
    let rho = construct_mixed_intelligent(&spec, &h)?;
    let mut meta = BTreeMap::from([("kind".to_string(), "mixed-intelligent".to_string())]);
    if let Some(s) = a.seed {
        meta.insert("seed".into(), s.to_string());
    }
    Ok(ProblemFile::with_density(&hm, rho.matrix(), meta))
}

fn cmd_construct(kind: &ConstructKind, stdout: &mut dyn Write) -> anyhow::Result<bool> {
    let (file, output) = match kind {
        ConstructKind::Pure(a) => (construct_pure(a)?, &a.output),
        ConstructKind::Mixed(a) => (construct_mixed(a)?, &a.output),
    };
    emit(output, stdout, &file.to_json())?;
    Ok(true)
}

pub fn scan_config(a: &ScanArgs) -> anyhow::Result<CampaignConfig> {
    let mut config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("malformed campaign config {}", path.display()))?
        }
        None => CampaignConfig::default(),
    };
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = &a.dims {
        config.dims = v.clone();
    }
    if let Some(v) = a.instances {
        config.instances_per_dim = v;
    }
    if let Some(v) = a.grid {
        config.grid_points = v;
    }
    if let Some(v) = a.eq_tol {
        config.eq_tol = v;
    }
    if let Some(v) = a.bound_tol {
        config.bound_tol = v;
    }
    if let Some(v) = a.rank_tol {
        config.rank_tol = v;
    }
    if let Some(v) = a.epsilon {
        config.epsilon = v;
    }
    if let Some(v) = a.t_max {
        config.t_max = v;
    }
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    config: &'a CampaignConfig,
    summary: &'a CampaignSummary,
}

pub fn scan_json(report: &CampaignReport) -> String {
    let mut s = serde_json::to_string_pretty(&ScanOutput { config: &report.config, summary: &report.summary })
        .expect("summaries serialize");
    s.push('\n');
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn scan_csv(report: &CampaignReport) -> String {
    let mut out = String::from(
        "index,dim,rank,delta_h,verdict,fleming_min_margin,fleming_violations,mt_min_margin,mt_violations,\
         derivative_error,d2_error,mixing_total,mixing_within,mixing_between,mixing_residual,\
         passage_time,passage_lower_bound,envelope_agrees,propagation_c,passed\n",
    );
    for r in &report.instances {
        let verdict = r.verdict.map(|v| format!("{v:?}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.dim,
            r.rank,
            num(r.delta_h),
            verdict,
            num(r.fleming_min_margin),
            r.fleming_violations,
            num(r.mt_min_margin),
            r.mt_violations,
            num(r.derivative_error),
            num(r.d2_error()),
            num(r.mixing_total),
            num(r.mixing_within),
            num(r.mixing_between),
            num(r.mixing_residual),
            opt(r.passage_time),
            num(r.passage_lower_bound),
            r.envelope_agrees,
            opt(r.propagation_c),
            r.passed()
        )
        .expect("writing to a String");
    }
    out
}

fn cmd_scan(a: &ScanArgs, stdout: &mut dyn Write) -> anyhow::Result<bool> {
    let config = scan_config(a)?;
    let report = run_campaign(&config)?;
    if let Some(path) = &a.csv {
        std::fs::write(path, scan_csv(&report)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    emit(&a.output, stdout, &scan_json(&report))?;
    for r in report.instances.iter().filter(|r| !r.passed()) {
        eprintln!("instance {} (dim {}) failed: {}", r.index, r.dim, r.error.as_deref().unwrap_or("check failed"));
    }
    Ok(report.summary.all_pass)
}
