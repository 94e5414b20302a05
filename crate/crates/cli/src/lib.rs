//! Command-line front end: axiom suites, classifications, derivation checks
//! and the distribution-side derivation of the λ-bracket.

pub mod document;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use cw_core::algebra::{bracket, check_graded, check_jacobi, check_skew_symmetry};
use cw_core::classify::{classify_graded, solve_rank_one, ClassificationOutcome};
use cw_core::derivation::{check_leibniz, degree_components, extract_inner, verify_der_equals_inn};
use cw_core::distribution::{bracket_distributions, fourier_lambda, is_local, make_l_distribution};
use cw_core::module::{check_module_axiom, check_module_axiom_window, GradedConformalModule, ModuleDescriptor};
use cw_core::mutation::{builtin_modules, mutate_test as run_mutations};
use cw_core::{make_cw, CheckReport, ConformalElement, GradedConformalAlgebra, Var, Window, Witness};

pub use document::{load_document, parse_document, Document, DocumentError};

pub const SCHEMA_VERSION: u32 = 1;
const CAMPAIGN_TRIALS: usize = 100;
const MAX_LOCALITY: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Skew-symmetry, Jacobi and grading on [-N, N].
    CheckAlgebra,
    /// Module axiom on every admissible triple.
    CheckModule,
    /// Rank-one module classification up to the degree bound.
    ClassifyRank1,
    /// Classifies the ℤ-graded module given with --input.
    ClassifyGraded,
    /// Leibniz rule and inner-derivation extraction.
    CheckDerivation,
    /// Derives [L_i λ L_j] from the formal distributions L_i(z), L_j(w).
    Fourier,
    /// Single-monomial mutation sensitivity of the checkers.
    MutateTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckAlgebra => "check-algebra",
            Command::CheckModule => "check-module",
            Command::ClassifyRank1 => "classify-rank1",
            Command::ClassifyGraded => "classify-graded",
            Command::CheckDerivation => "check-derivation",
            Command::Fourier => "fourier",
            Command::MutateTest => "mutate-test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Cw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cwconf", version, about = "Exact checks for the loop Virasoro conformal algebra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum)]
    pub builtin: Option<Builtin>,
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(i64).range(0..))]
    pub window: i64,
    #[arg(long = "deg-bound", global = true, default_value_t = 6)]
    pub deg_bound: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long = "alpha-band", global = true, default_value_t = 8, value_parser = clap::value_parser!(i64).range(0..))]
    pub alpha_band: i64,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub i: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub j: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub builtin: Option<Builtin>,
    pub window: i64,
    pub deg_bound: u32,
    pub format: Format,
    pub input_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub alpha_band: i64,
    pub i: Option<i64>,
    pub j: Option<i64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            builtin: None,
            window: 4,
            deg_bound: 6,
            format: Format::Text,
            input_path: None,
            seed: None,
            alpha_band: 8,
            i: None,
            j: None,
        }
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            command: c.command,
            builtin: c.builtin,
            window: c.window,
            deg_bound: c.deg_bound,
            format: c.format,
            input_path: c.input,
            seed: c.seed,
            alpha_band: c.alpha_band,
            i: c.i,
            j: c.j,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Document(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub check: String,
    pub indices: Vec<i64>,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<CheckReport> for CheckEntry {
    fn from(r: CheckReport) -> Self {
        let idx: Vec<String> = r.indices.iter().map(|k| k.to_string()).collect();
        CheckEntry {
            id: format!("{}({})", r.check, idx.join(",")),
            check: r.check,
            indices: r.indices,
            passed: r.passed,
            witnesses: r.witnesses,
            note: r.note,
        }
    }
}

/// `checked` of `candidates` index tuples were inside every window the
/// checks needed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub checked: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub passed: bool,
    pub coverage: Coverage,
    pub results: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub descriptors: Vec<ModuleDescriptor>,
    pub checks: Vec<CheckEntry>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out: Vec<String> = self.results.clone();
        for c in self.checks.iter().filter(|c| !c.passed) {
            match &c.note {
                Some(n) => out.push(format!("FAIL {}: {n}", c.id)),
                None => out.push(format!("FAIL {}", c.id)),
            }
            for w in &c.witnesses {
                let basis = w.basis.map(|k| format!("[{k}] ")).unwrap_or_default();
                out.push(format!("  {basis}lhs: {}", w.lhs));
                out.push(format!("  {basis}rhs: {}", w.rhs));
            }
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push(format!(
            "{}: {} ({passed}/{} checks passed, coverage {}/{})",
            self.command,
            if self.passed { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.coverage.checked,
            self.coverage.candidates,
        ));
        out.join("\n")
    }
}

#[derive(Default)]
struct Outcome {
    checks: Vec<CheckReport>,
    coverage: Coverage,
    results: Vec<String>,
    descriptors: Vec<ModuleDescriptor>,
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let doc = match &config.input_path {
        Some(p) => {
            if config.builtin.is_some() {
                return Err(usage("--builtin and --input are mutually exclusive"));
            }
            Some(load_document(p)?)
        }
        None => None,
    };
    let window = Window::symmetric(config.window);
    let out = match config.command {
        Command::CheckAlgebra => check_algebra(doc.as_ref(), window)?,
        Command::CheckModule => check_module(doc.as_ref(), window),
        Command::ClassifyRank1 => classify_rank1(config.deg_bound),
        Command::ClassifyGraded => classify_graded_doc(doc.as_ref(), config.deg_bound)?,
        Command::CheckDerivation => check_derivation(doc.as_ref(), config, window)?,
        Command::Fourier => fourier(config)?,
        Command::MutateTest => mutations(window),
    };
    let mut checks: Vec<CheckEntry> = out.checks.into_iter().map(CheckEntry::from).collect();
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: config.command.name().to_string(),
        config: config.clone(),
        passed: checks.iter().all(|c| c.passed),
        coverage: out.coverage,
        results: out.results,
        descriptors: out.descriptors,
        checks,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn algebra_from(doc: Option<&Document>) -> (GradedConformalAlgebra, Option<Window>) {
    match doc.and_then(|d| d.algebra.as_ref()) {
        Some(a) => (a.algebra.clone(), a.table_window),
        None => (make_cw(), None),
    }
}

fn in_table(table: Option<Window>, idx: &[i64]) -> bool {
    table.is_none_or(|t| idx.iter().all(|k| t.contains(*k)))
}

fn check_algebra(doc: Option<&Document>, window: Window) -> Result<Outcome, CliError> {
    if let Some(d) = doc {
        if d.algebra.is_none() {
            return Err(usage("input document has no algebra section"));
        }
    }
    let (alg, table) = algebra_from(doc);
    let mut out = Outcome::default();
    let n = window.len();
    out.coverage.candidates = n * n + n * n * n;
    for i in window.iter() {
        for j in window.iter() {
            if in_table(table, &[i, j]) {
                out.checks.push(check_skew_symmetry(&alg, i, j));
            }
            for k in window.iter() {
                if in_table(table, &[i, j, k, i + j, j + k, i + k]) {
                    out.checks.push(check_jacobi(&alg, i, j, k));
                }
            }
        }
    }
    out.coverage.checked = out.checks.len();
    let graded_window = table.map_or(window, |t| t.intersect(&window));
    out.checks.push(check_graded(&alg, graded_window));
    out.results.push(format!(
        "{} on [{}, {}]: {} skew pairs, {} Jacobi triples",
        alg.name(),
        window.lo,
        window.hi,
        out.checks.iter().filter(|c| c.check == "skew_symmetry").count(),
        out.checks.iter().filter(|c| c.check == "jacobi").count(),
    ));
    Ok(out)
}

fn module_sweep(
    alg: &GradedConformalAlgebra,
    table: Option<Window>,
    module: &GradedConformalModule,
    rank_one_window: Window,
    out: &mut Outcome,
) {
    let before = out.checks.len();
    if module.is_rank_one() {
        let n = rank_one_window.len();
        out.coverage.candidates += n * n;
        for i in rank_one_window.iter() {
            for j in rank_one_window.iter() {
                if rank_one_window.contains(i + j) && in_table(table, &[i, j]) {
                    out.checks.push(
                        check_module_axiom(alg, module, i, j, 0)
                            .unwrap_or_else(|e| CheckReport::fail("module_axiom", vec![i, j, 0], e.to_string())),
                    );
                }
            }
        }
    } else {
        let suite = check_module_axiom_window(alg, module, module.algebra_window(rank_one_window));
        out.coverage.candidates += suite.len();
        out.checks
            .extend(suite.checks.into_iter().filter(|c| in_table(table, &c.indices[..2])));
    }
    for c in &mut out.checks[before..] {
        c.check = format!("module_axiom[{}]", module.name());
    }
    out.coverage.checked = out.checks.len();
    out.results.push(format!(
        "{}: {} triples checked",
        module.name(),
        out.checks.len() - before
    ));
}

fn check_module(doc: Option<&Document>, window: Window) -> Outcome {
    let (alg, table) = algebra_from(doc);
    let mut out = Outcome::default();
    match doc.and_then(|d| d.module.as_ref()) {
        Some(m) => module_sweep(&alg, table, &m.module, m.table_window.intersect(&window), &mut out),
        None => {
            for m in builtin_modules() {
                module_sweep(&alg, table, &m, window, &mut out);
            }
        }
    }
    out
}

fn classification(out: &mut Outcome, name: &str, result: Result<ClassificationOutcome, impl std::fmt::Display>) {
    match result {
        Ok(c) => {
            out.results.extend(c.descriptors.iter().map(|d| d.to_string()));
            out.results.extend(c.normalization.iter().map(|(k, d)| format!("d_{k} = {d}")));
            out.results.extend(c.notes.iter().cloned());
            out.coverage.checked += c.certificates.len();
            out.coverage.candidates += c.certificates.len();
            out.checks.extend(c.certificates);
            out.descriptors = c.descriptors;
        }
        Err(e) => out.checks.push(CheckReport::fail(name, vec![], e.to_string())),
    }
}

fn classify_rank1(deg_bound: u32) -> Outcome {
    let mut out = Outcome::default();
    classification(&mut out, "classify_rank1", solve_rank_one(deg_bound));
    out
}

fn classify_graded_doc(doc: Option<&Document>, deg_bound: u32) -> Result<Outcome, CliError> {
    let module = doc
        .and_then(|d| d.module.as_ref())
        .ok_or_else(|| usage("classify-graded needs --input with a module section"))?;
    if module.module.is_rank_one() {
        return Err(usage("classify-graded needs a graded module; use classify-rank1 for rank one"));
    }
    let mut out = Outcome::default();
    classification(&mut out, "classify_graded", classify_graded(&module.module, deg_bound));
    Ok(out)
}

fn check_derivation(doc: Option<&Document>, config: &RunConfig, window: Window) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let Some(d) = doc else {
        if config.format == Format::Json && config.seed.is_none() {
            return Err(usage("randomized campaigns need --seed in json mode"));
        }
        let seed = config.seed.unwrap_or(0);
        let campaign = verify_der_equals_inn(window, config.deg_bound, CAMPAIGN_TRIALS, seed);
        out.results.push(format!(
            "inner: {}/{} Leibniz, {}/{} round trips; non-inner: {}/{} rejected; seed {seed}",
            campaign.leibniz_passes,
            campaign.inner_trials,
            campaign.round_trips,
            campaign.inner_trials,
            campaign.leibniz_failures,
            campaign.non_inner_trials,
        ));
        out.coverage = Coverage {
            checked: campaign.inner_trials + campaign.non_inner_trials,
            candidates: 2 * CAMPAIGN_TRIALS,
        };
        out.checks.push(campaign.report);
        return Ok(out);
    };
    let der = d
        .derivation
        .as_ref()
        .ok_or_else(|| usage("input document has no derivation section"))?;
    let (alg, table) = algebra_from(Some(d));
    let w = der.table_window.intersect(&window);
    let n = w.len();
    out.coverage.candidates = n * n;
    for i in w.iter() {
        for j in w.iter() {
            if w.contains(i + j) && in_table(table, &[i, j]) {
                out.checks.push(check_leibniz(&alg, &der.derivation, i, j));
            }
        }
    }
    out.coverage.checked = out.checks.len();
    if out.checks.iter().any(|c| !c.passed) {
        out.results.push(format!("{} is not a derivation on [{}, {}]", der.derivation.name(), w.lo, w.hi));
        return Ok(out);
    }
    let mut generator = ConformalElement::zero();
    for dc in degree_components(&der.derivation, w) {
        match extract_inner(&dc, w, config.deg_bound) {
            Ok(x) => {
                generator = generator.add(&x);
                out.checks.push(CheckReport::pass("inner", vec![dc.c]));
            }
            Err(e) => out.checks.push(CheckReport::fail("inner", vec![dc.c], e.to_string())),
        }
    }
    if out.checks.iter().all(|c| c.passed) {
        out.results.push(format!("{} = ad({})", der.derivation.name(), generator.as_value()));
    }
    Ok(out)
}

fn fourier(config: &RunConfig) -> Result<Outcome, CliError> {
    let (Some(i), Some(j)) = (config.i, config.j) else {
        return Err(usage("fourier needs --i and --j"));
    };
    let band = Window::symmetric(config.alpha_band);
    let internal = |e: cw_core::distribution::DistError| CliError::Internal(e.to_string());
    let a = make_l_distribution(i, band).map_err(internal)?;
    let b = make_l_distribution(j, band).map_err(internal)?;
    let br = bracket_distributions(&a, &b);
    let mut out = Outcome::default();
    let mut order = None;
    for n in 0..=MAX_LOCALITY {
        if is_local(&br, n).map_err(internal)? {
            order = Some(n);
            break;
        }
    }
    let Some(order) = order else {
        out.checks.push(CheckReport::fail(
            "locality",
            vec![i, j],
            format!("not local of order ≤ {MAX_LOCALITY}"),
        ));
        return Ok(out);
    };
    let value = fourier_lambda(&br, order)
        .and_then(|f| f.to_lambda_value())
        .map_err(internal)?;
    out.results.push(value.to_string());
    out.results.push(format!("locality order {order}"));
    out.checks
        .push(CheckReport::pass("locality", vec![i, j]).with_note(format!("order {order}")));
    let expected = bracket(&make_cw(), &ConformalElement::basis(i), &ConformalElement::basis(j), Var::L);
    out.checks
        .push(CheckReport::compare("matches_bracket", vec![i, j], value.compare_with(&expected)));
    out.coverage = Coverage { checked: 1, candidates: 1 };
    Ok(out)
}

/// Runs the mutation harness; undetected mutants are failing checks.
pub fn mutate_test(config: &RunConfig) -> Result<Report, CliError> {
    run(&RunConfig {
        command: Command::MutateTest,
        ..config.clone()
    })
}

fn mutations(window: Window) -> Outcome {
    let suite = run_mutations(window);
    let mut out = Outcome::default();
    out.checks.push(if suite.controls_pass {
        CheckReport::pass("controls", vec![])
    } else {
        CheckReport::fail("controls", vec![], "an unmutated structure failed its checks")
    });
    for o in &suite.outcomes {
        let name = format!("mutant[{}: {}]", o.target, o.mutation);
        out.checks.push(if o.detected {
            CheckReport::pass(&name, vec![]).with_note(format!("caught by {}", o.caught_by.join(", ")))
        } else {
            CheckReport::fail(&name, vec![], "UndetectedMutant")
        });
    }
    let caught = suite.outcomes.iter().filter(|o| o.detected).count();
    out.results.push(format!("{caught}/{} mutants detected", suite.outcomes.len()));
    out.coverage = Coverage {
        checked: suite.outcomes.len(),
        candidates: suite.outcomes.len(),
    };
    out
}
