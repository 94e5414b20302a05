//! Bounded-degree classification of rank-one and ℤ-graded free modules
//! over 𝒞𝒲.
//!
//! Each solver works with generic polynomials whose coefficients are fresh
//! unknowns, reduces the module axiom to explicit polynomial identities and
//! records every identity it checked as a certificate. Completeness is only
//! claimed up to the given degree bound.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::make_cw;
use crate::linalg::{nullspace, solve_square, system_from_residual};
use crate::module::{
    change_basis, check_module_axiom_window, make_v_abc, GradedConformalModule, ModuleDescriptor, ModuleError,
};
use crate::poly::{rat, Monomial, MultiPoly, Rational, Var};
use crate::report::CheckReport;
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("step '{step}' failed: {detail}")]
    PipelineStepFailed { step: String, detail: String },
    #[error("g(∂+λ, λ) ≠ g(∂, λ) for g = {0}")]
    NotShiftInvariant(MultiPoly),
    #[error("degree {degree} exceeds bound {bound}")]
    DegreeBoundExceeded { degree: u32, bound: u32 },
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("f({},{}) = 0 forces f({},{}) = 0, which does not hold", zero.0, zero.1, nonzero.0, nonzero.1)]
    DichotomyViolated { zero: (i64, i64), nonzero: (i64, i64) },
    #[error("f(0,{k}) = {poly} is not of the form aλ + b − ∂")]
    ShapeMismatch { k: i64, poly: MultiPoly },
    #[error("b_{k} = {found} differs from b = {expected}")]
    BMismatch { k: i64, found: MultiPoly, expected: MultiPoly },
    #[error("−c(i+j,k) = c(j,k)·c(i,j+k) fails at (i,j,k) = ({i},{j},{k})")]
    CocycleViolated { i: i64, j: i64, k: i64 },
    #[error("module axiom fails: {0}")]
    AxiomFailed(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

fn step_failed(step: &str, detail: impl Into<String>) -> ClassifyError {
    ClassifyError::PipelineStepFailed {
        step: step.to_string(),
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverResult {
    pub solution_basis: Vec<MultiPoly>,
    pub dimension: usize,
    pub certificate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationOutcome {
    pub descriptors: Vec<ModuleDescriptor>,
    /// Basis scales `d_k` with `u_k = d_k v_k`; empty when no rescaling applies.
    pub normalization: BTreeMap<i64, MultiPoly>,
    pub window: Window,
    pub deg_bound: u32,
    pub notes: Vec<String>,
    pub certificates: Vec<CheckReport>,
}

fn unknowns(prefix: &str, n: usize) -> Vec<Var> {
    (0..n).map(|k| Var::named(&format!("_{prefix}{k}"))).collect()
}

/// `Σ u_k x^k`.
fn generic(coeffs: &[Var], x: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::zero();
    let mut power = MultiPoly::one();
    for u in coeffs {
        out += &(&MultiPoly::var(*u) * &power);
        power = &power * x;
    }
    out
}

fn from_vector(v: &[Rational], x: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::zero();
    let mut power = MultiPoly::one();
    for c in v {
        out += &power.scale(c);
        power = &power * x;
    }
    out
}

fn sorted_by_degree(mut basis: Vec<MultiPoly>) -> Vec<MultiPoly> {
    basis.sort_by(|a, b| a.total_degree().cmp(&b.total_degree()).then_with(|| a.to_string().cmp(&b.to_string())));
    basis
}

/// Rational roots of `αu² + βu + γ` (or the linear/constant degenerations).
fn rational_roots(alpha: &Rational, beta: &Rational, gamma: &Rational) -> Option<Vec<Rational>> {
    if alpha.is_zero() {
        if beta.is_zero() {
            return gamma.is_zero().then(Vec::new);
        }
        return Some(vec![-gamma / beta]);
    }
    let disc = beta * beta - rat(4) * alpha * gamma;
    if disc.is_negative() {
        return Some(Vec::new());
    }
    let sqrt = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    let root = Rational::new(sqrt(disc.numer())?, sqrt(disc.denom())?);
    let two_a = rat(2) * alpha;
    let mut roots: Vec<Rational> = vec![(-beta - &root) / &two_a, (-beta + &root) / &two_a];
    roots.sort();
    roots.dedup();
    Some(roots)
}

/// Polynomial solutions of `c(λ+μ) = −c(λ)c(μ)` with `deg c ≤ deg_bound`.
pub fn solve_multiplicative(deg_bound: u32) -> Result<SolverResult, ClassifyError> {
    const STEP: &str = "multiplicative equation";
    let u = unknowns("c", deg_bound as usize + 1);
    let (l, m) = (MultiPoly::l(), MultiPoly::m());
    let c_of = |x: &MultiPoly| generic(&u, x);
    let residual = &c_of(&(&l + &m)) + &(&c_of(&l) * &c_of(&m));
    let mut certificate = Vec::new();

    let at_zero = residual.substitute(Var::M, &MultiPoly::zero());
    let factored = &c_of(&l) * &(&MultiPoly::one() + &MultiPoly::var(u[0]));
    if at_zero != factored {
        return Err(step_failed(STEP, "μ = 0 does not factor as c(λ)(1 + c(0))"));
    }
    certificate.push("μ = 0: c(λ)(1 + c(0)) = 0, so c ≡ 0 or c(0) = −1".to_string());

    let mut current = residual;
    for d in (1..=deg_bound).rev() {
        let top = current.coefficient_of(Var::L, d).coefficient_of(Var::M, d);
        let expected = MultiPoly::var(u[d as usize]).pow(2);
        if top != expected {
            return Err(step_failed(STEP, format!("coefficient of λ^{d}μ^{d} is {top}")));
        }
        current = current.substitute(u[d as usize], &MultiPoly::zero());
    }
    certificate.push(format!(
        "top coefficients λ^dμ^d = c_d² for d = {deg_bound}..1, so c is constant"
    ));

    let u0 = u[0];
    let coeff = |k| current.coefficient_of(u0, k).as_constant();
    let (Some(alpha), Some(beta), Some(gamma)) = (coeff(2), coeff(1), coeff(0)) else {
        return Err(step_failed(STEP, format!("scalar residual {current} is not a quadratic")));
    };
    if current.degree_in(u0).finite().unwrap_or(0) > 2 {
        return Err(step_failed(STEP, format!("scalar residual {current} is not a quadratic")));
    }
    let roots = rational_roots(&alpha, &beta, &gamma)
        .ok_or_else(|| step_failed(STEP, format!("{current} has no rational roots")))?;
    certificate.push(format!("scalar equation {current} = 0"));

    let mut basis = Vec::new();
    for r in roots {
        let c = MultiPoly::constant(r.clone());
        let check = &c + &(&c * &c);
        if !check.is_zero() {
            return Err(step_failed(STEP, format!("root {r} does not re-substitute")));
        }
        certificate.push(format!("c = {c}: c + c·c = 0"));
        basis.push(c);
    }
    Ok(SolverResult {
        dimension: basis.len(),
        solution_basis: basis,
        certificate,
    })
}

/// Nullspace of `μ d(μ) − λ d(λ) = (μ − λ) d(λ + μ)` over `deg d ≤ deg_bound`.
pub fn solve_d_equation(deg_bound: u32) -> Result<SolverResult, ClassifyError> {
    let u = unknowns("d", deg_bound as usize + 1);
    let (l, m) = (MultiPoly::l(), MultiPoly::m());
    let residual = d_equation_residual(&|x| generic(&u, x), &l, &m);
    let rows = system_from_residual(&residual, &u).map_err(|e| step_failed("linear part", e.to_string()))?;
    let basis: Vec<MultiPoly> = nullspace(&rows, u.len())
        .iter()
        .map(|v| from_vector(v, &l))
        .collect();
    let mut certificate = vec![format!("{} linear conditions on {} coefficients", rows.len(), u.len())];
    for d in &basis {
        let check = d_equation_residual(&|x| d.substitute(Var::L, x), &l, &m);
        if !check.is_zero() {
            return Err(step_failed("linear part", format!("{d} does not re-substitute")));
        }
        certificate.push(format!("d = {d}: residual 0"));
    }
    let basis = sorted_by_degree(basis);
    Ok(SolverResult {
        dimension: basis.len(),
        solution_basis: basis,
        certificate,
    })
}

fn d_equation_residual(d: &dyn Fn(&MultiPoly) -> MultiPoly, l: &MultiPoly, m: &MultiPoly) -> MultiPoly {
    &(&(m * &d(m)) - &(l * &d(l))) - &(&(m - l) * &d(&(l + m)))
}

/// For shift-invariant `g(∂, λ) = Σ a_j(λ)∂^j`, solves the Vandermonde
/// system from `∂ = kλ`, `k = 0..n`, checks `a_j λ^j = 0` for `j ≥ 1` and
/// returns `a_0(λ)`.
pub fn vandermonde_reduce(g: &MultiPoly, n: u32) -> Result<MultiPoly, ClassifyError> {
    let shifted = g.substitute(Var::D, &(&MultiPoly::d() + &MultiPoly::l()));
    if shifted != *g {
        return Err(ClassifyError::NotShiftInvariant(g.clone()));
    }
    if let Some(degree) = g.degree_in(Var::D).finite() {
        if degree > n {
            return Err(ClassifyError::DegreeBoundExceeded { degree, bound: n });
        }
    }
    let size = n as usize + 1;
    let matrix: Vec<Vec<Rational>> = (0..size)
        .map(|k| (0..size).map(|j| crate::poly::rat_pow(&rat(k as i64), j as i64)).collect())
        .collect();
    let rhs: Vec<MultiPoly> = (0..size)
        .map(|k| g.substitute(Var::D, &MultiPoly::l().scale(&rat(k as i64))))
        .collect();
    let solution = solve_square(&matrix, &rhs).expect("distinct Vandermonde nodes");
    if let Some(bad) = solution.iter().skip(1).find(|x| !x.is_zero()) {
        return Err(step_failed("shift invariance", format!("nonzero higher term {bad}")));
    }
    Ok(solution[0].clone())
}

/// Polynomial solutions of `e·d(∂) = (∂ − b) d'(∂)` with `deg d ≤ deg_bound`.
pub fn solve_ode_poly(e: u32, b: &MultiPoly, deg_bound: u32) -> Result<SolverResult, ClassifyError> {
    let x = MultiPoly::var(Var::named("_x"));
    let u = unknowns("o", deg_bound as usize + 1);
    let d = generic(&u, &x);
    let x_var = Var::named("_x");
    let residual = &d.scale(&rat(e as i64)) - &(&x * &d.formal_derivative(x_var));
    let rows = system_from_residual(&residual, &u).map_err(|err| step_failed("ode", err.to_string()))?;
    let back = &MultiPoly::d() - b;
    let mut certificate = vec![format!("e = {e}, shifted variable x = ∂ − ({b})")];
    let mut basis = Vec::new();
    for v in nullspace(&rows, u.len()) {
        let sol = from_vector(&v, &back);
        let check = &sol.scale(&rat(e as i64)) - &(&back * &sol.formal_derivative(Var::D));
        if !check.is_zero() {
            return Err(step_failed("ode", format!("{sol} does not re-substitute")));
        }
        certificate.push(format!("d = {sol}: residual 0"));
        basis.push(sol);
    }
    Ok(SolverResult {
        dimension: basis.len(),
        solution_basis: basis,
        certificate,
    })
}

/// One surviving shape of `f_{j,k}` up to the scalar `c_{j,k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairForm {
    pub case: u8,
    pub form: MultiPoly,
    pub constraint: String,
}

fn affine_zero(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    &(&(&MultiPoly::l() * a) + b) - &MultiPoly::d()
}

/// `(μ−λ)f(∂,λ+μ) − f(∂+λ,μ)f_{0,j+k}(∂,λ) + f_{0,k}(∂+μ,λ)f(∂,μ)`.
pub fn pair_residual(f: &MultiPoly, a_k: &MultiPoly, a_jk: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let (d, l, m) = (MultiPoly::d(), MultiPoly::l(), MultiPoly::m());
    let f0k = affine_zero(a_k, b);
    let f0jk = affine_zero(a_jk, b);
    let lhs = &(&m - &l) * &f.substitute(Var::L, &(&l + &m));
    let first = &f.substitute_many(&[(Var::D, &d + &l), (Var::L, m.clone())]) * &f0jk;
    let second = &f0k.substitute(Var::D, &(&d + &m)) * &f.substitute(Var::L, &m);
    &(&lhs - &first) + &second
}

/// Shape of `f_{j,k}` given `f_{0,k} = a_kλ + b − ∂` and
/// `f_{0,j+k} = a_{j+k}λ + b − ∂`.
///
/// `d = f(∂, 0)` solves the ODE, `f` is rebuilt from `d`, the pair is
/// filtered on the lines `∂ − b = Nλ` for `N = −1, 0`, and the full pair
/// identity decides.
pub fn solve_pair_form(a_k: &MultiPoly, a_jk: &MultiPoly, b: &MultiPoly) -> Result<Vec<PairForm>, ClassifyError> {
    let e_poly = &(&MultiPoly::one() + a_jk) - a_k;
    let e = match e_poly.as_constant() {
        Some(q) if q.is_integer() && !q.is_negative() => q
            .to_integer()
            .to_u32()
            .ok_or_else(|| ClassifyError::NoSolution(format!("exponent {q} too large")))?,
        Some(q) => {
            return Err(ClassifyError::NoSolution(format!(
                "1 + a_(j+k) − a_k = {q} is not a nonnegative integer"
            )))
        }
        None => {
            return Err(ClassifyError::NoSolution(format!(
                "1 + a_(j+k) − a_k = {e_poly} is not a constant"
            )))
        }
    };
    let ode = solve_ode_poly(e, b, e)?;
    let [d] = ode.solution_basis.as_slice() else {
        return Err(step_failed("ode", format!("solution space has dimension {}", ode.dimension)));
    };
    let (dd, l) = (MultiPoly::d(), MultiPoly::l());
    let d_shift = d.substitute(Var::D, &(&dd + &l));
    let quotient = (&d_shift - d)
        .exact_divide(&l)
        .map_err(|_| step_failed("pair form", "λ does not divide d(∂+λ) − d(∂)"))?;
    let f = &(&(&(&dd - b) * &quotient) + &(a_k * d)) - &(a_jk * &d_shift);

    let diag = &(&f.substitute(Var::D, &(&dd + &l)) * &affine_zero(a_jk, b))
        - &(&(&affine_zero(a_k, b) - &l) * &f);
    for n in [-1, 0] {
        let line = &(b + &l.scale(&rat(n)));
        let value = diag.substitute(Var::D, line);
        if !value.is_zero() {
            return Err(ClassifyError::NoSolution(format!(
                "(a_k, a_(j+k)) = ({a_k}, {a_jk}): diagonal identity fails on ∂ − b = {n}λ"
            )));
        }
    }
    let residual = pair_residual(&f, a_k, a_jk, b);
    if !residual.is_zero() {
        return Err(ClassifyError::NoSolution(format!(
            "(a_k, a_(j+k)) = ({a_k}, {a_jk}): pair identity leaves {residual}"
        )));
    }
    let (zero, minus_one) = (MultiPoly::zero(), MultiPoly::int(-1));
    let (case, constraint) = if a_k == a_jk {
        (1, format!("a_k = a_(j+k) = {a_k}"))
    } else if (a_k - a_jk).is_one() {
        (2, format!("a_k = a_(j+k) + 1 = {a_k}"))
    } else if (a_k, a_jk) == (&minus_one, &zero) {
        (3, "(a_k, a_(j+k)) = (-1, 0)".to_string())
    } else {
        return Err(step_failed("pair form", format!("({a_k}, {a_jk}) survives outside the three cases")));
    };
    Ok(vec![PairForm { case, form: f, constraint }])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroVerdict {
    Trivial,
    NowhereZero,
}

/// Closes the zero set of structure coefficients under
/// `f_{j,k} = 0 ⇒ f_{i+j,k} = 0` and `f_{0,t(j,k)} = 0 ⇒ f_{j,k} = 0`
/// and checks the closure against the actual coefficients.
pub fn propagate_zero(module: &GradedConformalModule, alg_window: Window) -> Result<ZeroVerdict, ClassifyError> {
    let pairs = module.pairs(alg_window);
    let zero: BTreeSet<(i64, i64)> = pairs
        .iter()
        .copied()
        .filter(|(i, j)| module.coeff(*i, *j).map(|f| f.is_zero()).unwrap_or(false))
        .collect();
    let mut closure: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut queue: VecDeque<((i64, i64), (i64, i64))> = zero.iter().map(|p| (*p, *p)).collect();
    while let Some((source, pair)) = queue.pop_front() {
        if !closure.insert(pair) {
            continue;
        }
        if !zero.contains(&pair) {
            return Err(ClassifyError::DichotomyViolated { zero: source, nonzero: pair });
        }
        let (j, k) = pair;
        for &(a, b) in &pairs {
            let same_column = b == k;
            let same_target = j == 0 && module.target(a, b) == k;
            if (same_column || same_target) && !closure.contains(&(a, b)) {
                queue.push_back((source, (a, b)));
            }
        }
    }
    if zero.is_empty() {
        Ok(ZeroVerdict::NowhereZero)
    } else if closure.len() == pairs.len() {
        Ok(ZeroVerdict::Trivial)
    } else {
        let z = *zero.iter().next().expect("nonempty");
        let nz = pairs.iter().copied().find(|p| !zero.contains(p)).expect("partial");
        Err(ClassifyError::DichotomyViolated { zero: z, nonzero: nz })
    }
}

/// Reads `f_{0,k} = a_kλ + b_k − ∂` on the module window and checks that
/// all `b_k` agree. Returns `b` and the sequence `a_k`.
pub fn extract_b(module: &GradedConformalModule) -> Result<(MultiPoly, BTreeMap<i64, MultiPoly>), ClassifyError> {
    let mut b: Option<MultiPoly> = None;
    let mut seq = BTreeMap::new();
    for k in module.window().iter() {
        let f = module.coeff(0, k)?;
        let rest = &f + &MultiPoly::d();
        let operator_free = |p: &MultiPoly| !p.contains_var(Var::D) && !p.contains_var(Var::L);
        let (a_k, b_k) = (rest.coefficient_of(Var::L, 1), rest.coefficient_of(Var::L, 0));
        let shaped = !rest.contains_var(Var::D)
            && rest.degree_in(Var::L).finite().unwrap_or(0) <= 1
            && operator_free(&a_k)
            && operator_free(&b_k);
        if !shaped {
            return Err(ClassifyError::ShapeMismatch { k, poly: f });
        }
        match &b {
            None => b = Some(b_k),
            Some(expected) if *expected != b_k => {
                return Err(ClassifyError::BMismatch {
                    k,
                    found: b_k,
                    expected: expected.clone(),
                })
            }
            Some(_) => {}
        }
        seq.insert(k, a_k);
    }
    let b = b.ok_or_else(|| step_failed("affine shape", "empty module window"))?;
    Ok((b, seq))
}

/// Gauge `d_{k0} = 1`, `d_k = −c_{k−k0, k0}` with `k0 = 0` when it lies in
/// the window (else the lowest degree), after checking
/// `−c_{i+j,k} = c_{j,k}c_{i,j+k}` on every available triple.
pub fn normalize_cocycle(
    c_table: &BTreeMap<(i64, i64), Rational>,
    window: Window,
) -> Result<BTreeMap<i64, Rational>, ClassifyError> {
    const STEP: &str = "cocycle normalization";
    if let Some(((j, k), _)) = c_table.iter().find(|(_, c)| c.is_zero()) {
        return Err(step_failed(STEP, format!("c({j},{k}) = 0")));
    }
    for (&(j, k), c_jk) in c_table {
        for (&(i, jk), c_i) in c_table.range((i64::MIN, j + k)..=(i64::MAX, j + k)) {
            if jk != j + k {
                continue;
            }
            if let Some(c_sum) = c_table.get(&(i + j, k)) {
                if -c_sum != c_jk * c_i {
                    return Err(ClassifyError::CocycleViolated { i, j, k });
                }
            }
        }
    }
    if window.is_empty() {
        return Ok(BTreeMap::new());
    }
    let base = if window.contains(0) { 0 } else { window.lo };
    let mut d = BTreeMap::new();
    for k in window.iter() {
        let value = if k == base {
            rat(1)
        } else {
            -c_table
                .get(&(k - base, base))
                .ok_or_else(|| step_failed(STEP, format!("missing c({},{base})", k - base)))?
                .clone()
        };
        d.insert(k, value);
    }
    for (&(j, k), c) in c_table {
        if let (Some(dk), Some(djk)) = (d.get(&k), d.get(&(j + k))) {
            if -c != djk / dk {
                return Err(ClassifyError::CocycleViolated { i: j, j: k - base, k: base });
            }
        }
    }
    Ok(d)
}

fn descriptor_for(seq: &BTreeMap<i64, MultiPoly>, b: &MultiPoly) -> Result<ModuleDescriptor, ClassifyError> {
    let mut values = seq.values();
    let first = values.next().ok_or_else(|| step_failed("sequence", "empty"))?;
    if values.all(|a| a == first) {
        return Ok(ModuleDescriptor::GradedUniform {
            a: first.clone(),
            b: b.clone(),
        });
    }
    let mut a = BTreeMap::new();
    for (k, v) in seq {
        match v.as_constant().and_then(|q| q.to_integer().to_i64().filter(|_| q.is_integer())) {
            Some(x @ (0 | -1)) => {
                a.insert(*k, x);
            }
            _ => return Err(step_failed("sequence", format!("a_{k} = {v} with a non-constant sequence"))),
        }
    }
    Ok(ModuleDescriptor::GradedSequence { a, b: b.clone() })
}

/// Classifies a ℤ-graded free module given on its window, up to a basis
/// rescaling.
pub fn classify_graded(module: &GradedConformalModule, deg_bound: u32) -> Result<ClassificationOutcome, ClassifyError> {
    let window = module.window();
    let alg_window = window.differences();
    let cw = make_cw();
    let mut certificates = Vec::new();

    let axiom = check_module_axiom_window(&cw, module, alg_window);
    if let Some(bad) = axiom.failures().next() {
        return Err(ClassifyError::AxiomFailed(format!("at {:?}", bad.indices)));
    }
    certificates.push(
        CheckReport::pass("module_axiom", vec![]).with_note(format!("{} triples on {window}", axiom.len())),
    );
    let mut outcome = ClassificationOutcome {
        descriptors: Vec::new(),
        normalization: BTreeMap::new(),
        window,
        deg_bound,
        notes: vec![format!("complete for structure coefficients of degree ≤ {deg_bound} on {window}")],
        certificates,
    };

    if propagate_zero(module, alg_window)? == ZeroVerdict::Trivial {
        outcome.descriptors.push(ModuleDescriptor::Trivial);
        outcome.certificates.push(CheckReport::pass("zero_dichotomy", vec![]).with_note("trivial"));
        return Ok(outcome);
    }
    outcome.certificates.push(CheckReport::pass("zero_dichotomy", vec![]).with_note("nowhere zero"));

    let (b, seq) = extract_b(module)?;
    outcome.certificates.push(CheckReport::pass("affine_shape", vec![]).with_note(format!("b = {b}")));

    let mut c_table = BTreeMap::new();
    let mut cases = BTreeMap::new();
    for (j, k) in module.pairs(alg_window) {
        let f = module.coeff(j, k)?;
        if let Some(degree) = f.total_degree().finite() {
            if degree > deg_bound {
                return Err(ClassifyError::DegreeBoundExceeded { degree, bound: deg_bound });
            }
        }
        let forms = solve_pair_form(&seq[&k], &seq[&(j + k)], &b)?;
        let form = &forms[0];
        let c = f
            .exact_divide(&form.form)
            .ok()
            .and_then(|q| q.as_constant())
            .filter(|q| !q.is_zero())
            .ok_or_else(|| step_failed("pair form", format!("f({j},{k}) = {f} is not a multiple of {}", form.form)))?;
        *cases.entry(form.case).or_insert(0usize) += 1;
        c_table.insert((j, k), c);
    }
    outcome.certificates.push(
        CheckReport::pass("pair_forms", vec![]).with_note(
            cases
                .iter()
                .map(|(case, n)| format!("case {case}: {n}"))
                .collect::<Vec<_>>()
                .join(", "),
        ),
    );

    let d = normalize_cocycle(&c_table, window)?;
    outcome.certificates.push(CheckReport::pass("cocycle", vec![]));
    let descriptor = descriptor_for(&seq, &b)?;
    let normalized = change_basis(module, &d)?;
    let expected = descriptor.instantiate(window)?;
    let got = normalized.to_table(alg_window);
    let want = expected.to_table(alg_window);
    let pairs: Vec<_> = want
        .iter()
        .map(|((i, j), p)| (Some(i * 1000 + j), got.get(&(*i, *j)).cloned().unwrap_or_default(), p.clone()))
        .collect();
    let check = CheckReport::compare("normalized_matches_descriptor", vec![], pairs);
    if !check.passed {
        return Err(step_failed("normalization", "rescaled module differs from the descriptor"));
    }
    outcome.certificates.push(check);
    outcome.normalization = d.into_iter().map(|(k, v)| (k, MultiPoly::constant(v))).collect();
    outcome.descriptors.push(descriptor.canonical());
    Ok(outcome)
}

/// Bidegree argument: for `f_0` of bidegree `(d1, d2)` the λ-degrees of
/// both sides of the `i = j = 0` axiom agree only when `d1 = 1`.
fn degree_argument(deg_bound: u32) -> Result<CheckReport, ClassifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (d, l, m) = (MultiPoly::d(), MultiPoly::l(), MultiPoly::m());
    let mut nonzero = || loop {
        let c: i64 = rng.gen_range(-3..=3);
        if c != 0 {
            return rat(c);
        }
    };
    let mut consistent = Vec::new();
    for d1 in 0..=deg_bound {
        for d2 in 0..=deg_bound {
            let corners: BTreeSet<(u32, u32)> = [(d1, d2), (d1, 0), (0, d2), (0, 0)].into_iter().collect();
            let f0 = corners.into_iter().fold(MultiPoly::zero(), |acc, (a, b)| {
                let mono = Monomial::var(Var::D, a).mul(&Monomial::var(Var::L, b));
                &acc + &MultiPoly::term(nonzero(), mono)
            });
            let lhs = &(&m - &l) * &f0.substitute(Var::L, &(&l + &m));
            let rhs = &(&f0.substitute_many(&[(Var::D, &d + &l), (Var::L, m.clone())]) * &f0)
                - &(&f0.substitute(Var::D, &(&d + &m)) * &f0.substitute(Var::L, &m));
            if lhs.degree_in(Var::L) == rhs.degree_in(Var::L) {
                consistent.push((d1, d2));
            }
        }
    }
    if consistent.iter().any(|(d1, _)| *d1 != 1) {
        return Err(step_failed("degree argument", format!("consistent bidegrees {consistent:?}")));
    }
    Ok(CheckReport::pass("degree_argument", vec![])
        .with_note(format!("λ-degrees agree only for ∂-degree 1 ({} bidegrees)", consistent.len())))
}

/// Full rank-one pipeline up to `deg_bound`.
pub fn solve_rank_one(deg_bound: u32) -> Result<ClassificationOutcome, ClassifyError> {
    if deg_bound < 2 {
        return Err(step_failed("input", "degree bound must be at least 2"));
    }
    let (d, l, m) = (MultiPoly::d(), MultiPoly::l(), MultiPoly::m());
    let mut certificates = vec![degree_argument(deg_bound)?];

    // f_0 = c(λ)∂ + d(λ)
    let cu = unknowns("p", deg_bound as usize + 1);
    let du = unknowns("q", deg_bound as usize + 1);
    let c_of = |x: &MultiPoly| generic(&cu, x);
    let d_of = |x: &MultiPoly| generic(&du, x);
    let f0 = |dv: &MultiPoly, lv: &MultiPoly| &(&c_of(lv) * dv) + &d_of(lv);
    let residual = &(&(&m - &l) * &f0(&d, &(&l + &m)))
        - &(&(&f0(&(&d + &l), &m) * &f0(&d, &l)) - &(&f0(&(&d + &m), &l) * &f0(&d, &m)));
    if residual.degree_in(Var::D).finite().unwrap_or(0) > 1 {
        return Err(step_failed("linear part", "∂² terms survive"));
    }
    let mult = &c_of(&(&l + &m)) + &(&c_of(&l) * &c_of(&m));
    let linear = &(&(&(&m - &l) * &d_of(&(&l + &m))) - &(&(&c_of(&m) * &d_of(&l)) * &l))
        + &(&(&c_of(&l) * &d_of(&m)) * &m);
    let split_ok = residual
        .coefficient_of(Var::D, 1)
        .exact_divide(&(&m - &l))
        .map(|q| q == mult)
        .unwrap_or(false)
        && residual.coefficient_of(Var::D, 0) == linear;
    if !split_ok {
        return Err(step_failed("linear part", "∂-coefficients do not split into the two equations"));
    }
    certificates.push(CheckReport::pass("split", vec![]).with_note("∂¹: (μ−λ)(c(λ+μ) + c(λ)c(μ)); ∂⁰: d-equation"));

    let roots = solve_multiplicative(deg_bound)?;
    if roots.solution_basis != vec![MultiPoly::int(-1), MultiPoly::zero()] {
        return Err(step_failed(
            "multiplicative equation",
            format!("unexpected roots {:?}", roots.solution_basis),
        ));
    }
    certificates.push(CheckReport::pass("multiplicative", vec![]).with_note("c ∈ {0, -1}"));

    // c = 0 forces d = 0
    let zero_c = linear.substitute_many(&cu.iter().map(|u| (*u, MultiPoly::zero())).collect::<Vec<_>>());
    let rows = system_from_residual(&zero_c, &du).map_err(|e| step_failed("linear part", e.to_string()))?;
    if !nullspace(&rows, du.len()).is_empty() {
        return Err(step_failed("linear part", "c = 0 admits nonzero d"));
    }
    certificates.push(CheckReport::pass("trivial_branch", vec![]).with_note("c = 0 ⇒ d = 0 ⇒ all f_i = 0"));

    let d_eq = solve_d_equation(deg_bound)?;
    if d_eq.solution_basis != vec![MultiPoly::one(), MultiPoly::l()] {
        return Err(step_failed("linear part", format!("unexpected basis {:?}", d_eq.solution_basis)));
    }
    let (a, b) = (MultiPoly::var(Var::A), MultiPoly::var(Var::B));
    let f0_final = affine_zero(&a, &b);
    certificates.push(CheckReport::pass("d_equation", vec![]).with_note(format!("f_0 = {f0_final}")));

    // f_i = f_0·g with g = (h(∂) − h(∂+λ))/λ, h = f_i(∂, 0)
    let hu = unknowns("h", deg_bound as usize + 2);
    let h = generic(&hu, &d);
    let g = (&h - &h.substitute(Var::D, &(&d + &l)))
        .exact_divide(&l)
        .map_err(|_| step_failed("divisibility", "λ ∤ h(∂) − h(∂+λ)"))?;
    let fi = &f0_final * &g;
    if fi.exact_divide(&f0_final).ok().as_ref() != Some(&g) {
        return Err(step_failed("divisibility", "f_0 does not divide f_i"));
    }
    let f0_shift = f0_final.substitute(Var::D, &(&d + &l));
    let g_shift = g.substitute(Var::D, &(&d + &l));
    let diag = &(&f0_shift * &fi) - &(&fi.substitute(Var::D, &(&d + &l)) * &f0_final);
    if diag != &(&f0_shift * &f0_final) * &(&g - &g_shift) {
        return Err(step_failed("shift invariance", "diagonal identity does not reduce to g"));
    }
    certificates.push(CheckReport::pass("divisibility", vec![]));

    let free = &hu[1..];
    let rows = system_from_residual(&(&g_shift - &g), free).map_err(|e| step_failed("shift invariance", e.to_string()))?;
    let mut reduced = Vec::new();
    for v in nullspace(&rows, free.len()) {
        let subs: Vec<(Var, MultiPoly)> = free
            .iter()
            .zip(&v)
            .map(|(u, x)| (*u, MultiPoly::constant(x.clone())))
            .collect();
        let gb = g.substitute_many(&subs);
        let a0 = vandermonde_reduce(&gb, deg_bound + 1)?;
        let m7 = &(&(&m * &a0.substitute(Var::L, &m)) - &(&(&b - &d) * &a0.substitute(Var::L, &MultiPoly::zero())))
            + &(&(&(&b - &d) - &m) * &a0.substitute(Var::L, &MultiPoly::zero()));
        if !m7.is_zero() || a0.contains_var(Var::L) {
            return Err(step_failed("constancy", format!("g = {a0} is not constant")));
        }
        reduced.push(a0);
    }
    if reduced.len() != 1 {
        return Err(step_failed("shift invariance", format!("{} independent g", reduced.len())));
    }
    certificates.push(CheckReport::pass("shift_invariance", vec![]).with_note(format!("g ∈ span{{{}}}", reduced[0])));

    let (ci, cj, cij) = (Var::named("_ci"), Var::named("_cj"), Var::named("_cij"));
    let fc = |c: Var| &MultiPoly::var(c) * &f0_final;
    let m0 = &(&(&m - &l) * &fc(cij).substitute(Var::L, &(&l + &m)))
        - &(&(&fc(cj).substitute_many(&[(Var::D, &d + &l), (Var::L, m.clone())]) * &fc(ci))
            - &(&fc(ci).substitute(Var::D, &(&d + &m)) * &fc(cj).substitute(Var::L, &m)));
    let scale = &(&m - &l) * &f0_final.substitute(Var::L, &(&l + &m));
    let expected = &MultiPoly::var(cij) - &(&MultiPoly::var(ci) * &MultiPoly::var(cj));
    if m0.exact_divide(&scale).ok().as_ref() != Some(&expected) {
        return Err(step_failed("multiplicativity", "c_(i+j) ≠ c_i c_j"));
    }
    certificates.push(CheckReport::pass("multiplicativity", vec![]).with_note("c_(i+j) = c_i c_j, so c_i = c^i"));

    let family = make_v_abc(&a, &b, &MultiPoly::var(Var::C))?;
    let verify = check_module_axiom_window(&make_cw(), &family, Window::symmetric(3));
    if !verify.passed() {
        return Err(step_failed("verification", "V(a,b,c) fails the module axiom"));
    }
    certificates.push(CheckReport::pass("family_axiom", vec![]).with_note(format!("{} triples", verify.len())));

    Ok(ClassificationOutcome {
        descriptors: vec![
            ModuleDescriptor::Trivial,
            ModuleDescriptor::RankOne {
                a,
                b,
                c: MultiPoly::var(Var::C),
            },
        ],
        normalization: BTreeMap::new(),
        window: Window::single(0),
        deg_bound,
        notes: vec![format!("complete for f_0 of degree ≤ {deg_bound}")],
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{make_v_ab, make_v_ab_seq};
    use crate::poly::{parse, ratio};

    fn p(s: &str) -> MultiPoly {
        parse(s).unwrap()
    }

    #[test]
    fn multiplicative_roots() {
        for deg in [0, 3, 6] {
            let r = solve_multiplicative(deg).unwrap();
            assert_eq!(r.solution_basis, vec![p("-1"), p("0")]);
        }
    }

    #[test]
    fn d_equation_basis() {
        let r = solve_d_equation(6).unwrap();
        assert_eq!(r.solution_basis, vec![p("1"), p("l")]);
        let r = solve_d_equation(1).unwrap();
        assert_eq!(r.dimension, 2);
        let bad = d_equation_residual(&|x| x * x, &MultiPoly::l(), &MultiPoly::m());
        assert!(!bad.is_zero());
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde_reduce(&p("l^2"), 3).unwrap(), p("l^2"));
        assert_eq!(vandermonde_reduce(&p("3"), 0).unwrap(), p("3"));
        assert!(matches!(vandermonde_reduce(&p("d"), 2), Err(ClassifyError::NotShiftInvariant(_))));
    }

    #[test]
    fn ode_examples() {
        let b = MultiPoly::var(Var::B);
        assert_eq!(solve_ode_poly(1, &b, 4).unwrap().solution_basis, vec![p("d - b")]);
        assert_eq!(solve_ode_poly(0, &b, 4).unwrap().solution_basis, vec![p("1")]);
        assert_eq!(solve_ode_poly(2, &b, 4).unwrap().solution_basis, vec![p("(d - b)^2")]);
        assert_eq!(solve_ode_poly(3, &b, 2).unwrap().dimension, 0);
    }

    #[test]
    fn pair_form_cases() {
        let b = MultiPoly::var(Var::B);
        let a = MultiPoly::var(Var::A);
        let r = solve_pair_form(&a, &a, &b).unwrap();
        assert_eq!((r[0].case, &r[0].form), (1, &p("d - b - a*l")));
        let r = solve_pair_form(&p("0"), &p("-1"), &b).unwrap();
        assert_eq!((r[0].case, &r[0].form), (2, &p("1")));
        let r = solve_pair_form(&p("-1"), &p("0"), &b).unwrap();
        assert_eq!((r[0].case, &r[0].form), (3, &p("(d - b)*(d - b + l)")));
        let r = solve_pair_form(&p("-1/2"), &p("-1/2"), &b).unwrap();
        assert_eq!(r[0].case, 1);
        for n in 1..4 {
            let ak = MultiPoly::constant(ratio(-(2 * n + 1), 2));
            let ajk = MultiPoly::constant(ratio(2 * n - 1, 2));
            assert!(matches!(solve_pair_form(&ak, &ajk, &b), Err(ClassifyError::NoSolution(_))));
        }
        assert!(solve_pair_form(&p("0"), &p("1/2"), &b).is_err());
        assert!(solve_pair_form(&p("2"), &p("0"), &b).is_err());
        let r = solve_pair_form(&p("1"), &p("0"), &b).unwrap();
        assert_eq!((r[0].case, &r[0].form), (2, &p("1")));
        assert!(solve_pair_form(&p("0"), &p("1"), &b).is_err());
    }

    #[test]
    fn zero_propagation() {
        let w = Window::symmetric(2);
        let trivial = crate::module::make_trivial(w, false);
        assert_eq!(propagate_zero(&trivial, w.differences()).unwrap(), ZeroVerdict::Trivial);
        let seq: BTreeMap<i64, i64> = [(-2, 0), (-1, -1), (0, 0), (1, -1), (2, -1)].into_iter().collect();
        let v = make_v_ab_seq(&seq, &MultiPoly::var(Var::B)).unwrap();
        assert_eq!(propagate_zero(&v, w.differences()).unwrap(), ZeroVerdict::NowhereZero);
        let holed = v.with_override(1, 0, MultiPoly::zero());
        assert!(matches!(
            propagate_zero(&holed, w.differences()),
            Err(ClassifyError::DichotomyViolated { zero: (1, 0), .. })
        ));
    }

    #[test]
    fn b_extraction() {
        let w = Window::symmetric(2);
        let v = make_v_ab(&p("-1/2"), &p("7"), w);
        let (b, seq) = extract_b(&v).unwrap();
        assert_eq!(b, p("7"));
        assert!(seq.values().all(|a| *a == p("-1/2")));
        let bad = v.with_override(0, 1, p("l + 3 - d"));
        assert!(matches!(extract_b(&bad), Err(ClassifyError::BMismatch { k: 1, .. })));
        let bent = v.with_override(0, 1, p("l^2 + 7 - d"));
        assert!(matches!(extract_b(&bent), Err(ClassifyError::ShapeMismatch { k: 1, .. })));
    }

    #[test]
    fn cocycle_examples() {
        let w = Window::symmetric(4);
        let aw = w.differences();
        let ones: BTreeMap<(i64, i64), Rational> = w
            .iter()
            .flat_map(|k| aw.iter().filter(move |j| w.contains(j + k)).map(move |j| ((j, k), rat(-1))))
            .collect();
        assert!(normalize_cocycle(&ones, w).unwrap().values().all(|d| *d == rat(1)));

        let pow: BTreeMap<(i64, i64), Rational> = ones
            .keys()
            .map(|&(j, k)| ((j, k), -crate::poly::rat_pow(&rat(2), j)))
            .collect();
        let d = normalize_cocycle(&pow, w).unwrap();
        for k in w.iter() {
            assert_eq!(d[&k], crate::poly::rat_pow(&rat(2), k));
        }
        let mut broken = pow.clone();
        broken.insert((1, 0), rat(5));
        assert!(matches!(normalize_cocycle(&broken, w), Err(ClassifyError::CocycleViolated { .. })));
    }

    #[test]
    fn classify_uniform() {
        let v = make_v_ab(&p("-1/2"), &p("7"), Window::symmetric(2));
        let out = classify_graded(&v, 4).unwrap();
        assert_eq!(
            out.descriptors,
            vec![ModuleDescriptor::GradedUniform { a: p("-1/2"), b: p("7") }]
        );
    }

    #[test]
    fn classify_sequence_and_rescaled() {
        let seq: BTreeMap<i64, i64> = [(-2, 0), (-1, -1), (0, 0), (1, -1), (2, -1)].into_iter().collect();
        let v = make_v_ab_seq(&seq, &p("3")).unwrap();
        let expected = ModuleDescriptor::GradedSequence { a: seq.clone(), b: p("3") };
        assert_eq!(classify_graded(&v, 4).unwrap().descriptors, vec![expected.clone()]);
        let scramble: BTreeMap<i64, Rational> = [(-2, ratio(3, 2)), (-1, rat(-4)), (1, ratio(1, 7)), (2, rat(9))]
            .into_iter()
            .collect();
        let scrambled = change_basis(&v, &scramble).unwrap();
        let out = classify_graded(&scrambled, 4).unwrap();
        assert_eq!(out.descriptors, vec![expected]);
        assert!(!out.normalization.values().all(|d| d.is_one()));
    }

    #[test]
    fn classify_trivial_and_rejects_non_modules() {
        let w = Window::symmetric(1);
        let out = classify_graded(&crate::module::make_trivial(w, false), 4).unwrap();
        assert_eq!(out.descriptors, vec![ModuleDescriptor::Trivial]);
        let bad = make_v_ab(&p("1"), &p("0"), w).with_override(1, 0, p("d^2"));
        assert!(matches!(classify_graded(&bad, 4), Err(ClassifyError::AxiomFailed(_))));
    }

    #[test]
    fn rank_one_pipeline() {
        let out = solve_rank_one(4).unwrap();
        assert_eq!(out.descriptors.len(), 2);
        assert_eq!(out.descriptors[0], ModuleDescriptor::Trivial);
        assert!(out.certificates.iter().all(|c| c.passed));
        let cw = make_cw();
        for (a, b, c) in [("1", "0", "1"), ("2", "3", "-1")] {
            let v = make_v_abc(&p(a), &p(b), &p(c)).unwrap();
            assert!(check_module_axiom_window(&cw, &v, Window::symmetric(3)).passed());
        }
        assert!(solve_rank_one(1).is_err());
    }
}
