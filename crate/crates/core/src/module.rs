//! Conformal modules over a graded conformal algebra.
//!
//! A module is described by structure coefficients `f_{i,j}(∂, λ)` with
//! `L_i λ v_j = f_{i,j}(∂, λ) v_{t(i,j)}`. For ℤ-graded free modules the
//! target is `t(i,j) = i + j` and `j` ranges over a finite window of module
//! degrees. Rank-one modules (`M = ℂ[∂]v`) use the same machinery with the
//! single generator `v = v_0` and `t(i,0) = 0`.
//!
//! Vectors `Σ P_k v_k` are represented as [`LambdaValue`]s keyed by module
//! degree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{ConformalElement, GradedConformalAlgebra, LambdaValue};
use crate::poly::{c_power, rat, rat_pow, MultiPoly, Rational, Var};
use crate::report::{CheckReport, SuiteReport};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModuleError {
    #[error("parameter c must be nonzero")]
    ZeroParameter,
    #[error("parameter {0} must be a nonzero constant or the symbol c")]
    UnsupportedParameter(String),
    #[error("bad sequence: {0}")]
    BadSequence(String),
    #[error("module index {index} outside window {window}")]
    WindowExceeded { index: i64, window: Window },
    #[error("basis scale d_{0} is zero")]
    ZeroScale(i64),
}

pub type CoeffFn = Arc<dyn Fn(i64, i64) -> MultiPoly + Send + Sync>;

#[derive(Clone)]
pub struct GradedConformalModule {
    name: String,
    window: Window,
    rank_one: bool,
    f: CoeffFn,
}

impl fmt::Debug for GradedConformalModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradedConformalModule")
            .field("name", &self.name)
            .field("window", &self.window)
            .field("rank_one", &self.rank_one)
            .finish()
    }
}

impl GradedConformalModule {
    /// ℤ-graded free module on `window` with `L_i λ v_j = f(i, j) v_{i+j}`.
    pub fn graded(
        name: impl Into<String>,
        window: Window,
        f: impl Fn(i64, i64) -> MultiPoly + Send + Sync + 'static,
    ) -> Self {
        GradedConformalModule {
            name: name.into(),
            window,
            rank_one: false,
            f: Arc::new(f),
        }
    }

    /// Rank-one module `ℂ[∂]v` with `L_i λ v = f(i) v`.
    pub fn rank_one(name: impl Into<String>, f: impl Fn(i64) -> MultiPoly + Send + Sync + 'static) -> Self {
        GradedConformalModule {
            name: name.into(),
            window: Window::single(0),
            rank_one: true,
            f: Arc::new(move |i, _| f(i)),
        }
    }

    /// Module whose coefficients are read from a table; absent entries are zero.
    pub fn from_table(
        name: impl Into<String>,
        window: Window,
        rank_one: bool,
        table: BTreeMap<(i64, i64), MultiPoly>,
    ) -> Self {
        let table = Arc::new(table);
        GradedConformalModule {
            name: name.into(),
            window: if rank_one { Window::single(0) } else { window },
            rank_one,
            f: Arc::new(move |i, j| table.get(&(i, j)).cloned().unwrap_or_default()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_rank_one(&self) -> bool {
        self.rank_one
    }

    /// Module degree of `L_i λ v_j`.
    pub fn target(&self, i: i64, j: i64) -> i64 {
        if self.rank_one {
            j
        } else {
            i + j
        }
    }

    fn require(&self, idx: i64) -> Result<(), ModuleError> {
        if self.window.contains(idx) {
            Ok(())
        } else {
            Err(ModuleError::WindowExceeded {
                index: idx,
                window: self.window,
            })
        }
    }

    /// `f_{i,j}(∂, λ)`.
    pub fn coeff(&self, i: i64, j: i64) -> Result<MultiPoly, ModuleError> {
        self.require(j)?;
        self.require(self.target(i, j))?;
        Ok((self.f)(i, j))
    }

    /// Admissible `(i, j)` with `i` in `alg_window` and both `j` and the
    /// target inside the module window.
    pub fn pairs(&self, alg_window: Window) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for j in self.window.iter() {
            for i in alg_window.iter() {
                if self.window.contains(self.target(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Algebra indices that can act inside the window: all differences of
    /// module degrees for graded modules, `fallback` for rank-one modules.
    pub fn algebra_window(&self, fallback: Window) -> Window {
        if self.rank_one {
            fallback
        } else {
            self.window.differences()
        }
    }

    pub fn to_table(&self, alg_window: Window) -> BTreeMap<(i64, i64), MultiPoly> {
        self.pairs(alg_window)
            .into_iter()
            .map(|(i, j)| ((i, j), (self.f)(i, j)))
            .collect()
    }

    /// Same module with one structure coefficient replaced.
    pub fn with_override(&self, i: i64, j: i64, p: MultiPoly) -> Self {
        let base = self.f.clone();
        GradedConformalModule {
            name: format!("{}[f({i},{j}) overridden]", self.name),
            window: self.window,
            rank_one: self.rank_one,
            f: Arc::new(move |a, b| if (a, b) == (i, j) { p.clone() } else { base(a, b) }),
        }
    }
}

fn validate_c(c: &MultiPoly) -> Result<(), ModuleError> {
    match c.as_constant() {
        Some(q) if q.is_zero() => Err(ModuleError::ZeroParameter),
        Some(_) => Ok(()),
        None if *c == MultiPoly::var(Var::C) => Ok(()),
        None => Err(ModuleError::UnsupportedParameter(c.to_string())),
    }
}

/// `c^i` for a nonzero constant `c` or the symbol `c` (via `cinv`).
fn power_of(c: &MultiPoly, i: i64) -> MultiPoly {
    match c.as_constant() {
        Some(q) => MultiPoly::constant(rat_pow(&q, i)),
        None => c_power(i),
    }
}

/// `V_{a,b,c}`: `L_i λ v = c^i(−∂ + aλ + b) v`.
pub fn make_v_abc(a: &MultiPoly, b: &MultiPoly, c: &MultiPoly) -> Result<GradedConformalModule, ModuleError> {
    validate_c(c)?;
    let base = affine(a, b);
    let c = c.clone();
    Ok(GradedConformalModule::rank_one(
        format!("V[a={a}, b={b}, c={c}]"),
        move |i| &power_of(&c, i) * &base,
    ))
}

/// `−∂ + aλ + b`.
pub fn affine(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    &(&(&MultiPoly::l() * a) + b) - &MultiPoly::d()
}

/// `V_{a,b}` on `window`: `L_i λ v_j = −(∂ − b − aλ) v_{i+j}`.
pub fn make_v_ab(a: &MultiPoly, b: &MultiPoly, window: Window) -> GradedConformalModule {
    let f = affine(a, b);
    GradedConformalModule::graded(format!("V[a={a}, b={b}]"), window, move |_, _| f.clone())
}

/// Checks that `seq` is a `{0, −1}`-sequence on a contiguous window.
pub fn sequence_window(seq: &BTreeMap<i64, i64>) -> Result<Window, ModuleError> {
    let (Some(lo), Some(hi)) = (seq.keys().next(), seq.keys().next_back()) else {
        return Err(ModuleError::BadSequence("empty sequence".into()));
    };
    if (hi - lo + 1) as usize != seq.len() {
        return Err(ModuleError::BadSequence("sequence has gaps".into()));
    }
    if let Some((k, v)) = seq.iter().find(|(_, v)| **v != 0 && **v != -1) {
        return Err(ModuleError::BadSequence(format!("a_{k} = {v} is not in {{0, -1}}")));
    }
    Ok(Window::new(*lo, *hi))
}

/// The four-case action of `V_{A,b}` for `(a_j, a_{i+j})`.
pub fn sequence_coefficient(a_j: i64, a_ij: i64, b: &MultiPoly) -> MultiPoly {
    let shifted = &MultiPoly::d() - b;
    match (a_j, a_ij) {
        (0, 0) => -shifted,
        (-1, -1) => -(&shifted + &MultiPoly::l()),
        (0, -1) => MultiPoly::int(-1),
        (-1, 0) => -(&shifted * &(&shifted + &MultiPoly::l())),
        _ => unreachable!("sequence entries are validated"),
    }
}

/// `V_{A,b}` for a `{0, −1}`-sequence `A` on a contiguous window.
pub fn make_v_ab_seq(seq: &BTreeMap<i64, i64>, b: &MultiPoly) -> Result<GradedConformalModule, ModuleError> {
    let window = sequence_window(seq)?;
    let seq = seq.clone();
    let b = b.clone();
    let label = seq.values().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    Ok(GradedConformalModule::graded(
        format!("V[A=({label}), b={b}]"),
        window,
        move |i, j| sequence_coefficient(seq[&j], seq[&(i + j)], &b),
    ))
}

/// Zero module on `window` (graded) or of rank one.
pub fn make_trivial(window: Window, rank_one: bool) -> GradedConformalModule {
    if rank_one {
        GradedConformalModule::rank_one("trivial", |_| MultiPoly::zero())
    } else {
        GradedConformalModule::graded("trivial", window, |_, _| MultiPoly::zero())
    }
}

/// Isomorphism class labels produced by the classifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ModuleDescriptor {
    Trivial,
    RankOne { a: MultiPoly, b: MultiPoly, c: MultiPoly },
    GradedUniform { a: MultiPoly, b: MultiPoly },
    GradedSequence { a: BTreeMap<i64, i64>, b: MultiPoly },
}

impl ModuleDescriptor {
    /// Folds constant sequences into the uniform family they coincide with.
    pub fn canonical(&self) -> ModuleDescriptor {
        if let ModuleDescriptor::GradedSequence { a, b } = self {
            let mut vals = a.values();
            if let Some(first) = vals.next() {
                if vals.all(|v| v == first) {
                    return ModuleDescriptor::GradedUniform {
                        a: MultiPoly::int(*first),
                        b: b.clone(),
                    };
                }
            }
        }
        self.clone()
    }

    /// Builds the module; graded families live on `window`.
    pub fn instantiate(&self, window: Window) -> Result<GradedConformalModule, ModuleError> {
        match self {
            ModuleDescriptor::Trivial => Ok(make_trivial(window, false)),
            ModuleDescriptor::RankOne { a, b, c } => make_v_abc(a, b, c),
            ModuleDescriptor::GradedUniform { a, b } => Ok(make_v_ab(a, b, window)),
            ModuleDescriptor::GradedSequence { a, b } => {
                let restricted: BTreeMap<i64, i64> = a
                    .iter()
                    .filter(|(k, _)| window.contains(**k))
                    .map(|(k, v)| (*k, *v))
                    .collect();
                make_v_ab_seq(&restricted, b)
            }
        }
    }
}

impl fmt::Display for ModuleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleDescriptor::Trivial => write!(f, "Trivial"),
            ModuleDescriptor::RankOne { a, b, c } => write!(f, "RankOne(a={a}, b={b}, c={c})"),
            ModuleDescriptor::GradedUniform { a, b } => write!(f, "GradedUniform(a={a}, b={b})"),
            ModuleDescriptor::GradedSequence { a, b } => {
                let seq: Vec<String> = a.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                write!(f, "GradedSequence(A={{{}}}, b={b})", seq.join(", "))
            }
        }
    }
}

/// Module axiom on one triple:
/// `[L_i λ L_j] (λ+μ) v_k = L_i λ (L_j μ v_k) − L_j μ (L_i λ v_k)`.
///
/// For 𝒞𝒲 the left side is `(μ − λ) f_{i+j,k}(∂, λ+μ)`.
pub fn check_module_axiom(
    alg: &GradedConformalAlgebra,
    module: &GradedConformalModule,
    i: i64,
    j: i64,
    k: i64,
) -> Result<CheckReport, ModuleError> {
    let d = MultiPoly::d();
    let (l, m) = (MultiPoly::l(), MultiPoly::m());
    let l_plus_m = &l + &m;

    let jk = module.target(j, k);
    let ik = module.target(i, k);
    let f_jk = module.coeff(j, k)?;
    let f_i_jk = module.coeff(i, jk)?;
    let f_ik = module.coeff(i, k)?;
    let f_j_ik = module.coeff(j, ik)?;
    let out_a = module.target(i, jk);
    let out_b = module.target(j, ik);

    let mut rhs: BTreeMap<i64, MultiPoly> = BTreeMap::new();
    let first = &f_jk.substitute_many(&[(Var::D, &d + &l), (Var::L, m.clone())]) * &f_i_jk;
    let second = &f_ik.substitute(Var::D, &(&d + &m)) * &f_j_ik.substitute(Var::L, &m);
    *rhs.entry(out_a).or_default() += &first;
    *rhs.entry(out_b).or_default() += &(-second);

    let mut lhs: BTreeMap<i64, MultiPoly> = BTreeMap::new();
    let neg_sum = -&l_plus_m;
    for (target, p) in alg.bracket_rule(i, j) {
        let f = module.coeff(target, k)?;
        let scalar = p.substitute(Var::D, &neg_sum);
        let term = &scalar * &f.substitute(Var::L, &l_plus_m);
        *lhs.entry(module.target(target, k)).or_default() += &term;
    }
    let lhs = LambdaValue::from_terms(lhs);
    let rhs = LambdaValue::from_terms(rhs);
    Ok(CheckReport::compare("module_axiom", vec![i, j, k], lhs.compare_with(&rhs)))
}

/// Every admissible triple with algebra indices in `alg_window`.
pub fn check_module_axiom_window(
    alg: &GradedConformalAlgebra,
    module: &GradedConformalModule,
    alg_window: Window,
) -> SuiteReport {
    let mut suite = SuiteReport::default();
    let w = module.window();
    for k in w.iter() {
        for i in alg_window.iter() {
            for j in alg_window.iter() {
                let inside = [module.target(j, k), module.target(i, k), module.target(i, module.target(j, k))]
                    .iter()
                    .all(|x| w.contains(*x));
                let bracket_inside = alg
                    .bracket_rule(i, j)
                    .iter()
                    .all(|(t, _)| w.contains(module.target(*t, k)));
                if !(inside && bracket_inside) {
                    continue;
                }
                match check_module_axiom(alg, module, i, j, k) {
                    Ok(r) => suite.push(r),
                    Err(e) => suite.push(CheckReport::fail("module_axiom", vec![i, j, k], e.to_string())),
                }
            }
        }
    }
    suite
}

/// `x λ y` for `x ∈ A` and `y = Σ g_j v_j` via the sesquilinearity rules
/// `(f(∂)L_i) λ (g(∂)v_j) = f(−λ) g(∂+λ) f_{i,j}(∂, λ) v_{t(i,j)}`.
pub fn act(
    module: &GradedConformalModule,
    x: &ConformalElement,
    y: &LambdaValue,
    var: Var,
) -> Result<LambdaValue, ModuleError> {
    let lam = MultiPoly::var(var);
    let neg = -&lam;
    let shifted = &MultiPoly::d() + &lam;
    let mut out = LambdaValue::zero();
    for (i, f) in x.terms() {
        for (j, g) in y.terms() {
            let coeff = module.coeff(*i, *j)?.substitute(Var::L, &lam);
            let term = &(&f.substitute(Var::D, &neg) * &g.substitute(Var::D, &shifted)) * &coeff;
            out = out.add(&LambdaValue::single(module.target(*i, *j), term));
        }
    }
    Ok(out)
}

/// `(∂x) λ y = −λ (x λ y)` and `x λ (∂y) = (∂+λ)(x λ y)`.
pub fn check_sesquilinearity_action(
    module: &GradedConformalModule,
    x: &ConformalElement,
    y: &LambdaValue,
) -> Result<CheckReport, ModuleError> {
    let base = act(module, x, y, Var::L)?;
    let left = act(module, &x.derivative(), y, Var::L)?;
    let right = act(module, x, &y.mul_poly(&MultiPoly::d()), Var::L)?;
    let mut pairs = left.compare_with(&base.mul_poly(&-MultiPoly::l()));
    pairs.extend(right.compare_with(&base.mul_poly(&(&MultiPoly::d() + &MultiPoly::l()))));
    Ok(CheckReport::compare("sesquilinearity_action", vec![], pairs))
}

/// True iff every admissible structure coefficient vanishes.
pub fn is_trivial(module: &GradedConformalModule, alg_window: Window) -> bool {
    module
        .pairs(alg_window)
        .into_iter()
        .all(|(i, j)| (module.f)(i, j).is_zero())
}

/// Rescales the basis to `u_j = d_j v_j`, giving
/// `f'_{i,j} = (d_j / d_{t(i,j)}) f_{i,j}`. Missing scales default to 1.
pub fn change_basis(
    module: &GradedConformalModule,
    d: &BTreeMap<i64, Rational>,
) -> Result<GradedConformalModule, ModuleError> {
    if let Some((k, _)) = d.iter().find(|(_, v)| v.is_zero()) {
        return Err(ModuleError::ZeroScale(*k));
    }
    let base = module.f.clone();
    let d = d.clone();
    let rank_one = module.rank_one;
    let scale = move |k: i64| d.get(&k).cloned().unwrap_or_else(|| rat(1));
    Ok(GradedConformalModule {
        name: format!("{} (rescaled)", module.name),
        window: module.window,
        rank_one,
        f: Arc::new(move |i, j| {
            let t = if rank_one { j } else { i + j };
            base(i, j).scale(&(scale(j) / scale(t)))
        }),
    })
}
