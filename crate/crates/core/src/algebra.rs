//! ℤ-graded Lie conformal algebras given by structure polynomials.
//!
//! An algebra is a rule `(i, j) ↦ [(k, P(∂, λ))]` meaning
//! `[L_i λ L_j] = Σ P(∂, λ) L_k`. The bracket of arbitrary elements follows
//! from sesquilinearity:
//! `[f(∂)L_i λ g(∂)L_j] = f(−λ) g(∂+λ) [L_i λ L_j]`.
//!
//! Rules are functions rather than tables, so the index set ℤ is never
//! materialised; every check takes explicit indices or a finite window.
//!
//! Grading offsets generalise the homogeneous case `k = i + j` used by the
//! loop Virasoro algebra: a rule may emit `k = i + j + o` for any declared
//! offset `o`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::poly::{MultiPoly, Var};
use crate::report::{CheckReport, SuiteReport};
use crate::window::Window;

pub type BracketRule = Arc<dyn Fn(i64, i64) -> Vec<(i64, MultiPoly)> + Send + Sync>;

#[derive(Clone)]
pub struct GradedConformalAlgebra {
    name: String,
    rule: BracketRule,
    offsets: BTreeSet<i64>,
}

impl fmt::Debug for GradedConformalAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradedConformalAlgebra")
            .field("name", &self.name)
            .field("offsets", &self.offsets)
            .finish()
    }
}

impl GradedConformalAlgebra {
    pub fn new(
        name: impl Into<String>,
        offsets: impl IntoIterator<Item = i64>,
        rule: impl Fn(i64, i64) -> Vec<(i64, MultiPoly)> + Send + Sync + 'static,
    ) -> Self {
        GradedConformalAlgebra {
            name: name.into(),
            rule: Arc::new(rule),
            offsets: offsets.into_iter().collect(),
        }
    }

    /// Algebra with `[L_i λ L_j] = P(∂, λ) L_{i+j}` for all `i, j`.
    pub fn uniform(name: impl Into<String>, p: MultiPoly) -> Self {
        GradedConformalAlgebra::new(name, [0], move |i, j| vec![(i + j, p.clone())])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grading_offsets(&self) -> &BTreeSet<i64> {
        &self.offsets
    }

    /// Structure polynomials of `[L_i λ L_j]`, zero entries dropped.
    pub fn bracket_rule(&self, i: i64, j: i64) -> Vec<(i64, MultiPoly)> {
        (self.rule)(i, j).into_iter().filter(|(_, p)| !p.is_zero()).collect()
    }
}

/// The loop Virasoro conformal algebra: `[L_i λ L_j] = (−∂−2λ) L_{i+j}`.
pub fn make_cw() -> GradedConformalAlgebra {
    GradedConformalAlgebra::uniform("CW", cw_structure_polynomial())
}

/// `−∂ − 2λ`.
pub fn cw_structure_polynomial() -> MultiPoly {
    &(-MultiPoly::d()) - &MultiPoly::l().scale(&crate::poly::rat(2))
}

/// A finite combination `Σ h_i L_i` with coefficients in ℂ[∂] (and parameters).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConformalElement {
    terms: BTreeMap<i64, MultiPoly>,
}

/// An element of `A[λ]`: `Σ P_k L_k` with coefficients polynomial in ∂ and
/// bracket variables. Other bracket variables may appear as scalars.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LambdaValue {
    terms: BTreeMap<i64, MultiPoly>,
}

fn insert(terms: &mut BTreeMap<i64, MultiPoly>, k: i64, p: MultiPoly) {
    if p.is_zero() {
        return;
    }
    let slot = terms.entry(k).or_default();
    *slot += &p;
    if slot.is_zero() {
        terms.remove(&k);
    }
}

macro_rules! combination_impl {
    ($t:ident) => {
        impl $t {
            pub fn zero() -> Self {
                $t::default()
            }

            pub fn basis(i: i64) -> Self {
                Self::single(i, MultiPoly::one())
            }

            pub fn single(i: i64, p: MultiPoly) -> Self {
                let mut out = Self::default();
                insert(&mut out.terms, i, p);
                out
            }

            pub fn from_terms(terms: impl IntoIterator<Item = (i64, MultiPoly)>) -> Self {
                let mut out = Self::default();
                for (k, p) in terms {
                    insert(&mut out.terms, k, p);
                }
                out
            }

            pub fn terms(&self) -> &BTreeMap<i64, MultiPoly> {
                &self.terms
            }

            /// Coefficient of `L_k` (zero when absent).
            pub fn coeff(&self, k: i64) -> MultiPoly {
                self.terms.get(&k).cloned().unwrap_or_default()
            }

            pub fn is_zero(&self) -> bool {
                self.terms.is_empty()
            }

            pub fn add(&self, other: &Self) -> Self {
                let mut out = self.clone();
                for (k, p) in &other.terms {
                    insert(&mut out.terms, *k, p.clone());
                }
                out
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.add(&other.mul_poly(&MultiPoly::int(-1)))
            }

            pub fn mul_poly(&self, f: &MultiPoly) -> Self {
                Self::from_terms(self.terms.iter().map(|(k, p)| (*k, p * f)))
            }

            pub fn map_coeffs(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> Self {
                Self::from_terms(self.terms.iter().map(|(k, p)| (*k, f(p))))
            }

            pub fn substitute(&self, var: Var, value: &MultiPoly) -> Self {
                self.map_coeffs(|p| p.substitute(var, value))
            }
        }
    };
}

combination_impl!(ConformalElement);
combination_impl!(LambdaValue);

impl ConformalElement {
    /// `∂ x`.
    pub fn derivative(&self) -> Self {
        self.mul_poly(&MultiPoly::d())
    }

    pub fn as_value(&self) -> LambdaValue {
        LambdaValue {
            terms: self.terms.clone(),
        }
    }
}

impl LambdaValue {
    /// Per-basis comparison pairs against another value.
    pub fn compare_with(&self, other: &LambdaValue) -> Vec<(Option<i64>, MultiPoly, MultiPoly)> {
        let keys: BTreeSet<i64> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.into_iter()
            .map(|k| (Some(k), self.coeff(k), other.coeff(k)))
            .collect()
    }
}

impl fmt::Display for LambdaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, p)| {
                if p.is_one() {
                    format!("L_{k}")
                } else {
                    format!("({p}) L_{k}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// λ-bracket of two combinations in the bracket variable `var`.
///
/// Coefficients may contain other bracket variables, which behave as
/// scalars; `var` itself must not occur in either argument.
pub fn bracket_values(
    alg: &GradedConformalAlgebra,
    x: &LambdaValue,
    y: &LambdaValue,
    var: Var,
) -> LambdaValue {
    debug_assert!(x.terms.values().chain(y.terms.values()).all(|p| !p.contains_var(var)));
    let lam = MultiPoly::var(var);
    let neg_lam = -&lam;
    let shifted = &MultiPoly::d() + &lam;
    let mut out = BTreeMap::new();
    for (i, f) in &x.terms {
        let f_left = f.substitute(Var::D, &neg_lam);
        for (j, g) in &y.terms {
            let g_right = g.substitute(Var::D, &shifted);
            let outer = &f_left * &g_right;
            for (k, p) in alg.bracket_rule(*i, *j) {
                let p_var = if var == Var::L { p } else { p.substitute(Var::L, &lam) };
                insert(&mut out, k, &outer * &p_var);
            }
        }
    }
    LambdaValue { terms: out }
}

/// `[x λ y]` in the bracket variable `lam` (one of λ, μ, ν).
pub fn bracket(
    alg: &GradedConformalAlgebra,
    x: &ConformalElement,
    y: &ConformalElement,
    lam: Var,
) -> LambdaValue {
    bracket_values(alg, &x.as_value(), &y.as_value(), lam)
}

/// `[L_i λ L_j] = −[L_j (−λ−∂) L_i]` on one basis pair.
pub fn check_skew_symmetry(alg: &GradedConformalAlgebra, i: i64, j: i64) -> CheckReport {
    let lhs = bracket(alg, &ConformalElement::basis(i), &ConformalElement::basis(j), Var::L);
    let flipped = bracket(alg, &ConformalElement::basis(j), &ConformalElement::basis(i), Var::L);
    let image = &(-MultiPoly::l()) - &MultiPoly::d();
    let rhs = flipped.map_coeffs(|p| -p.substitute(Var::L, &image));
    CheckReport::compare("skew_symmetry", vec![i, j], lhs.compare_with(&rhs))
}

/// Jacobi identity on a basis triple, as an identity in (∂, λ, μ).
///
/// The `(λ+μ)`-slot is evaluated in the fresh variable ν and then
/// specialised, so λ inside `[L_i λ L_j]` is never captured.
pub fn check_jacobi(alg: &GradedConformalAlgebra, i: i64, j: i64, k: i64) -> CheckReport {
    let (li, lj, lk) = (
        LambdaValue::basis(i),
        LambdaValue::basis(j),
        LambdaValue::basis(k),
    );
    let inner = bracket_values(alg, &lj, &lk, Var::M);
    let lhs = bracket_values(alg, &li, &inner, Var::L);

    let ij = bracket_values(alg, &li, &lj, Var::L);
    let sum = &MultiPoly::l() + &MultiPoly::m();
    let first = bracket_values(alg, &ij, &lk, Var::N).substitute(Var::N, &sum);
    let ik = bracket_values(alg, &li, &lk, Var::L);
    let second = bracket_values(alg, &lj, &ik, Var::M);
    let rhs = first.add(&second);
    CheckReport::compare("jacobi", vec![i, j, k], lhs.compare_with(&rhs))
}

/// Every emitted index respects the declared grading offsets on the window.
pub fn check_graded(alg: &GradedConformalAlgebra, window: Window) -> CheckReport {
    for i in window.iter() {
        for j in window.iter() {
            for (k, _) in alg.bracket_rule(i, j) {
                if !alg.offsets.contains(&(k - i - j)) {
                    return CheckReport::fail(
                        "graded",
                        vec![i, j, k],
                        format!("[L_{i} λ L_{j}] emits L_{k}, offset {} not declared", k - i - j),
                    );
                }
            }
        }
    }
    CheckReport::pass("graded", vec![window.lo, window.hi])
}

pub fn check_skew_window(alg: &GradedConformalAlgebra, window: Window) -> SuiteReport {
    let mut suite = SuiteReport::default();
    for i in window.iter() {
        for j in window.iter() {
            suite.push(check_skew_symmetry(alg, i, j));
        }
    }
    suite
}

pub fn check_jacobi_window(alg: &GradedConformalAlgebra, window: Window) -> SuiteReport {
    let mut suite = SuiteReport::default();
    for i in window.iter() {
        for j in window.iter() {
            for k in window.iter() {
                suite.push(check_jacobi(alg, i, j, k));
            }
        }
    }
    suite
}

/// Skew-symmetry, Jacobi and grading over one window.
pub fn check_axioms(alg: &GradedConformalAlgebra, window: Window) -> SuiteReport {
    let mut suite = check_skew_window(alg, window);
    suite.extend(check_jacobi_window(alg, window));
    suite.push(check_graded(alg, window));
    suite
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse;

    fn p(s: &str) -> MultiPoly {
        parse(s).unwrap()
    }

    #[test]
    fn cw_bracket_examples() {
        let cw = make_cw();
        let b = bracket(&cw, &ConformalElement::basis(1), &ConformalElement::basis(2), Var::L);
        assert_eq!(b, LambdaValue::single(3, p("-d - 2*l")));

        let dl1 = ConformalElement::basis(1).derivative();
        let b = bracket(&cw, &dl1, &ConformalElement::basis(2), Var::L);
        assert_eq!(b, LambdaValue::single(3, p("l*d + 2*l^2")));

        let dl0 = ConformalElement::basis(0).derivative();
        let b = bracket(&cw, &ConformalElement::basis(0), &dl0, Var::L);
        assert_eq!(b, LambdaValue::single(0, p("(d + l)*(-d - 2*l)")));
    }

    #[test]
    fn cw_rule_and_offsets() {
        let cw = make_cw();
        assert_eq!(cw.bracket_rule(2, -2), vec![(0, p("-d - 2*l"))]);
        assert_eq!(cw.grading_offsets().iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn virasoro_subalgebra() {
        // restricted to L_0 the bracket is the conformal Virasoro one
        let cw = make_cw();
        let b = bracket(&cw, &ConformalElement::basis(0), &ConformalElement::basis(0), Var::L);
        assert_eq!(b.terms().keys().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(b.coeff(0), p("-d - 2*l"));
    }

    #[test]
    fn bracket_in_other_variable() {
        let cw = make_cw();
        let b = bracket(&cw, &ConformalElement::basis(0), &ConformalElement::basis(0), Var::M);
        assert_eq!(b.coeff(0), p("-d - 2*m"));
    }

    #[test]
    fn skew_symmetry_examples() {
        let cw = make_cw();
        assert!(check_skew_symmetry(&cw, 0, 0).passed);
        assert!(check_skew_symmetry(&cw, 3, -5).passed);
        let bad = GradedConformalAlgebra::uniform("mut", p("-d - 3*l"));
        let r = check_skew_symmetry(&bad, 0, 0);
        assert!(!r.passed);
        assert_eq!(r.witnesses[0].lhs, p("-d - 3*l"));
        assert_eq!(r.witnesses[0].rhs, p("-2*d - 3*l"));
    }

    #[test]
    fn jacobi_examples() {
        let cw = make_cw();
        assert!(check_jacobi(&cw, 0, 0, 0).passed);
        assert!(check_jacobi(&cw, 2, -1, 4).passed);
    }

    #[test]
    fn parity_mutant_breaks_jacobi() {
        let poly = cw_structure_polynomial();
        let parity = GradedConformalAlgebra::new("parity", [0], move |i, j| {
            if (i + j).rem_euclid(2) == 0 {
                vec![(i + j, poly.clone())]
            } else {
                vec![]
            }
        });
        // every term of (1,1,1) lands on an odd index, so both sides vanish
        assert!(check_jacobi(&parity, 1, 1, 1).passed);
        assert!(!check_jacobi(&parity, 0, 1, 1).passed);
        assert!(!check_jacobi_window(&parity, Window::symmetric(1)).passed());
    }

    #[test]
    fn graded_examples() {
        let cw = make_cw();
        assert!(check_graded(&cw, Window::symmetric(6)).passed);
        assert!(check_graded(&cw, Window::empty()).passed);
        let off = GradedConformalAlgebra::new("off", [0], |i, j| vec![(i + j + 1, MultiPoly::d())]);
        let r = check_graded(&off, Window::symmetric(1));
        assert!(!r.passed);
        assert_eq!(r.indices, vec![-1, -1, -1]);
    }

    #[test]
    fn mixed_offsets_are_accepted_when_declared() {
        let alg = GradedConformalAlgebra::new("two", [0, 1], |i, j| {
            vec![(i + j, MultiPoly::d()), (i + j + 1, MultiPoly::l())]
        });
        assert!(check_graded(&alg, Window::symmetric(2)).passed);
    }
}
