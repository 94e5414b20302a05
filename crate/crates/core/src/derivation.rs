//! Conformal derivations: Leibniz checking, inner derivations, the split
//! into homogeneous degree components and recovery of the inner generator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{bracket, bracket_values, make_cw, ConformalElement, GradedConformalAlgebra, LambdaValue};
use crate::poly::{MultiPoly, PolyError, Var};
use crate::report::CheckReport;
use crate::sample::{random_element, random_nonzero_poly};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("λ does not divide f_0(λ, −λ) = {0}")]
    NotDivisible(MultiPoly),
    #[error("reconstructed inner derivation differs at L_{index}: expected {expected}, found {found}")]
    VerificationFailed {
        index: i64,
        expected: MultiPoly,
        found: MultiPoly,
    },
    #[error("λ-degree {degree} exceeds bound {bound}")]
    DegreeBoundExceeded { degree: u32, bound: u32 },
}

pub type ActionFn = Arc<dyn Fn(i64) -> Vec<(i64, MultiPoly)> + Send + Sync>;

/// `D_λ(L_i) = Σ_k g_{i,k}(∂, λ) L_k` with `|k − i| ≤ support_bound`.
#[derive(Clone)]
pub struct ConformalDerivation {
    name: String,
    action: ActionFn,
    support_bound: u64,
}

impl fmt::Debug for ConformalDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalDerivation")
            .field("name", &self.name)
            .field("support_bound", &self.support_bound)
            .finish()
    }
}

impl ConformalDerivation {
    pub fn new(
        name: impl Into<String>,
        support_bound: u64,
        action: impl Fn(i64) -> Vec<(i64, MultiPoly)> + Send + Sync + 'static,
    ) -> Self {
        ConformalDerivation {
            name: name.into(),
            action: Arc::new(action),
            support_bound,
        }
    }

    pub fn zero() -> Self {
        ConformalDerivation::new("0", 0, |_| Vec::new())
    }

    /// Table of `i ↦ [(offset, g)]` meaning `D_λ(L_i) = Σ g L_{i+offset}`.
    /// Indices missing from the table map to zero.
    pub fn from_table(name: impl Into<String>, table: BTreeMap<i64, Vec<(i64, MultiPoly)>>) -> Self {
        let bound = table
            .values()
            .flatten()
            .map(|(off, _)| off.unsigned_abs())
            .max()
            .unwrap_or(0);
        let table = Arc::new(table);
        ConformalDerivation::new(name, bound, move |i| {
            table
                .get(&i)
                .map(|row| row.iter().map(|(off, g)| (i + off, g.clone())).collect())
                .unwrap_or_default()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support_bound(&self) -> u64 {
        self.support_bound
    }

    /// `D_λ(L_i)`.
    pub fn apply(&self, i: i64) -> LambdaValue {
        let out = LambdaValue::from_terms((self.action)(i));
        debug_assert!(out.terms().keys().all(|k| (k - i).unsigned_abs() <= self.support_bound));
        out
    }

    /// `D_λ(Σ h_k(∂) L_k) = Σ h_k(∂ + λ) D_λ(L_k)`.
    pub fn apply_element(&self, x: &ConformalElement) -> LambdaValue {
        let shifted = &MultiPoly::d() + &MultiPoly::l();
        x.terms().iter().fold(LambdaValue::zero(), |acc, (k, h)| {
            acc.add(&self.apply(*k).mul_poly(&h.substitute(Var::D, &shifted)))
        })
    }
}

/// `ad_x`, i.e. `D_λ(y) = [x λ y]`.
pub fn inner(alg: &GradedConformalAlgebra, x: &ConformalElement) -> ConformalDerivation {
    let spread = x.terms().keys().map(|k| k.unsigned_abs()).max().unwrap_or(0);
    let offset = alg.grading_offsets().iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
    let alg = alg.clone();
    let x = x.clone();
    ConformalDerivation::new(format!("ad({})", x.as_value()), spread + offset, move |i| {
        bracket(&alg, &x, &ConformalElement::basis(i), Var::L)
            .terms()
            .iter()
            .map(|(k, p)| (*k, p.clone()))
            .collect()
    })
}

/// `D_λ[L_i μ L_j] = [(D_λ L_i) (λ+μ) L_j] + [L_i μ (D_λ L_j)]`.
pub fn check_leibniz(alg: &GradedConformalAlgebra, d: &ConformalDerivation, i: i64, j: i64) -> CheckReport {
    let shift = &MultiPoly::d() + &MultiPoly::l();
    let sum = &MultiPoly::l() + &MultiPoly::m();
    let inner_bracket = bracket(alg, &ConformalElement::basis(i), &ConformalElement::basis(j), Var::M);
    let lhs = inner_bracket
        .terms()
        .iter()
        .fold(LambdaValue::zero(), |acc, (k, p)| {
            acc.add(&d.apply(*k).mul_poly(&p.substitute(Var::D, &shift)))
        });
    let first = bracket_values(alg, &d.apply(i), &LambdaValue::basis(j), Var::N).substitute(Var::N, &sum);
    let second = bracket_values(alg, &LambdaValue::basis(i), &d.apply(j), Var::M);
    let rhs = first.add(&second);
    CheckReport::compare("leibniz", vec![i, j], lhs.compare_with(&rhs))
}

/// `D^c_λ(L_i) = f_i(∂, λ) L_{i+c}`.
#[derive(Clone)]
pub struct DegreeComponent {
    pub c: i64,
    f: Arc<dyn Fn(i64) -> MultiPoly + Send + Sync>,
}

impl fmt::Debug for DegreeComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DegreeComponent").field("c", &self.c).finish()
    }
}

impl DegreeComponent {
    pub fn new(c: i64, f: impl Fn(i64) -> MultiPoly + Send + Sync + 'static) -> Self {
        DegreeComponent { c, f: Arc::new(f) }
    }

    pub fn f(&self, i: i64) -> MultiPoly {
        (self.f)(i)
    }

    pub fn as_derivation(&self) -> ConformalDerivation {
        let f = self.f.clone();
        let c = self.c;
        ConformalDerivation::new(format!("D^{c}"), c.unsigned_abs(), move |i| vec![(i + c, f(i))])
    }
}

/// Splits `D` by output offset `c = k − i` as seen on `window`.
pub fn degree_components(d: &ConformalDerivation, window: Window) -> Vec<DegreeComponent> {
    let offsets: BTreeSet<i64> = window
        .iter()
        .flat_map(|i| d.apply(i).terms().keys().map(move |k| k - i).collect::<Vec<_>>())
        .collect();
    offsets
        .into_iter()
        .map(|c| {
            let d = d.clone();
            DegreeComponent::new(c, move |i| d.apply(i).coeff(i + c))
        })
        .collect()
}

/// Recovers `g(∂)L_c` with `D^c = ad_{g(∂)L_c}` from
/// `g(λ) = f_0(λ, −λ) / λ`, then checks the reconstruction on `window`.
pub fn extract_inner(dc: &DegreeComponent, window: Window, deg_bound: u32) -> Result<ConformalElement, DerivationError> {
    let f0 = dc.f(0);
    if let Some(degree) = f0.degree_in(Var::L).finite() {
        if degree > deg_bound + 1 {
            return Err(DerivationError::DegreeBoundExceeded { degree, bound: deg_bound + 1 });
        }
    }
    let diagonal = f0.substitute_many(&[(Var::D, MultiPoly::l()), (Var::L, -MultiPoly::l())]);
    let g_lambda = diagonal
        .exact_divide(&MultiPoly::l())
        .map_err(|_: PolyError| DerivationError::NotDivisible(diagonal.clone()))?;
    let g = g_lambda.substitute(Var::L, &MultiPoly::d());
    let x = ConformalElement::single(dc.c, g);
    let ad = inner(&make_cw(), &x);
    for i in window.iter() {
        let got = ad.apply(i);
        let expected = dc.f(i);
        let stray = got.terms().keys().find(|k| **k != i + dc.c);
        if let Some(k) = stray {
            return Err(DerivationError::VerificationFailed {
                index: *k,
                expected: MultiPoly::zero(),
                found: got.coeff(*k),
            });
        }
        let found = got.coeff(i + dc.c);
        if found != expected {
            return Err(DerivationError::VerificationFailed { index: i + dc.c, expected, found });
        }
    }
    Ok(x)
}

/// Counts gathered by [`verify_der_equals_inn`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CampaignOutcome {
    pub inner_trials: usize,
    pub leibniz_passes: usize,
    pub round_trips: usize,
    pub non_inner_trials: usize,
    pub leibniz_failures: usize,
    pub discarded_inner: usize,
    pub report: CheckReport,
}

fn passes_on_window(alg: &GradedConformalAlgebra, d: &ConformalDerivation, window: Window) -> bool {
    window
        .iter()
        .all(|i| window.iter().all(|j| check_leibniz(alg, d, i, j).passed))
}

/// Round-trips `inner(x)` through [`degree_components`] and [`extract_inner`].
pub fn round_trip(x: &ConformalElement, window: Window, deg_bound: u32) -> Result<ConformalElement, DerivationError> {
    let d = inner(&make_cw(), x);
    let mut sum = ConformalElement::zero();
    for comp in degree_components(&d, window) {
        sum = sum.add(&extract_inner(&comp, window, deg_bound)?);
    }
    Ok(sum)
}

/// Random family `f_i(∂, λ) L_{i+c}` that is not of the inner shape.
fn random_candidate(rng: &mut ChaCha8Rng, deg_bound: u32) -> DegreeComponent {
    let c = rng.gen_range(-3..=3);
    let base = random_nonzero_poly(rng, &[Var::D, Var::L], deg_bound.max(1), 5);
    let drift = random_nonzero_poly(rng, &[Var::D, Var::L], deg_bound.max(1), 5);
    DegreeComponent::new(c, move |i| &base + &drift.scale(&crate::poly::rat(i * i)))
}

/// Randomized campaign: random inner derivations satisfy Leibniz and
/// round-trip exactly; random non-inner families violate Leibniz.
pub fn verify_der_equals_inn(window: Window, deg_bound: u32, trials: usize, seed: u64) -> CampaignOutcome {
    let cw = make_cw();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CampaignOutcome {
        inner_trials: 0,
        leibniz_passes: 0,
        round_trips: 0,
        non_inner_trials: 0,
        leibniz_failures: 0,
        discarded_inner: 0,
        report: CheckReport::pass("der_equals_inn", vec![]),
    };
    if window.is_empty() {
        out.report = out.report.with_note("empty window");
        return out;
    }
    for _ in 0..trials {
        let x = random_element(&mut rng, 3, deg_bound);
        out.inner_trials += 1;
        if passes_on_window(&cw, &inner(&cw, &x), window) {
            out.leibniz_passes += 1;
        }
        if round_trip(&x, window, deg_bound).ok().as_ref() == Some(&x) {
            out.round_trips += 1;
        }
    }
    while out.non_inner_trials < trials {
        let cand = random_candidate(&mut rng, deg_bound);
        if extract_inner(&cand, window, deg_bound).is_ok() {
            out.discarded_inner += 1;
            continue;
        }
        out.non_inner_trials += 1;
        if !passes_on_window(&cw, &cand.as_derivation(), window) {
            out.leibniz_failures += 1;
        }
    }
    let ok = out.leibniz_passes == trials && out.round_trips == trials && out.leibniz_failures == trials;
    let note = format!(
        "inner: {}/{} Leibniz, {}/{} round-trips; non-inner: {}/{} Leibniz failures ({} inner draws discarded)",
        out.leibniz_passes, trials, out.round_trips, trials, out.leibniz_failures, trials, out.discarded_inner
    );
    out.report = if ok {
        CheckReport::pass("der_equals_inn", vec![]).with_note(note)
    } else {
        CheckReport::fail("der_equals_inn", vec![], note)
    };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse;

    fn p(s: &str) -> MultiPoly {
        parse(s).unwrap()
    }

    #[test]
    fn inner_examples() {
        let cw = make_cw();
        let d = inner(&cw, &ConformalElement::basis(0));
        for i in -3..=3 {
            assert_eq!(d.apply(i), LambdaValue::single(i, p("-d - 2*l")));
        }
        let d = inner(&cw, &ConformalElement::single(2, p("d^2 + 1")));
        assert_eq!(d.apply(-1), LambdaValue::single(1, p("(l^2 + 1)*(-d - 2*l)")));
        let zero = inner(&cw, &ConformalElement::zero());
        assert!(zero.apply(4).is_zero());
    }

    #[test]
    fn leibniz_holds_for_inner() {
        let cw = make_cw();
        let x = ConformalElement::from_terms([(1, p("d^2 - 3")), (-2, p("2*d + 1")), (0, p("1"))]);
        let d = inner(&cw, &x);
        for i in -3..=3 {
            for j in -3..=3 {
                assert!(check_leibniz(&cw, &d, i, j).passed, "({i},{j})");
            }
        }
    }

    #[test]
    fn constant_lambda_family_fails() {
        let cw = make_cw();
        let d = ConformalDerivation::new("lambda", 0, |i| vec![(i, MultiPoly::l())]);
        assert!(!check_leibniz(&cw, &d, 0, 0).passed);
    }

    #[test]
    fn components_of_inner() {
        let cw = make_cw();
        let x = ConformalElement::from_terms([(1, p("1")), (3, p("d"))]);
        let comps = degree_components(&inner(&cw, &x), Window::symmetric(3));
        assert_eq!(comps.iter().map(|c| c.c).collect::<Vec<_>>(), vec![1, 3]);
        for comp in &comps {
            assert!(check_leibniz(&cw, &comp.as_derivation(), 1, -2).passed);
        }
        assert!(degree_components(&ConformalDerivation::zero(), Window::symmetric(3)).is_empty());
    }

    #[test]
    fn extraction_examples() {
        let cw = make_cw();
        let w = Window::symmetric(4);
        let comps = degree_components(&inner(&cw, &ConformalElement::basis(0)), w);
        assert_eq!(extract_inner(&comps[0], w, 4).unwrap(), ConformalElement::basis(0));

        let target = ConformalElement::single(2, p("d^2 + 1"));
        let comps = degree_components(&inner(&cw, &target), w);
        assert_eq!(extract_inner(&comps[0], w, 4).unwrap(), target);

        let ones = DegreeComponent::new(0, |_| MultiPoly::one());
        assert!(matches!(extract_inner(&ones, w, 4), Err(DerivationError::NotDivisible(_))));

        let drifting = DegreeComponent::new(0, |i| p("-d - 2*l").scale(&crate::poly::rat(1 + i * i)));
        assert!(matches!(
            extract_inner(&drifting, w, 4),
            Err(DerivationError::VerificationFailed { .. })
        ));
        let big = DegreeComponent::new(0, |_| p("l^9"));
        assert!(matches!(
            extract_inner(&big, w, 4),
            Err(DerivationError::DegreeBoundExceeded { .. })
        ));
    }

    #[test]
    fn table_derivation_matches_inner() {
        let cw = make_cw();
        let table: BTreeMap<i64, Vec<(i64, MultiPoly)>> =
            (-2..=2).map(|i| (i, vec![(0, p("-d - 2*l"))])).collect();
        let d = ConformalDerivation::from_table("t", table);
        assert_eq!(d.support_bound(), 0);
        assert!(check_leibniz(&cw, &d, 1, 1).passed);
        assert_eq!(d.apply(7), LambdaValue::zero());
    }

    #[test]
    fn small_campaign() {
        let out = verify_der_equals_inn(Window::symmetric(2), 3, 5, 7);
        assert!(out.report.passed, "{:?}", out.report.note);
        assert_eq!(out.round_trips, 5);
        let empty = verify_der_equals_inn(Window::empty(), 3, 5, 7);
        assert!(empty.report.passed);
    }
}
