//! Single-monomial mutants of 𝒞𝒲 and of the built-in module tables, used
//! to confirm that the checkers actually detect broken structure.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{check_jacobi_window, check_skew_window, cw_structure_polynomial, make_cw, GradedConformalAlgebra};
use crate::module::{check_module_axiom_window, make_v_ab, make_v_ab_seq, make_v_abc, GradedConformalModule};
use crate::poly::{rat, MultiPoly, Var};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MutantOutcome {
    pub target: String,
    pub mutation: String,
    pub detected: bool,
    pub caught_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MutationSuite {
    pub outcomes: Vec<MutantOutcome>,
    /// Unmutated controls must pass every checker.
    pub controls_pass: bool,
}

impl MutationSuite {
    pub fn undetected(&self) -> impl Iterator<Item = &MutantOutcome> {
        self.outcomes.iter().filter(|o| !o.detected)
    }

    pub fn passed(&self) -> bool {
        self.controls_pass && self.outcomes.iter().all(|o| o.detected)
    }
}

/// `ε·m` for `ε ∈ {−1, 1, 2}` and `m ∈ {1, ∂, λ}`.
pub fn single_monomial_perturbations() -> Vec<MultiPoly> {
    let monomials = [MultiPoly::one(), MultiPoly::d(), MultiPoly::l()];
    [-1, 1, 2]
        .into_iter()
        .flat_map(|eps| monomials.iter().map(move |m| m.scale(&rat(eps))))
        .collect()
}

/// The nine mutants `−∂ − 2λ + ε·m` of 𝒞𝒲.
pub fn cw_mutants() -> Vec<(String, GradedConformalAlgebra)> {
    single_monomial_perturbations()
        .into_iter()
        .map(|delta| {
            let p = &cw_structure_polynomial() + &delta;
            (p.to_string(), GradedConformalAlgebra::uniform(format!("CW[{p}]"), p))
        })
        .collect()
}

fn algebra_failures(alg: &GradedConformalAlgebra, window: Window) -> Vec<String> {
    let mut caught = Vec::new();
    if !check_skew_window(alg, window).passed() {
        caught.push("skew_symmetry".to_string());
    }
    if !check_jacobi_window(alg, window).passed() {
        caught.push("jacobi".to_string());
    }
    caught
}

/// Built-in module tables: symbolic `V_{a,b}`, `V_{a,b,c}` and an
/// alternating `V_{A,b}`.
pub fn builtin_modules() -> Vec<GradedConformalModule> {
    let (a, b, c) = (MultiPoly::var(Var::A), MultiPoly::var(Var::B), MultiPoly::var(Var::C));
    let seq: BTreeMap<i64, i64> = (-2..=2).map(|k| (k, if k % 2 == 0 { 0 } else { -1 })).collect();
    vec![
        make_v_ab(&a, &b, Window::symmetric(2)),
        make_v_abc(&a, &b, &c).expect("c is the symbol c"),
        make_v_ab_seq(&seq, &b).expect("valid sequence"),
    ]
}

/// Runs every algebra and module mutant plus the unmutated controls.
/// `window` bounds the algebra sweeps; module sweeps use each module's own
/// window (rank-one modules use `window`).
pub fn mutate_test(window: Window) -> MutationSuite {
    let cw = make_cw();
    let mut outcomes = Vec::new();
    let mut controls_pass = algebra_failures(&cw, window).is_empty();

    for (label, alg) in cw_mutants() {
        let caught = algebra_failures(&alg, window);
        outcomes.push(MutantOutcome {
            target: "CW".to_string(),
            mutation: format!("P = {label}"),
            detected: !caught.is_empty(),
            caught_by: caught,
        });
    }

    for module in builtin_modules() {
        let alg_window = module.algebra_window(window);
        controls_pass &= check_module_axiom_window(&cw, &module, alg_window).passed();
        let entries = [(0, 0), (1, module.window().lo)];
        for (i, j) in entries {
            let Ok(base) = module.coeff(i, j) else { continue };
            for delta in single_monomial_perturbations() {
                let mutant = module.with_override(i, j, &base + &delta);
                let detected = !check_module_axiom_window(&cw, &mutant, alg_window).passed();
                outcomes.push(MutantOutcome {
                    target: module.name().to_string(),
                    mutation: format!("f({i},{j}) += {delta}"),
                    detected,
                    caught_by: if detected { vec!["module_axiom".to_string()] } else { Vec::new() },
                });
            }
        }
    }
    MutationSuite { outcomes, controls_pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_skew_symmetry;
    use crate::poly::parse;

    #[test]
    fn nine_distinct_mutants() {
        let mutants = cw_mutants();
        assert_eq!(mutants.len(), 9);
        let labels: std::collections::BTreeSet<_> = mutants.iter().map(|(l, _)| l.clone()).collect();
        assert_eq!(labels.len(), 9);
        assert!(labels.contains("-d - 3*l"));
        assert!(!labels.contains("-d - 2*l"));
    }

    #[test]
    fn every_cw_mutant_fails_skew() {
        for (label, alg) in cw_mutants() {
            assert!(!check_skew_symmetry(&alg, 0, 0).passed, "{label}");
        }
    }

    #[test]
    fn module_mutant_example() {
        let cw = make_cw();
        let v = make_v_ab(&MultiPoly::var(Var::A), &MultiPoly::var(Var::B), Window::symmetric(2));
        let bad = v.with_override(0, 0, parse("-d + a*l + b + 1").unwrap());
        assert!(!check_module_axiom_window(&cw, &bad, Window::symmetric(4)).passed());
    }

    #[test]
    fn full_suite_small_window() {
        let suite = mutate_test(Window::symmetric(2));
        assert!(suite.controls_pass);
        assert_eq!(suite.undetected().count(), 0);
        assert!(suite.outcomes.len() >= 9 + 3 * 9);
    }
}
