use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cw_core::algebra::{bracket, make_cw};
use cw_core::module::{change_basis, check_module_axiom_window, check_sesquilinearity_action, make_v_ab};
use cw_core::poly::{ratio, Rational};
use cw_core::sample::{random_element, random_nonzero_poly, random_poly};
use cw_core::{parse, render, MultiPoly, Var, Window};

const VARS: [Var; 5] = [Var::D, Var::L, Var::M, Var::A, Var::B];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_poly(&mut r, &VARS, 6, 9);
        let y = random_poly(&mut r, &VARS, 6, 9);
        let z = random_poly(&mut r, &VARS, 6, 9);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert!((&x - &x).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_render_round_trip(seed in any::<u64>(), num in 1i64..9, den in 1i64..9) {
        let x = random_poly(&mut rng(seed), &VARS, 6, 9).scale(&ratio(num, den));
        prop_assert_eq!(parse(&render(&x)).unwrap(), x);
    }

    #[test]
    fn substitute_identity(seed in any::<u64>()) {
        let x = random_poly(&mut rng(seed), &VARS, 6, 9);
        for v in VARS {
            prop_assert_eq!(x.substitute(v, &MultiPoly::var(v)), x.clone());
        }
    }

    #[test]
    fn exact_divide_inverts_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poly(&mut r, &VARS, 4, 9);
        let q = random_nonzero_poly(&mut r, &VARS, 3, 9);
        prop_assert_eq!((&p * &q).exact_divide(&q).unwrap(), p);
    }

    #[test]
    fn coefficients_reconstruct(seed in any::<u64>(), which in 0usize..5) {
        let x = random_poly(&mut rng(seed), &VARS, 6, 9);
        let v = VARS[which];
        let rebuilt = x
            .coefficients_in(v)
            .iter()
            .enumerate()
            .fold(MultiPoly::zero(), |acc, (k, c)| &acc + &(c * &MultiPoly::var(v).pow(k as u32)));
        prop_assert_eq!(rebuilt, x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_sesquilinearity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cw = make_cw();
        let x = random_element(&mut r, 3, 3);
        let y = random_element(&mut r, 3, 3);
        let base = bracket(&cw, &x, &y, Var::L);
        prop_assert_eq!(bracket(&cw, &x.derivative(), &y, Var::L), base.mul_poly(&-MultiPoly::l()));
        prop_assert_eq!(
            bracket(&cw, &x, &y.derivative(), Var::L),
            base.mul_poly(&(&MultiPoly::d() + &MultiPoly::l()))
        );
    }

    #[test]
    fn module_action_sesquilinearity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = make_v_ab(&MultiPoly::var(Var::A), &MultiPoly::var(Var::B), Window::symmetric(6));
        let x = random_element(&mut r, 2, 2);
        let y = random_element(&mut r, 2, 2).as_value();
        prop_assert!(check_sesquilinearity_action(&v, &x, &y).unwrap().passed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn change_basis_preserves_axiom_verdict(seed in any::<u64>()) {
        let mut r = rng(seed);
        let w = Window::symmetric(2);
        let alg_window = w.differences();
        let cw = make_cw();
        let mut module = make_v_ab(&MultiPoly::int(r.gen_range(-3..=3)), &MultiPoly::var(Var::B), w);
        if r.gen_bool(0.5) {
            let i = r.gen_range(-2..=2);
            let j = r.gen_range(w.lo.max(w.lo - i)..=w.hi.min(w.hi - i));
            let delta = random_nonzero_poly(&mut r, &[Var::D, Var::L], 1, 3);
            module = module.with_override(i, j, &module.coeff(i, j).unwrap() + &delta);
        }
        let scales: BTreeMap<i64, Rational> = w
            .iter()
            .map(|k| (k, ratio(r.gen_range(1..=9) * if r.gen_bool(0.5) { 1 } else { -1 }, r.gen_range(1..=5))))
            .collect();
        let rescaled = change_basis(&module, &scales).unwrap();
        prop_assert_eq!(
            check_module_axiom_window(&cw, &module, alg_window).passed(),
            check_module_axiom_window(&cw, &rescaled, alg_window).passed()
        );
    }
}
