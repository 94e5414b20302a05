//! Seeded random inputs for property campaigns.

use rand::Rng;

use crate::algebra::ConformalElement;
use crate::poly::{MultiPoly, Var};

/// Random polynomial in `vars` of total degree at most `max_deg` with
/// integer coefficients in `[−max_coeff, max_coeff]`.
pub fn random_poly(rng: &mut impl Rng, vars: &[Var], max_deg: u32, max_coeff: i64) -> MultiPoly {
    let mut out = MultiPoly::zero();
    let terms = rng.gen_range(1..=4);
    for _ in 0..terms {
        let mut m = MultiPoly::one();
        let deg = rng.gen_range(0..=max_deg);
        for _ in 0..deg {
            if vars.is_empty() {
                break;
            }
            m = &m * &MultiPoly::var(vars[rng.gen_range(0..vars.len())]);
        }
        let c = rng.gen_range(-max_coeff..=max_coeff);
        out += &m.scale(&crate::poly::rat(c));
    }
    out
}

/// Nonzero variant of [`random_poly`].
pub fn random_nonzero_poly(rng: &mut impl Rng, vars: &[Var], max_deg: u32, max_coeff: i64) -> MultiPoly {
    loop {
        let p = random_poly(rng, vars, max_deg, max_coeff);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Nonzero element `Σ h_k(∂) L_k` with support inside `[−support, support]`.
pub fn random_element(rng: &mut impl Rng, support: i64, max_deg: u32) -> ConformalElement {
    loop {
        let count = rng.gen_range(1..=3);
        let x = ConformalElement::from_terms((0..count).map(|_| {
            let k = rng.gen_range(-support..=support);
            (k, random_poly(rng, &[Var::D], max_deg, 5))
        }));
        if !x.is_zero() {
            return x;
        }
    }
}
