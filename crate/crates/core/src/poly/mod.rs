//! Exact multivariate polynomials over ℚ.
//!
//! A [`MultiPoly`] is a sparse map from exponent vectors to nonzero rational
//! coefficients. Every constructor and operation returns the canonical form,
//! so structural equality is polynomial equality. Products are reduced
//! modulo `c * cinv = 1`, which makes negative powers of the parameter `c`
//! available without leaving the polynomial ring.

mod parse;
mod var;

pub use parse::{parse, render, SyntaxError};
pub use var::Var;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomial is not divisible by the given divisor")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Degree of a polynomial in one variable; the zero polynomial has degree −∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Exponent vector indexed by registry slot, with trailing zeros trimmed.
///
/// Ordered graded-lexicographically: total degree first, then exponents
/// compared slot by slot (∂ first). The largest monomial is the leading one.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        let mut exps = vec![0; v.index() + 1];
        exps[v.index()] = e;
        Monomial::from_exponents(exps)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        reduce_unit(&mut exps);
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.get(v.index()).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (Var::from_index(i), e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let len = self.0.len().max(other.0.len());
        let exps = (0..len)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        Monomial::from_exponents(exps)
    }

    /// `self / other` when every exponent of `other` is dominated.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut exps = self.0.clone();
        for (i, &e) in other.0.iter().enumerate() {
            if exps[i] < e {
                return None;
            }
            exps[i] -= e;
        }
        Some(Monomial::from_exponents(exps))
    }

    fn without(&self, v: Var) -> Monomial {
        let mut exps = self.0.clone();
        if let Some(e) = exps.get_mut(v.index()) {
            *e = 0;
        }
        Monomial::from_exponents(exps)
    }

    fn with_exponent(&self, v: Var, e: u32) -> Monomial {
        let mut exps = self.0.clone();
        if exps.len() <= v.index() {
            exps.resize(v.index() + 1, 0);
        }
        exps[v.index()] = e;
        Monomial::from_exponents(exps)
    }
}

/// Cancels `c^m * cinv^n` down to a single power.
fn reduce_unit(exps: &mut [u32]) {
    let (c, ci) = (Var::C.index(), Var::CINV.index());
    if exps.len() > ci {
        let k = exps[c].min(exps[ci]);
        exps[c] -= k;
        exps[ci] -= k;
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree().cmp(&other.total_degree()).then_with(|| {
            let len = self.0.len().max(other.0.len());
            for i in 0..len {
                let a = self.0.get(i).copied().unwrap_or(0);
                let b = other.0.get(i).copied().unwrap_or(0);
                if a != b {
                    return a.cmp(&b);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .vars()
            .map(|(v, e)| if e == 1 { v.name() } else { format!("{}^{}", v.name(), e) })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Exact polynomial over ℚ in registered indeterminates.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        MultiPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        MultiPoly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        MultiPoly::constant(rat(n))
    }

    pub fn var(v: Var) -> Self {
        MultiPoly::term(Rational::one(), Monomial::var(v, 1))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    /// Shorthand for the operator variables.
    pub fn d() -> Self {
        MultiPoly::var(Var::D)
    }
    pub fn l() -> Self {
        MultiPoly::var(Var::L)
    }
    pub fn m() -> Self {
        MultiPoly::var(Var::M)
    }
    pub fn n() -> Self {
        MultiPoly::var(Var::N)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_one())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading term in graded-lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().map(|(v, _)| v)).collect()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    /// True when no operator variable (∂, λ, μ, ν) occurs.
    pub fn is_scalar(&self) -> bool {
        self.variables().iter().all(|v| !v.is_operator())
    }

    fn insert_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Rational, mono: &Monomial) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, v) in &self.terms {
            out.insert_term(m.mul(mono), v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replaces `var` by `value`.
    pub fn substitute(&self, var: Var, value: &MultiPoly) -> MultiPoly {
        self.substitute_many(&[(var, value.clone())])
    }

    /// Simultaneous substitution: every listed variable is replaced by its
    /// image in one pass, so images may mention the substituted variables.
    pub fn substitute_many(&self, subs: &[(Var, MultiPoly)]) -> MultiPoly {
        let mut powers: HashMap<(Var, u32), MultiPoly> = HashMap::new();
        let mut out = MultiPoly::zero();
        for (mono, coeff) in &self.terms {
            let mut rest = mono.clone();
            let mut factor = MultiPoly::one();
            for (v, image) in subs {
                let e = mono.exponent(*v);
                if e == 0 {
                    continue;
                }
                rest = rest.without(*v);
                let p = powers
                    .entry((*v, e))
                    .or_insert_with(|| image.pow(e))
                    .clone();
                factor = &factor * &p;
            }
            for (m, c) in factor.terms {
                out.insert_term(m.mul(&rest), c * coeff);
            }
        }
        out
    }

    /// Exact quotient `p / q`; fails unless `q` divides `p`.
    pub fn exact_divide(&self, q: &MultiPoly) -> Result<MultiPoly, PolyError> {
        let (lead_m, lead_c) = q.leading_term().ok_or(PolyError::DivisionByZero)?;
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero();
        while let Some((m, c)) = rem.leading_term() {
            let t = m.checked_div(lead_m).ok_or(PolyError::NotDivisible)?;
            let coeff = c / lead_c;
            rem = &rem - &q.mul_monomial(&coeff, &t);
            quot.insert_term(t, coeff);
        }
        if &quot * q != *self {
            return Err(PolyError::NotDivisible);
        }
        Ok(quot)
    }

    pub fn degree_in(&self, var: Var) -> Degree {
        self.terms
            .keys()
            .map(|m| m.exponent(var))
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(Monomial::total_degree)
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    /// Coefficient of `var^k`, as a polynomial in the other indeterminates.
    pub fn coefficient_of(&self, var: Var, k: u32) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            if m.exponent(var) == k {
                out.insert_term(m.without(var), c.clone());
            }
        }
        out
    }

    /// Coefficients of every power of `var`, lowest first.
    pub fn coefficients_in(&self, var: Var) -> Vec<MultiPoly> {
        match self.degree_in(var) {
            Degree::MinusInfinity => Vec::new(),
            Degree::Finite(d) => (0..=d).map(|k| self.coefficient_of(var, k)).collect(),
        }
    }

    pub fn formal_derivative(&self, var: Var) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e > 0 {
                out.insert_term(m.with_exponent(var, e - 1), c * rat(e as i64));
            }
        }
        out
    }

    /// Coefficient of one monomial.
    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Splits off the part that depends on `vars`: returns a map from
    /// monomials in `vars` to coefficient polynomials in everything else.
    pub fn collect_by(&self, vars: &[Var]) -> BTreeMap<Monomial, MultiPoly> {
        let mut out: BTreeMap<Monomial, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut key = vec![0u32; m.exponents().len()];
            let mut rest = m.exponents().to_vec();
            for v in vars {
                if let Some(e) = rest.get_mut(v.index()) {
                    key[v.index()] = *e;
                    *e = 0;
                }
            }
            out.entry(Monomial::from_exponents(key))
                .or_default()
                .insert_term(Monomial::from_exponents(rest), c.clone());
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", render(self))
    }
}

impl FromStr for MultiPoly {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render(self))
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for MultiPoly {
    fn from(c: Rational) -> Self {
        MultiPoly::constant(c)
    }
}

impl From<i64> for MultiPoly {
    fn from(n: i64) -> Self {
        MultiPoly::int(n)
    }
}

impl From<Var> for MultiPoly {
    fn from(v: Var) -> Self {
        MultiPoly::var(v)
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.insert_term(m.clone(), c.clone());
        }
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly { (&self).$f(&rhs) }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: &MultiPoly) -> MultiPoly { (&self).$f(rhs) }
        }
        impl $tr<MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly { self.$f(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

/// Integer power of a rational, negative exponents included.
pub fn rat_pow(base: &Rational, e: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= base;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// `c^i` as a polynomial: `c^i` for `i ≥ 0`, `cinv^{-i}` otherwise.
pub fn c_power(i: i64) -> MultiPoly {
    if i >= 0 {
        MultiPoly::var(Var::C).pow(i as u32)
    } else {
        MultiPoly::var(Var::CINV).pow(i.unsigned_abs() as u32)
    }
}

/// Rational with absolute value helper used by renderers.
pub(crate) fn is_negative(c: &Rational) -> bool {
    c.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MultiPoly {
        parse(s).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(p("d + l") + p("-l"), p("d"));
        assert_eq!(MultiPoly::zero() + p("a*l + b"), p("a*l + b"));
        assert_eq!(p("-d - 2*l") + p("-d - 2*m"), p("-2*d - 2*l - 2*m"));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("m - l") * MultiPoly::one(), p("m - l"));
        assert_eq!(p("l") * p("d + 2*l"), p("l*d + 2*l^2"));
        assert_eq!(
            p("d - b") * p("d - b + l"),
            p("d^2 - 2*b*d + l*d + b^2 - b*l")
        );
    }

    #[test]
    fn substitute_examples() {
        assert_eq!(p("-d - 2*m").substitute(Var::D, &p("d + l")), p("-d - l - 2*m"));
        assert_eq!(p("-d - 2*l").substitute(Var::L, &p("-l - d")), p("d + 2*l"));
        let q = p("d^3*l - 7/2*a*d + 1");
        assert_eq!(q.substitute(Var::D, &p("d")), q);
    }

    #[test]
    fn simultaneous_substitution_swaps() {
        let q = p("d + 2*l");
        let swapped = q.substitute_many(&[(Var::D, p("l")), (Var::L, p("d"))]);
        assert_eq!(swapped, p("l + 2*d"));
    }

    #[test]
    fn exact_divide_examples() {
        assert_eq!(p("l*d + 2*l^2").exact_divide(&p("l")).unwrap(), p("d + 2*l"));
        let q = p("d^2 - a*l + 3");
        assert_eq!(q.exact_divide(&MultiPoly::one()).unwrap(), q);
        assert_eq!(p("d + l").exact_divide(&p("m")), Err(PolyError::NotDivisible));
        assert_eq!(p("d").exact_divide(&MultiPoly::zero()), Err(PolyError::DivisionByZero));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(p("-d - 2*l").degree_in(Var::D), Degree::Finite(1));
        assert_eq!(MultiPoly::zero().degree_in(Var::L), Degree::MinusInfinity);
        assert_eq!((p("d - b") * p("d - b + l")).degree_in(Var::D), Degree::Finite(2));
        assert!(Degree::MinusInfinity < Degree::Finite(0));
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(p("-d - 2*l").coefficient_of(Var::L, 1), p("-2"));
        assert_eq!(p("a*l + b - d").coefficient_of(Var::L, 0), p("b - d"));
        assert!(MultiPoly::zero().coefficient_of(Var::D, 3).is_zero());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("(d - b)^2").formal_derivative(Var::D), p("2*d - 2*b"));
        assert!(p("l").formal_derivative(Var::D).is_zero());
        assert_eq!(p("d^3").formal_derivative(Var::D), p("3*d^2"));
    }

    #[test]
    fn unit_reduction() {
        let c = MultiPoly::var(Var::C);
        let ci = MultiPoly::var(Var::CINV);
        assert_eq!(&c * &ci, MultiPoly::one());
        assert_eq!(c_power(3) * c_power(-5), c_power(-2));
        assert_eq!(c_power(0), MultiPoly::one());
    }

    #[test]
    fn collect_by_splits_operator_part() {
        let q = p("a*l*m + 2*l*m - b");
        let parts = q.collect_by(&[Var::L, Var::M]);
        assert_eq!(parts.len(), 2);
        let lm = Monomial::var(Var::L, 1).mul(&Monomial::var(Var::M, 1));
        assert_eq!(parts[&lm], p("a + 2"));
        assert_eq!(parts[&Monomial::one()], p("-b"));
    }

    #[test]
    fn constants() {
        assert_eq!(p("3/4").as_constant(), Some(ratio(3, 4)));
        assert_eq!(MultiPoly::zero().as_constant(), Some(rat(0)));
        assert_eq!(p("d").as_constant(), None);
        assert!(p("a*b + 2").is_scalar());
        assert!(!p("a*l").is_scalar());
    }
}
