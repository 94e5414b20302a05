//! Truncated formal distributions over the loop Virasoro Lie algebra.
//!
//! A genuine formal distribution is a doubly infinite series; here only a
//! finite band of coefficients is stored. Each distribution also carries a
//! validity region: the coefficients there are exactly those of the infinite
//! series. Operations that mix neighbouring coefficients (multiplying by
//! `z − w`, differentiating, taking residues) shrink the validity region, and
//! every comparison is made only inside it.
//!
//! Two-variable regions are rectangles in `(m, n)` (the exponents of `z` and
//! `w`) intersected with a strip `m + n ∈ [s_lo, s_hi]`. The strip is what
//! reconstructions from `∂_w^j δ(z, w)` naturally produce.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::LambdaValue;
use crate::poly::{rat, MultiPoly, Rational};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("empty band")]
    EmptyBand,
    #[error("truncation leaves no coefficients to check")]
    RegionExhausted,
    #[error("distribution is not local up to order {0}")]
    NotLocal(u32),
    #[error("coefficient distribution is not of the form h(∂_w) L_k(w): {0}")]
    NotRecognized(String),
}

/// Basis of the coefficient space: the loop generators `L_{α,i}` plus a
/// sentinel for scalar-valued distributions such as δ(z, w).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisSymbol {
    Scalar,
    Loop { alpha: i64, index: i64 },
}

/// Finite linear combination `Σ q L_{α,i}` (or a scalar).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoopElement {
    terms: BTreeMap<BasisSymbol, Rational>,
}

impl LoopElement {
    pub fn zero() -> Self {
        LoopElement::default()
    }

    pub fn scalar(q: Rational) -> Self {
        LoopElement::single(BasisSymbol::Scalar, q)
    }

    pub fn loop_basis(alpha: i64, index: i64) -> Self {
        LoopElement::single(BasisSymbol::Loop { alpha, index }, Rational::one())
    }

    pub fn single(b: BasisSymbol, q: Rational) -> Self {
        let mut out = LoopElement::zero();
        out.add_term(b, q);
        out
    }

    pub fn terms(&self) -> &BTreeMap<BasisSymbol, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, b: BasisSymbol, q: Rational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(b).or_insert_with(Rational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&b);
        }
    }

    pub fn add_scaled(&mut self, other: &LoopElement, q: &Rational) {
        for (b, v) in &other.terms {
            self.add_term(*b, v * q);
        }
    }

    pub fn scale(&self, q: &Rational) -> LoopElement {
        let mut out = LoopElement::zero();
        out.add_scaled(self, q);
        out
    }

    /// Lie bracket `[L_{α,i}, L_{β,j}] = (β − α) L_{α+β, i+j}`, extended
    /// bilinearly. The scalar symbol is central.
    pub fn bracket(&self, other: &LoopElement) -> LoopElement {
        let mut out = LoopElement::zero();
        for (x, p) in &self.terms {
            for (y, q) in &other.terms {
                if let (
                    BasisSymbol::Loop { alpha: a, index: i },
                    BasisSymbol::Loop { alpha: b, index: j },
                ) = (x, y)
                {
                    let coeff = p * q * rat(b - a);
                    out.add_term(
                        BasisSymbol::Loop {
                            alpha: a + b,
                            index: i + j,
                        },
                        coeff,
                    );
                }
            }
        }
        out
    }
}

impl fmt::Display for LoopElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, q)| match b {
                BasisSymbol::Scalar => format!("{q}"),
                BasisSymbol::Loop { alpha, index } => format!("{q}*L[{alpha},{index}]"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `(m, n)` region: rectangle intersected with the strip `m + n ∈ s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region2 {
    pub m: Window,
    pub n: Window,
    pub s: Window,
}

const UNBOUNDED: Window = Window {
    lo: i64::MIN / 4,
    hi: i64::MAX / 4,
};

impl Region2 {
    pub fn rect(m: Window, n: Window) -> Self {
        Region2 { m, n, s: UNBOUNDED }
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        self.m.contains(m) && self.n.contains(n) && self.s.contains(m + n)
    }

    pub fn intersect(&self, other: &Region2) -> Region2 {
        Region2 {
            m: self.m.intersect(&other.m),
            n: self.n.intersect(&other.n),
            s: self.s.intersect(&other.s),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.m
            .iter()
            .flat_map(move |m| self.n.iter().map(move |n| (m, n)))
            .filter(move |&(m, n)| self.s.contains(m + n))
    }

    pub fn is_empty(&self) -> bool {
        self.cells().next().is_none()
    }
}

/// One-variable distribution `Σ c_n w^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution1 {
    coeffs: BTreeMap<i64, LoopElement>,
    band: Window,
    validity: Window,
}

impl Distribution1 {
    pub fn new(
        coeffs: impl IntoIterator<Item = (i64, LoopElement)>,
        band: Window,
        validity: Window,
    ) -> Self {
        let coeffs = coeffs
            .into_iter()
            .filter(|(n, c)| band.contains(*n) && !c.is_zero())
            .collect();
        Distribution1 {
            coeffs,
            band,
            validity: validity.intersect(&band),
        }
    }

    pub fn zero(band: Window) -> Self {
        Distribution1::new([], band, band)
    }

    pub fn coeff(&self, n: i64) -> LoopElement {
        self.coeffs.get(&n).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, LoopElement> {
        &self.coeffs
    }

    pub fn band(&self) -> Window {
        self.band
    }

    pub fn validity(&self) -> Window {
        self.validity
    }

    pub fn scale(&self, q: &Rational) -> Distribution1 {
        Distribution1::new(
            self.coeffs.iter().map(|(n, c)| (*n, c.scale(q))),
            self.band,
            self.validity,
        )
    }

    /// `∂_w`: the coefficient of `w^n` becomes `(n + 1) c_{n+1}`.
    pub fn derivative(&self) -> Distribution1 {
        let shift = |w: Window| Window::new(w.lo - 1, w.hi - 1);
        Distribution1::new(
            self.coeffs.iter().map(|(n, c)| (n - 1, c.scale(&rat(*n)))),
            shift(self.band),
            shift(self.validity),
        )
    }

    /// Equality of coefficients on the common validity window.
    pub fn agrees_with(&self, other: &Distribution1) -> Result<bool, DistError> {
        let common = self.validity.intersect(&other.validity);
        if common.is_empty() {
            return Err(DistError::RegionExhausted);
        }
        Ok(common.iter().all(|n| self.coeff(n) == other.coeff(n)))
    }

    /// Zero on its whole validity window.
    pub fn vanishes(&self) -> bool {
        self.validity.iter().all(|n| self.coeff(n).is_zero())
    }
}

/// `L_i(z) = Σ_α L_{α,i} z^{−α−2}` for `α` in the band.
pub fn make_l_distribution(i: i64, alpha_band: Window) -> Result<Distribution1, DistError> {
    if alpha_band.is_empty() {
        return Err(DistError::EmptyBand);
    }
    let band = Window::new(-alpha_band.hi - 2, -alpha_band.lo - 2);
    Ok(Distribution1::new(
        alpha_band
            .iter()
            .map(|a| (-a - 2, LoopElement::loop_basis(a, i))),
        band,
        band,
    ))
}

/// Two-variable distribution `Σ a_{m,n} z^m w^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution2 {
    coeffs: BTreeMap<(i64, i64), LoopElement>,
    band: Region2,
    validity: Region2,
}

impl Distribution2 {
    pub fn new(
        coeffs: impl IntoIterator<Item = ((i64, i64), LoopElement)>,
        band: Region2,
        validity: Region2,
    ) -> Self {
        let coeffs = coeffs
            .into_iter()
            .filter(|((m, n), c)| band.contains(*m, *n) && !c.is_zero())
            .collect();
        Distribution2 {
            coeffs,
            band,
            validity: validity.intersect(&band),
        }
    }

    /// Tabulates `f` over a rectangle and declares the whole of it valid.
    pub fn from_fn(band: Region2, f: impl Fn(i64, i64) -> LoopElement) -> Self {
        let coeffs: Vec<_> = band.cells().map(|(m, n)| ((m, n), f(m, n))).collect();
        Distribution2::new(coeffs, band, band)
    }

    pub fn zero(band: Region2) -> Self {
        Distribution2::new([], band, band)
    }

    pub fn coeff(&self, m: i64, n: i64) -> LoopElement {
        self.coeffs.get(&(m, n)).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<(i64, i64), LoopElement> {
        &self.coeffs
    }

    pub fn band(&self) -> Region2 {
        self.band
    }

    pub fn validity(&self) -> Region2 {
        self.validity
    }

    /// `(z − w) a`: coefficient `a_{m−1,n} − a_{m,n−1}`.
    pub fn mul_z_minus_w(&self) -> Distribution2 {
        let grow = |r: Region2| Region2 {
            m: Window::new(r.m.lo, r.m.hi + 1),
            n: Window::new(r.n.lo, r.n.hi + 1),
            s: Window::new(r.s.lo.saturating_add(1), r.s.hi.saturating_add(1)),
        };
        let shrink = |r: Region2| Region2 {
            m: Window::new(r.m.lo + 1, r.m.hi),
            n: Window::new(r.n.lo + 1, r.n.hi),
            s: Window::new(r.s.lo.saturating_add(1), r.s.hi.saturating_add(1)),
        };
        let band = grow(self.band);
        let mut out: BTreeMap<(i64, i64), LoopElement> = BTreeMap::new();
        for ((m, n), c) in &self.coeffs {
            out.entry((m + 1, *n)).or_default().add_scaled(c, &rat(1));
            out.entry((*m, n + 1)).or_default().add_scaled(c, &rat(-1));
        }
        Distribution2::new(out, band, shrink(self.validity))
    }

    /// `∂_w a`: coefficient `(n + 1) a_{m,n+1}`.
    pub fn derivative_w(&self) -> Distribution2 {
        let shift = |r: Region2| Region2 {
            m: r.m,
            n: Window::new(r.n.lo - 1, r.n.hi - 1),
            s: Window::new(r.s.lo.saturating_sub(1), r.s.hi.saturating_sub(1)),
        };
        Distribution2::new(
            self.coeffs
                .iter()
                .map(|((m, n), c)| ((*m, n - 1), c.scale(&rat(*n)))),
            shift(self.band),
            shift(self.validity),
        )
    }

    /// Equality on the intersection of both validity regions.
    pub fn agrees_with(&self, other: &Distribution2) -> Result<bool, DistError> {
        let common = self.validity.intersect(&other.validity);
        if common.is_empty() {
            return Err(DistError::RegionExhausted);
        }
        let same = common.cells().all(|(m, n)| self.coeff(m, n) == other.coeff(m, n));
        Ok(same)
    }

    fn vanishes_on_validity(&self) -> Result<bool, DistError> {
        if self.validity.is_empty() {
            return Err(DistError::RegionExhausted);
        }
        Ok(self
            .validity
            .cells()
            .all(|(m, n)| self.coeff(m, n).is_zero()))
    }
}

/// `δ(z, w) = Σ_i z^i w^{−i−1}` for `i` in the band.
pub fn make_delta(band: Window) -> Distribution2 {
    let region = Region2::rect(band, Window::new(-band.hi - 1, -band.lo - 1));
    Distribution2::new(
        band.iter()
            .map(|i| ((i, -i - 1), LoopElement::scalar(Rational::one()))),
        region,
        region,
    )
}

/// Coefficient-wise Lie bracket `[a(z), b(w)]`.
pub fn bracket_distributions(a: &Distribution1, b: &Distribution1) -> Distribution2 {
    let band = Region2::rect(a.band, b.band);
    let validity = Region2::rect(a.validity, b.validity);
    let mut coeffs = Vec::new();
    for (m, x) in &a.coeffs {
        for (n, y) in &b.coeffs {
            coeffs.push(((*m, *n), x.bracket(y)));
        }
    }
    Distribution2::new(coeffs, band, validity)
}

/// Whether `(z − w)^N a` vanishes on what remains valid.
pub fn is_local(a: &Distribution2, order: u32) -> Result<bool, DistError> {
    let mut cur = a.clone();
    for _ in 0..order {
        cur = cur.mul_z_minus_w();
    }
    cur.vanishes_on_validity()
}

fn binomial(n: u32, k: u32) -> Rational {
    binomial_general(n as i64, k)
}

/// `x (x−1) ⋯ (x−k+1) / k!` for any integer `x`.
pub fn binomial_general(x: i64, k: u32) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..k as i64 {
        num *= BigInt::from(x - t);
        den *= BigInt::from(t + 1);
    }
    Rational::new(num, den)
}

/// `Res_z (z − w)^j a(z, w)` after binomial expansion of `(z − w)^j`.
pub fn residue_moment(a: &Distribution2, j: u32) -> Result<Distribution1, DistError> {
    let v = a.validity;
    let jj = j as i64;
    let mut validity = Window::new(v.s.lo.saturating_add(1 + jj), v.s.hi.saturating_add(1 + jj));
    for t in 0..=jj {
        if !v.m.contains(-1 - t) {
            return Err(DistError::RegionExhausted);
        }
        validity = validity.intersect(&Window::new(v.n.lo + jj - t, v.n.hi + jj - t));
    }
    let b = a.band;
    let band = Window::new(b.n.lo, b.n.hi + jj);
    let mut coeffs = BTreeMap::new();
    for n in band.iter() {
        let mut c = LoopElement::zero();
        for t in 0..=jj {
            let sign = if (jj - t) % 2 == 0 { rat(1) } else { rat(-1) };
            let weight = binomial(j, t as u32) * sign;
            c.add_scaled(&a.coeff(-1 - t, n - jj + t), &weight);
        }
        coeffs.insert(n, c);
    }
    if validity.is_empty() {
        return Err(DistError::RegionExhausted);
    }
    Ok(Distribution1::new(coeffs, band, validity))
}

/// `Σ_j c^j(w) ∂_w^j δ(z, w) / j!`, tabulated on `region`.
pub fn reconstruct(cs: &[Distribution1], region: Region2) -> Distribution2 {
    let mut valid = region;
    for (j, c) in cs.iter().enumerate() {
        let jj = j as i64;
        let strip = Window::new(c.validity.lo - 1 - jj, c.validity.hi - 1 - jj);
        valid.s = valid.s.intersect(&strip);
    }
    let mut coeffs = Vec::new();
    for (m, n) in region.cells() {
        let mut total = LoopElement::zero();
        for (j, c) in cs.iter().enumerate() {
            let weight = binomial_general(-m - 1, j as u32);
            total.add_scaled(&c.coeff(m + n + 1 + j as i64), &weight);
        }
        coeffs.push(((m, n), total));
    }
    Distribution2::new(coeffs, region, valid)
}

/// Returns `c^0(w), …, c^{max_order}(w)` with
/// `a(z, w) = Σ_j c^j(w) ∂_w^j δ(z, w) / j!` on the validity region.
pub fn decompose_local(a: &Distribution2, max_order: u32) -> Result<Vec<Distribution1>, DistError> {
    let cs = (0..=max_order)
        .map(|j| residue_moment(a, j))
        .collect::<Result<Vec<_>, _>>()?;
    let rebuilt = reconstruct(&cs, a.validity);
    match rebuilt.agrees_with(a) {
        Ok(true) => Ok(cs),
        Ok(false) => Err(DistError::NotLocal(max_order + 1)),
        Err(e) => Err(e),
    }
}

/// `Res_z e^{λ(z−w)} a(z, w) = Σ_j λ^j / j! · c^j(w)`.
///
/// `coeffs[j]` is the coefficient distribution of `λ^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierImage {
    pub coeffs: Vec<Distribution1>,
}

pub fn fourier_lambda(a: &Distribution2, max_order: u32) -> Result<FourierImage, DistError> {
    let cs = decompose_local(a, max_order)?;
    let mut fact = Rational::one();
    let mut coeffs = Vec::with_capacity(cs.len());
    for (j, c) in cs.into_iter().enumerate() {
        if j > 0 {
            fact *= rat(j as i64);
        }
        coeffs.push(c.scale(&fact.recip()));
    }
    Ok(FourierImage { coeffs })
}

/// Writes a loop-valued `w`-distribution as `Σ_k h_k(∂_w) L_k(w)`.
///
/// The coefficient of `w^n` in `∂_w^r L_k(w)` is `(n+1)(n+2)⋯(n+r) L_{−n−2−r,k}`,
/// so every stored `L_{α,k}` pins down `r = −α − n − 2`. The resulting
/// `h_k` is rebuilt and compared against the input on its validity window.
pub fn recognize_field(d: &Distribution1) -> Result<BTreeMap<i64, MultiPoly>, DistError> {
    let rising = |n: i64, r: i64| -> Rational { (1..=r).map(|s| rat(n + s)).product() };
    let mut found: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
    for n in d.validity.iter() {
        for (b, q) in d.coeff(n).terms() {
            let BasisSymbol::Loop { alpha, index } = *b else {
                return Err(DistError::NotRecognized("scalar coefficient".into()));
            };
            let r = -alpha - n - 2;
            if r < 0 {
                return Err(DistError::NotRecognized(format!("L[{alpha},{index}] at w^{n}")));
            }
            let w = rising(n, r);
            if w.is_zero() {
                return Err(DistError::NotRecognized(format!("nonzero entry at w^{n}")));
            }
            let value = q / w;
            match found.get(&(index, r)) {
                Some(prev) if *prev != value => {
                    return Err(DistError::NotRecognized(format!(
                        "inconsistent ∂^{r} coefficient for L_{index}"
                    )))
                }
                _ => {
                    found.insert((index, r), value);
                }
            }
        }
    }
    for n in d.validity.iter() {
        let mut expected = LoopElement::zero();
        for ((k, r), q) in &found {
            expected.add_scaled(&LoopElement::loop_basis(-n - 2 - r, *k), &(q * rising(n, *r)));
        }
        if expected != d.coeff(n) {
            return Err(DistError::NotRecognized(format!("mismatch at w^{n}")));
        }
    }
    let mut out: BTreeMap<i64, MultiPoly> = BTreeMap::new();
    for ((k, r), q) in found {
        let term = MultiPoly::d().pow(r as u32).scale(&q);
        *out.entry(k).or_default() += &term;
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// Reads a scalar-valued distribution that is constant on its window.
pub fn recognize_scalar(d: &Distribution1) -> Result<Rational, DistError> {
    if d.validity.is_empty() {
        return Err(DistError::RegionExhausted);
    }
    let mut value = Rational::zero();
    for n in d.validity.iter() {
        let c = d.coeff(n);
        for (b, q) in c.terms() {
            match b {
                BasisSymbol::Scalar if n == 0 => value = q.clone(),
                _ => return Err(DistError::NotRecognized(format!("non-constant term at w^{n}"))),
            }
        }
    }
    Ok(value)
}

impl FourierImage {
    /// The λ-bracket encoded by a loop-valued image, with ∂ standing for ∂_w.
    pub fn to_lambda_value(&self) -> Result<LambdaValue, DistError> {
        let mut terms: BTreeMap<i64, MultiPoly> = BTreeMap::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            let lam_j = MultiPoly::l().pow(j as u32);
            for (k, h) in recognize_field(c)? {
                *terms.entry(k).or_default() += &(&h * &lam_j);
            }
        }
        Ok(LambdaValue::from_terms(terms))
    }

    /// The polynomial in λ encoded by a scalar-valued image.
    pub fn to_scalar_poly(&self) -> Result<MultiPoly, DistError> {
        let mut out = MultiPoly::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            let q = recognize_scalar(c)?;
            out += &MultiPoly::l().pow(j as u32).scale(&q);
        }
        Ok(out)
    }
}

/// λ-bracket of `L_i`, `L_j` derived from the loop algebra: build `L_i(z)`
/// and `L_j(w)`, bracket coefficient-wise, Fourier transform.
pub fn derive_lambda_bracket(i: i64, j: i64, alpha_band: Window) -> Result<LambdaValue, DistError> {
    let a = make_l_distribution(i, alpha_band)?;
    let b = make_l_distribution(j, alpha_band)?;
    fourier_lambda(&bracket_distributions(&a, &b), 2)?.to_lambda_value()
}
