//! Level-zero Asai factors as rational functions in `T = q^{-s}`.
//!
//! Everything is stated up to the unnormalized volume constant: the module
//! works with `vol·γ(s)` and `vol·ε(s)`. Powers `q^{ks}` are `T^{-k}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this modulus are dropped.
pub const COEFF_EPS: f64 = 1e-12;

/// Tolerance for the coefficient identities.
pub const IDENTITY_TOL: f64 = 1e-10;

/// A Laurent polynomial `Σ c_k T^k` over a residue field of size `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    q: u64,
    coeffs: BTreeMap<i32, Complex64>,
}

impl LaurentPoly {
    pub fn zero(q: u64) -> Self {
        LaurentPoly {
            q,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(q: u64, c: Complex64) -> Self {
        Self::monomial(q, c, 0)
    }

    pub fn monomial(q: u64, c: Complex64, exp: i32) -> Self {
        Self::from_terms(q, [(exp, c)])
    }

    pub fn from_terms(q: u64, terms: impl IntoIterator<Item = (i32, Complex64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            *coeffs.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut p = LaurentPoly { q, coeffs };
        p.strip();
        p
    }

    fn strip(&mut self) {
        self.coeffs.retain(|_, c| c.norm() >= COEFF_EPS);
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i32) -> Complex64 {
        self.coeffs.get(&exp).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// `Some((c, k))` when the polynomial is `c·T^k` with `c ≠ 0`.
    pub fn as_monomial(&self) -> Option<(Complex64, i32)> {
        match self.coeffs.len() {
            1 => self.coeffs.iter().next().map(|(&e, &c)| (c, e)),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.as_monomial().is_some()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.q, self.terms().map(|(e, v)| (e, v * c)))
    }

    /// `T ↦ a·T^e` with `e = ±1`.
    pub fn substitute(&self, a: Complex64, e: i32) -> Self {
        assert!(e == 1 || e == -1, "only T ↦ a·T^{{±1}} is supported");
        Self::from_terms(self.q, self.terms().map(|(k, c)| (e * k, c * a.powi(k))))
    }

    /// `T ↦ q^{-1} T^{-1}`, i.e. `s ↦ 1 - s`.
    pub fn reflect(&self) -> Self {
        self.substitute(Complex64::new(1.0 / self.q as f64, 0.0), -1)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.terms().map(|(e, c)| c * t.powi(e)).sum()
    }

    /// Largest coefficient modulus.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &LaurentPoly) -> Result<Option<LaurentPoly>> {
        let (dmin, dmax) = match (d.min_exp(), d.max_exp()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::ZeroDivisor),
        };
        let lead = d.coeff(dmax);
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero(self.q);
        let scale = self.max_norm().max(1.0);
        while let (Some(rmin), Some(rmax)) = (rem.min_exp(), rem.max_exp()) {
            if rmax - rmin < dmax - dmin {
                break;
            }
            let term = LaurentPoly::monomial(self.q, rem.coeff(rmax) / lead, rmax - dmax);
            rem = &rem - &(&term * d);
            rem.coeffs.remove(&rmax);
            rem.coeffs.retain(|_, c| c.norm() >= COEFF_EPS * scale);
            quot = &quot + &term;
        }
        Ok(rem.is_zero().then_some(quot))
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(self.q, self.terms().chain(rhs.terms()))
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.q,
            self.terms()
                .flat_map(|(a, x)| rhs.terms().map(move |(b, y)| (a + b, x * y))),
        )
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(e, c)| format!("({:.6}{:+.6}i)T^{e}", c.re, c.im))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `num / den` with `den ≠ 0`.
#[derive(Clone, Debug)]
pub struct RationalFn {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RationalFn {
    /// Normalizes so the denominator's lowest term is the constant `1`.
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self> {
        let (e, c) = match den.min_exp() {
            Some(e) => (e, den.coeff(e)),
            None => return Err(Error::ZeroDivisor),
        };
        let shift = LaurentPoly::monomial(den.q(), c.inv(), -e);
        Ok(RationalFn {
            num: &num * &shift,
            den: &den * &shift,
        })
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        let q = p.q();
        RationalFn {
            num: p,
            den: LaurentPoly::constant(q, 1.0.into()),
        }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn mul(&self, other: &RationalFn) -> Result<RationalFn> {
        RationalFn::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &RationalFn) -> Result<RationalFn> {
        if other.num.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        RationalFn::new(&self.num * &other.den, &self.den * &other.num)
    }

    pub fn add(&self, other: &RationalFn) -> Result<RationalFn> {
        RationalFn::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn reflect(&self) -> Result<RationalFn> {
        RationalFn::new(self.num.reflect(), self.den.reflect())
    }

    /// Equality by cross-multiplication; returns the largest coefficient deviation.
    pub fn deviation(&self, other: &RationalFn) -> f64 {
        (&(&self.num * &other.den) - &(&other.num * &self.den)).max_norm()
    }

    /// The Laurent polynomial this function equals, if any.
    pub fn try_as_laurent(&self) -> Result<Option<LaurentPoly>> {
        self.num.div_exact(&self.den)
    }

    /// The constant this function equals, if it is independent of `T`.
    pub fn as_constant(&self) -> Result<Option<Complex64>> {
        Ok(self.try_as_laurent()?.and_then(|p| match p.as_monomial() {
            Some((c, 0)) => Some(c),
            None if p.is_zero() => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }))
    }

    /// Number of poles in `T` on `C^×`, counted with multiplicity, assuming the
    /// fraction is reduced.
    pub fn pole_count(&self) -> usize {
        match (self.den.min_exp(), self.den.max_exp()) {
            (Some(a), Some(b)) => (b - a) as usize,
            _ => 0,
        }
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.num.eval(t) / self.den.eval(t)
    }
}

fn one(q: u64) -> LaurentPoly {
    LaurentPoly::constant(q, 1.0.into())
}

/// `L(s, σ, As) = 1/(1 - λ T^n)` for `σ` of level zero from `(λ, π)`, `π` distinguished.
pub fn asai_l(q: u64, n: usize, lambda: Complex64, distinguished: bool) -> Result<RationalFn> {
    if !distinguished {
        return Err(Error::Unsupported(
            "level-zero Asai L-factor of a non-distinguished representation",
        ));
    }
    if lambda.norm() < COEFF_EPS {
        return Err(Error::ZeroArgument);
    }
    let den = &one(q) - &LaurentPoly::monomial(q, lambda, n as i32);
    RationalFn::new(one(q), den)
}

/// `L(1 - s, σ̃, As)`, with `σ̃` coming from `(λ^{-1}, π̃)`.
pub fn asai_l_dual(q: u64, n: usize, lambda: Complex64) -> Result<RationalFn> {
    asai_l(q, n, lambda.inv(), true)?.reflect()
}

/// `vol·γ(s) = c₁·Y/(λ - Y) + γ_fin` with `Y = q^{n(s-1)} = q^{-n} T^{-n}`.
pub fn local_gamma_vol(
    q: u64,
    n: usize,
    lambda: Complex64,
    gamma_finite: Complex64,
    c1: Complex64,
) -> Result<RationalFn> {
    if lambda.norm() < COEFF_EPS {
        return Err(Error::ZeroArgument);
    }
    let y = LaurentPoly::monomial(q, (q as f64).powi(-(n as i32)).into(), -(n as i32));
    let den = &LaurentPoly::constant(q, lambda) - &y;
    let num = &y.scale(c1) + &den.scale(gamma_finite);
    RationalFn::new(num, den)
}

/// `vol·ε(s) = vol·γ(s)·L(s, σ)/L(1 - s, σ̃)`.
pub fn epsilon_vol(
    q: u64,
    n: usize,
    lambda: Complex64,
    gamma_finite: Complex64,
    c1: Complex64,
) -> Result<RationalFn> {
    let gamma = local_gamma_vol(q, n, lambda, gamma_finite, c1)?;
    gamma.mul(&asai_l(q, n, lambda, true)?)?.div(&asai_l_dual(q, n, lambda)?)
}

/// `vol·ε(s) = c₂·q^{c₃ s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonCheck {
    pub c2_vol: Complex64,
    pub c3: i32,
    /// Largest deviation among the asserted identities.
    pub max_dev: f64,
}

/// The distinguished scenario with `γ_fin = -1`, `c₁ = q^n - 1`.
pub fn epsilon_check(q: u64, n: usize, lambda: Complex64) -> Result<EpsilonCheck> {
    let c1 = (q as f64).powi(n as i32) - 1.0;
    epsilon_check_with(q, n, lambda, (-1.0).into(), c1.into())
}

/// As [`epsilon_check`], with the finite-field gamma and coset sum supplied.
pub fn epsilon_check_with(
    q: u64,
    n: usize,
    lambda: Complex64,
    gamma_finite: Complex64,
    c1: Complex64,
) -> Result<EpsilonCheck> {
    let eps = epsilon_vol(q, n, lambda, gamma_finite, c1)?;
    let poly = eps.try_as_laurent()?.ok_or_else(|| {
        Error::Verification(format!("vol·ε is not a Laurent polynomial: {} / {}", eps.num(), eps.den()))
    })?;
    let (c2_vol, exp) = poly
        .as_monomial()
        .ok_or_else(|| Error::Verification(format!("vol·ε is not a monomial: {poly}")))?;
    let c3 = -exp;
    if c3 != n as i32 {
        return Err(Error::Verification(format!("c3 = {c3}, expected {n}")));
    }
    let qn = (q as f64).powi(n as i32);
    let dev_gamma = (c1 / (1.0 - qn) - gamma_finite).norm();
    let dev_c2 = (c2_vol * lambda + gamma_finite).norm();
    let max_dev = dev_gamma.max(dev_c2);
    if max_dev > IDENTITY_TOL {
        return Err(Error::Verification(format!(
            "coefficient identities fail: |c1/(1-q^n) - γ| = {dev_gamma:.3e}, |c2 λ + γ| = {dev_c2:.3e}"
        )));
    }
    Ok(EpsilonCheck { c2_vol, c3, max_dev })
}

/// Both sides of `q^{-n}(c₁ - γ)X^{2n} + λγX^n = c₂λX^{c₃+n} - c₂λ²X^{c₃}` in
/// `X = q^s = T^{-1}`, with `γ = -1`, `c₁ = q^n - 1`, `c₂ = 1/λ`, `c₃ = n`.
pub fn coefficient_identity(q: u64, n: usize, lambda: Complex64) -> (LaurentPoly, LaurentPoly) {
    let n = n as i32;
    let gamma = Complex64::new(-1.0, 0.0);
    let c1 = Complex64::new((q as f64).powi(n) - 1.0, 0.0);
    let c2 = lambda.inv();
    let c3 = n;
    let x = |k: i32, c: Complex64| LaurentPoly::monomial(q, c, -k);
    let lhs = &x(2 * n, (c1 - gamma) * (q as f64).powi(-n)) + &x(n, lambda * gamma);
    let rhs = &x(c3 + n, c2 * lambda) - &x(c3, c2 * lambda * lambda);
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lambdas(count: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..count)
            .map(|i| {
                let arg = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = if i % 2 == 0 { 1.0 } else { rng.gen_range(0.2..5.0) };
                Complex64::from_polar(r, arg)
            })
            .collect()
    }

    #[test]
    fn laurent_examples() {
        let q = 3;
        let t = LaurentPoly::monomial(q, c(1.0), 1);
        let a = &one(q) - &t;
        let b = &one(q) + &t;
        let expected = &one(q) - &LaurentPoly::monomial(q, c(1.0), 2);
        assert_eq!(&a * &b, expected);
        let t2 = LaurentPoly::monomial(q, c(1.0), 2);
        let s = t2.reflect();
        assert!((s.coeff(-2) - 1.0 / 9.0).norm() < 1e-15);
        assert!(LaurentPoly::monomial(q, c(3.0), 5).is_monomial());
        assert!(!b.is_monomial());
        assert_eq!(expected.div_exact(&a).unwrap(), Some(b.clone()));
        assert_eq!(b.div_exact(&a).unwrap(), None);
        assert!(matches!(b.div_exact(&LaurentPoly::zero(q)), Err(Error::ZeroDivisor)));
        assert!(RationalFn::new(one(q), LaurentPoly::zero(q)).is_err());
    }

    #[test]
    fn l_factor() {
        let l = asai_l(2, 2, c(1.0), true).unwrap();
        let expected = RationalFn::new(one(2), LaurentPoly::from_terms(2, [(0, c(1.0)), (2, c(-1.0))])).unwrap();
        assert!(l.deviation(&expected) < 1e-15);
        assert!(matches!(asai_l(2, 2, c(1.0), false), Err(Error::Unsupported(_))));
        for n in [2usize, 3] {
            for lambda in lambdas(5) {
                let l = asai_l(3, n, lambda, true).unwrap();
                assert_eq!(l.pole_count(), n);
                // The poles are the n-th roots of 1/λ.
                let base = lambda.inv().powf(1.0 / n as f64);
                for k in 0..n {
                    let root = base * Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
                    assert!(l.den().eval(root).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dual_l_factor_substitution() {
        // L(1 - s, σ̃) = (1 - λ^{-1} q^{-n(1-s)})^{-1}, checked pointwise in s.
        let (q, n, lambda) = (3u64, 2usize, Complex64::new(0.4, 1.3));
        let dual = asai_l_dual(q, n, lambda).unwrap();
        for s in [0.3, -1.2, 2.5] {
            let t = c((q as f64).powf(-s));
            let direct = 1.0 / (1.0 - lambda.inv() * (q as f64).powf(-(n as f64) * (1.0 - s)));
            assert!((dual.eval(t) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_non_distinguished_is_constant() {
        let g = Complex64::new(1.0, 2.6457513110645906);
        for lambda in lambdas(4) {
            let r = local_gamma_vol(2, 3, lambda, g, c(0.0)).unwrap();
            let k = r.as_constant().unwrap().unwrap();
            assert!((k - g).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_pole_location() {
        let (q, n) = (2u64, 2usize);
        let lambda = Complex64::new(0.7, -0.2);
        let r = local_gamma_vol(q, n, lambda, c(-1.0), c(3.0)).unwrap();
        // λ = q^{n(s-1)} ⇔ T^n = 1/(λ q^n).
        let t = (lambda * (q as f64).powi(n as i32)).inv().sqrt();
        assert!(r.den().eval(t).norm() < 1e-12);
        assert!(r.num().eval(t).norm() > 1e-3);
    }

    #[test]
    fn epsilon_examples() {
        let e = epsilon_check(2, 2, c(1.0)).unwrap();
        assert_eq!(e.c3, 2);
        let e = epsilon_check(3, 2, c(3.0)).unwrap();
        assert!((e.c2_vol - 1.0 / 3.0).norm() < 1e-12);
        for n in [2usize, 3] {
            for lambda in lambdas(20) {
                let e = epsilon_check(3, n, lambda).unwrap();
                assert_eq!(e.c3, n as i32);
                assert!((e.c2_vol - lambda.inv()).norm() < 1e-10);
            }
        }
        // Any other finite gamma breaks monomiality.
        assert!(epsilon_check_with(2, 2, c(1.0), c(-0.5), c(3.0)).is_err());
    }

    #[test]
    fn eq3_coefficients() {
        for q in [2u64, 3, 4] {
            for n in [2usize, 3] {
                for lambda in lambdas(20) {
                    let (lhs, rhs) = coefficient_identity(q, n, lambda);
                    assert!((&lhs - &rhs).max_norm() < IDENTITY_TOL, "{lhs} vs {rhs}");
                    assert_eq!(lhs.terms().count(), 2);
                }
            }
        }
    }
}
