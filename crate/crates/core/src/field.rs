//! The finite field tower `F_p ⊆ F = F_q ⊆ E = F_{q^2} ⊆ K = F_{q^{2n}}`.
//!
//! Every element lives in `K` and is stored by its discrete logarithm with
//! respect to a fixed primitive element `g`. Addition goes through a Zech
//! logarithm table, so both ring operations are table lookups. The subfields
//! are the usual Frobenius-fixed subsets: `x ∈ F_{q^k}` iff `x = 0` or
//! `log x` is divisible by `(q^{2n} - 1) / (q^k - 1)`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the size of any exhaustive enumeration.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// An element of the top field `K`.
///
/// The raw encoding is `0` for zero and `1 + log` otherwise, so the derived
/// ordering is the canonical iteration order: zero first, then `g^0, g^1, …`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// `g^log`. The caller reduces `log` modulo the group order.
    #[inline]
    pub fn from_log(log: u32) -> Self {
        FieldElem(log + 1)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn log(self) -> Option<u32> {
        self.0.checked_sub(1)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log() {
            None => write!(f, "0"),
            Some(l) => write!(f, "g^{l}"),
        }
    }
}

/// A level of the tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    /// The base field `F = F_q`.
    F,
    /// The quadratic extension `E = F_{q^2}`.
    E,
    /// The top field `K = F_{q^{2n}}`, home of the cuspidal parameters.
    K,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::F => "F",
            Level::E => "E",
            Level::K => "K",
        }
    }
}

/// A multiplicative character `θ_k(g^j) = exp(2πi·kj/(q^{2n}-1))` of `K^×`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultChar {
    k: u64,
}

impl MultChar {
    pub fn exponent(self) -> u64 {
        self.k
    }
}

/// A nontrivial additive character of `F` or `E`, or its inverse (`sign = -1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AddChar {
    pub level: Level,
    pub sign: i8,
}

impl AddChar {
    pub const PSI_F: AddChar = AddChar { level: Level::F, sign: 1 };
    pub const PSI_E: AddChar = AddChar { level: Level::E, sign: 1 };

    pub fn inverse(self) -> AddChar {
        AddChar {
            sign: -self.sign,
            ..self
        }
    }

    /// Same sign, other level: `ψ ↦ ψ_E` and back.
    pub fn at_level(self, level: Level) -> AddChar {
        AddChar { level, ..self }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone)]
pub struct Tower {
    p: u32,
    f: u32,
    n: usize,
    q: u64,
    /// Monic primitive polynomial of degree `2nf`, low degree first (leading 1 included).
    modulus: Vec<u32>,
    /// `q^{2n} - 1`.
    order: u32,
    exp_table: Vec<u32>,
    log_table: Vec<u32>,
    zech: Vec<FieldElem>,
    neg_one: FieldElem,
    z: FieldElem,
    roots: Vec<Complex64>,
    psi_f_table: Vec<Complex64>,
    psi_e_table: Vec<Complex64>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tower")
            .field("p", &self.p)
            .field("f", &self.f)
            .field("n", &self.n)
            .field("modulus", &self.modulus)
            .field("z", &self.z)
            .finish()
    }
}

impl Tower {
    /// Builds the tower with the default enumeration budget.
    pub fn new(p: u64, f: u32, n: usize) -> Result<Self> {
        Self::with_budget(p, f, n, DEFAULT_BUDGET)
    }

    pub fn with_budget(p: u64, f: u32, n: usize, budget: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n != 2 && n != 3 {
            return Err(Error::UnsupportedRank(n));
        }
        if f == 0 {
            return Err(Error::Config("f must be at least 1".into()));
        }
        let degree = 2 * n as u32 * f;
        let size = (p as u128).checked_pow(degree).unwrap_or(u128::MAX);
        if size - 1 > budget as u128 || size > u32::MAX as u128 / 2 {
            return Err(Error::BudgetExceeded {
                what: "top field K",
                size: size - 1,
                budget,
            });
        }
        let p = p as u32;
        let q = (p as u64).pow(f);
        let (modulus, exp_table) = smallest_primitive(p, degree as usize);
        let order = exp_table.len() as u32;
        let mut log_table = vec![0u32; order as usize + 1];
        for (l, &v) in exp_table.iter().enumerate() {
            log_table[v as usize] = l as u32;
        }
        let zech = exp_table
            .iter()
            .map(|&v| {
                let d0 = v % p;
                let w = v - d0 + (d0 + 1) % p;
                if w == 0 {
                    FieldElem::ZERO
                } else {
                    FieldElem::from_log(log_table[w as usize])
                }
            })
            .collect();
        let neg_one = if p == 2 {
            FieldElem::ONE
        } else {
            FieldElem::from_log(order / 2)
        };
        let roots = (0..order)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / order as f64))
            .collect();
        let mut tower = Tower {
            p,
            f,
            n,
            q,
            modulus,
            order,
            exp_table,
            log_table,
            zech,
            neg_one,
            z: FieldElem::ZERO,
            roots,
            psi_f_table: Vec::new(),
            psi_e_table: Vec::new(),
        };
        tower.psi_f_table = (0..q as usize)
            .map(|i| {
                let x = tower.level_elem(Level::F, i);
                let t = tower.trace_to_prime(x);
                Complex64::from_polar(1.0, TAU * t as f64 / p as f64)
            })
            .collect();
        // Smallest generator power in E \ F is g^{(q^{2n}-1)/(q^2-1)}.
        let step_e = tower.step(Level::E);
        tower.set_z(FieldElem::from_log(step_e))?;
        Ok(tower)
    }

    /// Replaces `z` (used in `ψ_E`) by `g^log`.
    pub fn with_z(mut self, log: u64) -> Result<Self> {
        let z = FieldElem::from_log((log % self.order as u64) as u32);
        if !self.contains(z, Level::E) || self.contains(z, Level::F) {
            return Err(Error::InvalidZ(log));
        }
        self.set_z(z)?;
        Ok(self)
    }

    fn set_z(&mut self, z: FieldElem) -> Result<()> {
        let denom = self.sub(z, self.frob(z, 1));
        if denom.is_zero() {
            return Err(Error::InvalidZ(z.log().unwrap_or(0) as u64));
        }
        self.z = z;
        let table = (0..self.level_size(Level::E) as usize)
            .map(|i| {
                let x = self.level_elem(Level::E, i);
                let y = self.div(self.sub(x, self.frob(x, 1)), denom);
                self.psi_f(y)
            })
            .collect::<Result<Vec<_>>>()?;
        self.psi_e_table = table;
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `Q = q^2 = |E|`.
    pub fn big_q(&self) -> u64 {
        self.q * self.q
    }

    /// `|K^×| = q^{2n} - 1`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn z(&self) -> FieldElem {
        self.z
    }

    pub fn z_log(&self) -> u32 {
        self.z.log().expect("z is nonzero")
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem::from_log(1 % self.order)
    }

    pub fn level_size(&self, level: Level) -> u64 {
        match level {
            Level::F => self.q,
            Level::E => self.q * self.q,
            Level::K => self.order as u64 + 1,
        }
    }

    /// Log step between consecutive nonzero elements of `level`.
    #[inline]
    pub fn step(&self, level: Level) -> u32 {
        self.order / (self.level_size(level) - 1) as u32
    }

    #[inline]
    pub fn contains(&self, x: FieldElem, level: Level) -> bool {
        match x.log() {
            None => true,
            Some(l) => l % self.step(level) == 0,
        }
    }

    /// Position of `x` in the canonical order of `level`, if `x` lies there.
    #[inline]
    pub fn level_index(&self, x: FieldElem, level: Level) -> Option<usize> {
        match x.log() {
            None => Some(0),
            Some(l) => {
                let s = self.step(level);
                (l % s == 0).then(|| 1 + (l / s) as usize)
            }
        }
    }

    /// The element at position `index < |level|` in canonical order.
    #[inline]
    pub fn level_elem(&self, level: Level, index: usize) -> FieldElem {
        assert!(
            (index as u64) < self.level_size(level),
            "index {index} out of range for {}",
            level.name()
        );
        if index == 0 {
            FieldElem::ZERO
        } else {
            FieldElem::from_log((index as u32 - 1) * self.step(level))
        }
    }

    /// All elements of `level` in canonical order.
    pub fn elements(&self, level: Level) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.level_size(level) as usize).map(move |i| self.level_elem(level, i))
    }

    /// The image of the prime-field integer `c` in `K`.
    pub fn scalar(&self, c: i64) -> FieldElem {
        let c = c.rem_euclid(self.p as i64) as u32;
        if c == 0 {
            FieldElem::ZERO
        } else {
            FieldElem::from_log(self.log_table[c as usize])
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match (a.log(), b.log()) {
            (Some(x), Some(y)) => {
                let s = x + y;
                FieldElem::from_log(if s >= self.order { s - self.order } else { s })
            }
            _ => FieldElem::ZERO,
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let (x, y) = match (a.log(), b.log()) {
            (None, _) => return b,
            (_, None) => return a,
            (Some(x), Some(y)) => (x, y),
        };
        let d = if y >= x { y - x } else { y + self.order - x };
        match self.zech[d as usize].log() {
            None => FieldElem::ZERO,
            Some(z) => {
                let s = x + z;
                FieldElem::from_log(if s >= self.order { s - self.order } else { s })
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        self.mul(a, self.neg_one)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        a.log()
            .map(|l| FieldElem::from_log(if l == 0 { 0 } else { self.order - l }))
    }

    /// `a / b`; panics if `b` is zero.
    #[inline]
    pub fn div(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.mul(a, self.inv(b).expect("division by zero in K"))
    }

    pub fn pow(&self, a: FieldElem, e: i64) -> FieldElem {
        match a.log() {
            None if e == 0 => FieldElem::ONE,
            None => FieldElem::ZERO,
            Some(l) => {
                let m = self.order as i128;
                FieldElem::from_log(((l as i128 * e as i128).rem_euclid(m)) as u32)
            }
        }
    }

    /// `x^{q^j}`.
    pub fn frob(&self, x: FieldElem, j: u32) -> FieldElem {
        match x.log() {
            None => x,
            Some(l) => {
                let m = self.order as u64;
                let mut e = 1u64;
                for _ in 0..j {
                    e = e * self.q % m;
                }
                FieldElem::from_log((l as u64 * e % m) as u32)
            }
        }
    }

    /// Coefficients of `x` in the polynomial basis, low degree first.
    pub fn coordinates(&self, x: FieldElem) -> Vec<u32> {
        let mut v = match x.log() {
            None => 0,
            Some(l) => self.exp_table[l as usize],
        };
        let degree = self.modulus.len() - 1;
        let mut out = Vec::with_capacity(degree);
        for _ in 0..degree {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    /// `Tr_{F/F_p}(x)` as an integer in `0..p`. Only meaningful for `x ∈ F`.
    fn trace_to_prime(&self, x: FieldElem) -> u32 {
        let mut acc = FieldElem::ZERO;
        let mut y = x;
        for _ in 0..self.f {
            acc = self.add(acc, y);
            y = self.pow(y, self.p as i64);
        }
        match acc.log() {
            None => 0,
            Some(l) => self.exp_table[l as usize],
        }
    }

    /// `ψ(x) = exp(2πi·Tr_{F/F_p}(x)/p)` for `x ∈ F`.
    pub fn psi_f(&self, x: FieldElem) -> Result<Complex64> {
        let i = self
            .level_index(x, Level::F)
            .ok_or(Error::NotInSubfield("F"))?;
        Ok(self.psi_f_table[i])
    }

    /// `ψ_E(x) = ψ((x - x^q)/(z - z^q))` for `x ∈ E`.
    pub fn psi_e(&self, x: FieldElem) -> Result<Complex64> {
        let i = self
            .level_index(x, Level::E)
            .ok_or(Error::NotInSubfield("E"))?;
        Ok(self.psi_e_table[i])
    }

    /// Additive character of `level` (`F` or `E`) at a level index, raised to `sign = ±1`.
    #[inline]
    pub fn psi_at(&self, level: Level, index: usize, sign: i8) -> Complex64 {
        let v = match level {
            Level::F => self.psi_f_table[index],
            Level::E => self.psi_e_table[index],
            Level::K => panic!("no additive character on K"),
        };
        if sign < 0 {
            v.conj()
        } else {
            v
        }
    }

    pub fn eval_add(&self, chi: AddChar, x: FieldElem) -> Result<Complex64> {
        let i = self
            .level_index(x, chi.level)
            .ok_or(Error::NotInSubfield(chi.level.name()))?;
        Ok(self.psi_at(chi.level, i, chi.sign))
    }

    /// `exp(2πi·j/(q^{2n}-1))`.
    #[inline]
    pub fn root_of_unity(&self, j: u64) -> Complex64 {
        self.roots[(j % self.order as u64) as usize]
    }

    pub fn mult_char(&self, k: i64) -> MultChar {
        MultChar {
            k: k.rem_euclid(self.order as i64) as u64,
        }
    }

    pub fn eval_theta(&self, theta: MultChar, x: FieldElem) -> Result<Complex64> {
        let l = x.log().ok_or(Error::ZeroArgument)?;
        Ok(self.root_of_unity(theta.k * l as u64))
    }

    /// Orbit of `k` under multiplication by `Q = q^2` modulo `Q^n - 1`, in generation order.
    pub fn frobenius_orbit(&self, k: u64) -> Vec<u64> {
        let m = self.order as u64;
        let big_q = self.big_q() % m;
        let mut orbit = vec![k % m];
        let mut cur = k % m * big_q % m;
        while cur != orbit[0] {
            orbit.push(cur);
            cur = cur * big_q % m;
        }
        orbit
    }

    pub fn is_regular(&self, theta: MultChar) -> bool {
        self.frobenius_orbit(theta.k).len() == self.n
    }
}

/// Lexicographically smallest monic primitive polynomial of the given degree,
/// comparing `(c_0, …, c_{d-1})` with `c_0` most significant. Returns the
/// polynomial and the table `j ↦ g^j` in base-`p` integer encoding.
fn smallest_primitive(p: u32, degree: usize) -> (Vec<u32>, Vec<u32>) {
    let total = (p as u64).pow(degree as u32);
    let order = (total - 1) as usize;
    let mut exp = Vec::with_capacity(order);
    for m in 0..total {
        let coeffs: Vec<u32> = (0..degree)
            .map(|i| ((m / (p as u64).pow((degree - 1 - i) as u32)) % p as u64) as u32)
            .collect();
        if coeffs[0] == 0 {
            continue;
        }
        exp.clear();
        let mut digits = vec![0u32; degree];
        digits[0] = 1;
        let mut period = 0usize;
        for j in 1..=order {
            exp.push(encode(&digits, p));
            // multiply by x modulo the candidate
            let top = digits[degree - 1];
            for i in (1..degree).rev() {
                digits[i] = digits[i - 1];
            }
            digits[0] = 0;
            if top != 0 {
                for i in 0..degree {
                    digits[i] = (digits[i] + (p - coeffs[i]) * top) % p;
                }
            }
            if digits[0] == 1 && digits[1..].iter().all(|&d| d == 0) {
                period = j;
                break;
            }
        }
        if period == order {
            let mut modulus = coeffs;
            modulus.push(1);
            return (modulus, exp);
        }
    }
    unreachable!("a primitive polynomial of every degree exists")
}

fn encode(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn tower_sizes() {
        let t = Tower::new(2, 1, 2).unwrap();
        assert_eq!(t.order(), 15);
        assert_eq!(t.level_size(Level::E), 4);
        assert_eq!(t.level_size(Level::F), 2);
        let t = Tower::new(3, 1, 2).unwrap();
        assert_eq!(t.order(), 80);
        assert_eq!(t.level_size(Level::E), 9);
        let t = Tower::new(2, 1, 3).unwrap();
        assert_eq!(t.order(), 63);
        assert_eq!(t.level_size(Level::E), 4);
        assert_eq!(t.level_size(Level::F), 2);
    }

    #[test]
    fn modulus_is_lex_smallest_primitive() {
        // x^4 + x^3 + 1 beats x^4 + x + 1 when c_0 is compared first.
        assert_eq!(Tower::new(2, 1, 2).unwrap().modulus(), &[1, 0, 0, 1, 1]);
        let t = Tower::new(2, 1, 3).unwrap();
        let g = t.generator();
        let mut x = g;
        for j in 1..t.order() {
            assert_ne!(x, FieldElem::ONE, "g^{j} = 1");
            x = t.mul(x, g);
        }
        assert_eq!(x, FieldElem::ONE);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(Tower::new(4, 1, 2), Err(Error::NotPrime(4))));
        assert!(matches!(Tower::new(2, 1, 4), Err(Error::UnsupportedRank(4))));
        assert!(matches!(
            Tower::with_budget(3, 2, 3, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn subfield_counts() {
        for (p, f, n) in [(2, 1, 2), (3, 1, 2), (2, 1, 3), (2, 2, 2)] {
            let t = Tower::new(p, f, n).unwrap();
            let all: Vec<_> = t.elements(Level::K).collect();
            let in_f = all.iter().filter(|&&x| t.frob(x, 1) == x).count();
            let in_e = all.iter().filter(|&&x| t.frob(x, 2) == x).count();
            assert_eq!(in_f as u64, t.q());
            assert_eq!(in_e as u64, t.big_q());
            assert!(all.iter().all(|&x| (t.frob(x, 1) == x) == t.contains(x, Level::F)));
        }
    }

    #[test]
    fn frobenius_examples() {
        let t = Tower::new(2, 1, 2).unwrap();
        assert_eq!(t.frob(t.generator(), 1), FieldElem::from_log(2));
        // x ↦ x^q applied twice to g is g^4
        assert_eq!(t.frob(t.frob(t.generator(), 1), 1), FieldElem::from_log(4));
        assert_eq!(t.frob(FieldElem::ZERO, 3), FieldElem::ZERO);
        for x in t.elements(Level::F) {
            assert_eq!(t.frob(x, 1), x);
        }
        for x in t.elements(Level::E) {
            assert_eq!(t.frob(t.frob(x, 1), 1), x);
        }
    }

    #[test]
    fn z_lies_in_e_minus_f() {
        for (p, f, n) in [(2, 1, 2), (3, 1, 2), (2, 1, 3), (5, 1, 2)] {
            let t = Tower::new(p, f, n).unwrap();
            let z = t.z();
            assert!(t.contains(z, Level::E) && !t.contains(z, Level::F));
            assert!(!t.sub(z, t.frob(z, 1)).is_zero());
            let smallest = (1..t.order())
                .find(|&m| {
                    let x = FieldElem::from_log(m);
                    t.contains(x, Level::E) && !t.contains(x, Level::F)
                })
                .unwrap();
            assert_eq!(z.log(), Some(smallest));
        }
        let t = Tower::new(2, 1, 2).unwrap();
        assert!(matches!(t.clone().with_z(0), Err(Error::InvalidZ(0))));
        assert!(matches!(t.clone().with_z(1), Err(Error::InvalidZ(1))));
        assert_eq!(t.with_z(10).unwrap().z_log(), 10);
    }

    #[test]
    fn psi_f_examples() {
        let t = Tower::new(2, 1, 2).unwrap();
        assert!(close(t.psi_f(FieldElem::ZERO).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(t.psi_f(FieldElem::ONE).unwrap(), Complex64::new(-1.0, 0.0)));
        assert!(matches!(t.psi_f(t.generator()), Err(Error::NotInSubfield("F"))));
        let t = Tower::new(3, 1, 2).unwrap();
        assert!(close(
            t.psi_f(FieldElem::ONE).unwrap(),
            Complex64::from_polar(1.0, TAU / 3.0)
        ));
        for (p, f, n) in [(2, 1, 2), (3, 1, 2), (2, 2, 2), (3, 1, 3)] {
            let t = Tower::new(p, f, n).unwrap();
            let s: Complex64 = t.elements(Level::F).map(|x| t.psi_f(x).unwrap()).sum();
            assert!(s.norm() < 1e-12);
            for x in t.elements(Level::F) {
                for y in t.elements(Level::F) {
                    let lhs = t.psi_f(t.add(x, y)).unwrap();
                    let rhs = t.psi_f(x).unwrap() * t.psi_f(y).unwrap();
                    assert!(close(lhs, rhs));
                }
            }
        }
    }

    #[test]
    fn psi_e_properties() {
        for (p, f, n) in [(2, 1, 2), (3, 1, 2), (2, 1, 3), (2, 2, 2)] {
            let t = Tower::new(p, f, n).unwrap();
            for x in t.elements(Level::F) {
                assert!(close(t.psi_e(x).unwrap(), Complex64::new(1.0, 0.0)));
            }
            let s: Complex64 = t.elements(Level::E).map(|x| t.psi_e(x).unwrap()).sum();
            assert!(s.norm() < 1e-12);
            // ψ_E(z) = ψ(1), nontrivial exactly when p does not divide f
            let psi_one_trivial = (t.psi_f(FieldElem::ONE).unwrap() - 1.0).norm() < 1e-9;
            assert_eq!(psi_one_trivial, f % p as u32 == 0);
            assert!(((t.psi_e(t.z()).unwrap() - 1.0).norm() > 1e-6) != psi_one_trivial);
            for x in t.elements(Level::E) {
                let a = t.psi_e(t.frob(x, 1)).unwrap();
                assert!(close(a, t.psi_e(x).unwrap().conj()));
                for y in t.elements(Level::E) {
                    let lhs = t.psi_e(t.add(x, y)).unwrap();
                    assert!(close(lhs, t.psi_e(x).unwrap() * t.psi_e(y).unwrap()));
                }
            }
        }
    }

    #[test]
    fn trace_and_normalized_difference() {
        for (p, f, n) in [(2, 1, 2), (3, 1, 2), (2, 2, 2)] {
            let t = Tower::new(p, f, n).unwrap();
            let denom = t.sub(t.z(), t.frob(t.z(), 1));
            let mut kernel = 0;
            let mut image = std::collections::HashSet::new();
            for x in t.elements(Level::E) {
                assert!(t.contains(t.add(x, t.frob(x, 1)), Level::F));
                let y = t.div(t.sub(x, t.frob(x, 1)), denom);
                assert!(t.contains(y, Level::F));
                if y.is_zero() {
                    kernel += 1;
                    assert!(t.contains(x, Level::F));
                }
                image.insert(y);
            }
            assert_eq!(kernel as u64, t.q());
            assert_eq!(image.len() as u64, t.q());
        }
    }

    #[test]
    fn additive_character_sums() {
        // Σ_x ψ_E(a x) is |E| when ψ_E(a ·) is trivial, else 0; only a = 0 is trivial.
        let t = Tower::new(3, 1, 2).unwrap();
        for a in t.elements(Level::E) {
            let s: Complex64 = t
                .elements(Level::E)
                .map(|x| t.psi_e(t.mul(a, x)).unwrap())
                .sum();
            let trivial = t.elements(Level::E).all(|x| close(t.psi_e(t.mul(a, x)).unwrap(), 1.0.into()));
            let expected = if trivial { t.big_q() as f64 } else { 0.0 };
            assert!((s - expected).norm() < 1e-9);
            assert_eq!(trivial, a.is_zero());
        }
    }

    #[test]
    fn multiplicative_characters() {
        let t = Tower::new(2, 1, 2).unwrap();
        let triv = t.mult_char(0);
        for x in t.elements(Level::K).skip(1) {
            assert!(close(t.eval_theta(triv, x).unwrap(), 1.0.into()));
        }
        let th = t.mult_char(7);
        assert!(close(
            t.eval_theta(th, t.generator()).unwrap(),
            Complex64::from_polar(1.0, TAU * 7.0 / 15.0)
        ));
        let inv = t.mult_char(-7);
        for x in t.elements(Level::K).skip(1) {
            let v = t.eval_theta(th, x).unwrap() * t.eval_theta(inv, x).unwrap();
            assert!(close(v, 1.0.into()));
        }
        assert!(matches!(t.eval_theta(th, FieldElem::ZERO), Err(Error::ZeroArgument)));
    }

    #[test]
    fn regularity_examples() {
        let t = Tower::new(2, 1, 2).unwrap();
        assert!(!t.is_regular(t.mult_char(0)));
        assert!(!t.is_regular(t.mult_char(5)));
        assert!(t.is_regular(t.mult_char(1)));
        assert_eq!(t.frobenius_orbit(1), vec![1, 4]);
    }

    #[test]
    fn field_axioms_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, f, n) in [(2, 1, 2), (3, 1, 2), (2, 1, 3), (5, 1, 2)] {
            let t = Tower::new(p, f, n).unwrap();
            let size = t.level_size(Level::K) as usize;
            for _ in 0..10_000 {
                let [a, b, c] =
                    [(); 3].map(|_| t.level_elem(Level::K, rng.gen_range(0..size)));
                assert_eq!(t.add(t.add(a, b), c), t.add(a, t.add(b, c)));
                assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
                assert_eq!(t.mul(a, t.add(b, c)), t.add(t.mul(a, b), t.mul(a, c)));
                assert_eq!(t.add(a, t.neg(a)), FieldElem::ZERO);
                if let Some(ai) = t.inv(a) {
                    assert_eq!(t.mul(a, ai), FieldElem::ONE);
                }
            }
        }
    }
}
