//! Small dense matrices over the tower, enumeration of `GL_n`, `N_n`, `P_n`
//! and parabolic radicals, canonical coset representatives, and the class
//! data that drives cuspidal character evaluation.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{AddChar, FieldElem, Level, Tower};

pub const MAX_N: usize = 3;

/// An `n × n` matrix (`n ≤ 3`) whose entries lie in one level of the tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    level: Level,
    entries: [FieldElem; MAX_N * MAX_N],
}

impl Mat {
    pub fn zero(n: usize, level: Level) -> Mat {
        assert!(n <= MAX_N, "matrices are limited to n <= {MAX_N}");
        Mat {
            n,
            level,
            entries: [FieldElem::ZERO; MAX_N * MAX_N],
        }
    }

    pub fn identity(n: usize, level: Level) -> Mat {
        let mut m = Mat::zero(n, level);
        for i in 0..n {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    /// The longest Weyl element: ones on the anti-diagonal.
    pub fn omega(n: usize, level: Level) -> Mat {
        let mut m = Mat::zero(n, level);
        for i in 0..n {
            m.set(i, n - 1 - i, FieldElem::ONE);
        }
        m
    }

    pub fn from_rows(tower: &Tower, level: Level, rows: &[Vec<FieldElem>]) -> Result<Mat> {
        let n = rows.len();
        if !(1..=MAX_N).contains(&n) || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("expected a square matrix of size <= {MAX_N}")));
        }
        let mut m = Mat::zero(n, level);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !tower.contains(x, level) {
                    return Err(Error::NotInSubfield(level.name()));
                }
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn level(&self) -> Level {
        self.level
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.entries[i * MAX_N + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: FieldElem) {
        self.entries[i * MAX_N + j] = x;
    }

    pub fn row(&self, i: usize) -> Vec<FieldElem> {
        (0..self.n).map(|j| self.get(i, j)).collect()
    }

    /// Reinterprets the matrix at a larger level (e.g. `H ⊂ G`).
    pub fn at_level(mut self, level: Level) -> Mat {
        assert!(level >= self.level, "cannot restrict a matrix to a smaller level");
        self.level = level;
        self
    }

    pub fn mul(&self, other: &Mat, t: &Tower) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zero(n, self.level.max(other.level));
        for i in 0..n {
            for j in 0..n {
                let mut acc = FieldElem::ZERO;
                for k in 0..n {
                    acc = t.add(acc, t.mul(self.get(i, k), other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(j, i));
            }
        }
        out
    }

    /// Entrywise `x ↦ x^{q^j}`.
    pub fn frob(&self, t: &Tower, j: u32) -> Mat {
        let mut out = *self;
        for e in out.entries.iter_mut().take(MAX_N * self.n) {
            *e = t.frob(*e, j);
        }
        out
    }

    pub fn det(&self, t: &Tower) -> FieldElem {
        let g = |i, j| self.get(i, j);
        match self.n {
            1 => g(0, 0),
            2 => t.sub(t.mul(g(0, 0), g(1, 1)), t.mul(g(0, 1), g(1, 0))),
            3 => {
                let minor = |a: usize, b: usize, c: usize, d: usize| {
                    t.sub(t.mul(g(1, a), g(2, b)), t.mul(g(1, c), g(2, d)))
                };
                let x = t.mul(g(0, 0), minor(1, 2, 2, 1));
                let y = t.mul(g(0, 1), minor(0, 2, 2, 0));
                let z = t.mul(g(0, 2), minor(0, 1, 1, 0));
                t.add(t.sub(x, y), z)
            }
            _ => unreachable!(),
        }
    }

    pub fn is_invertible(&self, t: &Tower) -> bool {
        !self.det(t).is_zero()
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self, t: &Tower) -> Result<Mat> {
        let n = self.n;
        let mut a = *self;
        let mut inv = Mat::identity(n, self.level);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(Error::Singular)?;
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot, j));
                    a.set(col, j, y);
                    a.set(pivot, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, y);
                    inv.set(pivot, j, x);
                }
            }
            let s = t.inv(a.get(col, col)).expect("pivot is nonzero");
            for j in 0..n {
                a.set(col, j, t.mul(a.get(col, j), s));
                inv.set(col, j, t.mul(inv.get(col, j), s));
            }
            for r in 0..n {
                let factor = a.get(r, col);
                if r == col || factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, t.sub(a.get(r, j), t.mul(factor, a.get(col, j))));
                    inv.set(r, j, t.sub(inv.get(r, j), t.mul(factor, inv.get(col, j))));
                }
            }
        }
        Ok(inv)
    }

    pub fn rank(&self, t: &Tower) -> usize {
        let n = self.n;
        let mut a = *self;
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..n).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..n {
                let (x, y) = (a.get(rank, j), a.get(pivot, j));
                a.set(rank, j, y);
                a.set(pivot, j, x);
            }
            let s = t.inv(a.get(rank, col)).expect("pivot is nonzero");
            for r in rank + 1..n {
                let factor = t.mul(a.get(r, col), s);
                for j in 0..n {
                    a.set(r, j, t.sub(a.get(r, j), t.mul(factor, a.get(rank, j))));
                }
            }
            rank += 1;
        }
        rank
    }

    /// Characteristic polynomial `det(xI - g)`, coefficients low degree first, monic.
    pub fn char_poly(&self, t: &Tower) -> Vec<FieldElem> {
        let g = |i, j| self.get(i, j);
        let trace = (0..self.n).fold(FieldElem::ZERO, |acc, i| t.add(acc, g(i, i)));
        let det = self.det(t);
        let sign_det = if self.n.is_multiple_of(2) { det } else { t.neg(det) };
        match self.n {
            1 => vec![t.neg(g(0, 0)), FieldElem::ONE],
            2 => vec![sign_det, t.neg(trace), FieldElem::ONE],
            3 => {
                let m2 = |a: usize, b: usize| {
                    t.sub(t.mul(g(a, a), g(b, b)), t.mul(g(a, b), g(b, a)))
                };
                let c1 = t.add(t.add(m2(0, 1), m2(0, 2)), m2(1, 2));
                vec![sign_det, c1, t.neg(trace), FieldElem::ONE]
            }
            _ => unreachable!(),
        }
    }

    /// `τ(g) = transpose(frob(g))^{-1}`.
    pub fn tau(&self, t: &Tower) -> Result<Mat> {
        self.frob(t, 1).transpose().inverse(t)
    }

    /// `ω_n · transpose(g)^{-1}`, the argument substitution behind `W ↦ W̃`.
    pub fn tilde_arg(&self, t: &Tower) -> Result<Mat> {
        let inv_t = self.transpose().inverse(t)?;
        Ok(Mat::omega(self.n, self.level).mul(&inv_t, t))
    }

    pub fn is_upper_unipotent(&self) -> bool {
        (0..self.n).all(|i| {
            (0..=i).all(|j| {
                let x = self.get(i, j);
                if i == j {
                    x == FieldElem::ONE
                } else {
                    x.is_zero()
                }
            })
        })
    }

    /// Row-lexicographic position among all `n × n` matrices over the level.
    #[inline]
    pub fn index(&self, t: &Tower) -> usize {
        let base = t.level_size(self.level) as usize;
        let mut idx = 0usize;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = t
                    .level_index(self.get(i, j), self.level)
                    .expect("entry lies in the declared level");
                idx = idx * base + d;
            }
        }
        idx
    }

    pub fn from_index(t: &Tower, n: usize, level: Level, mut index: usize) -> Mat {
        let base = t.level_size(level) as usize;
        let mut m = Mat::zero(n, level);
        for pos in (0..n * n).rev() {
            m.set(pos / n, pos % n, t.level_elem(level, index % base));
            index /= base;
        }
        m
    }
}

fn level_pow(t: &Tower, level: Level, e: u32) -> u128 {
    (t.level_size(level) as u128).pow(e)
}

/// `|GL_n(F_ℓ)| = ∏ (ℓ^n - ℓ^i)`.
pub fn gl_order(t: &Tower, n: usize, level: Level) -> u128 {
    let l = t.level_size(level) as u128;
    (0..n as u32).map(|i| l.pow(n as u32) - l.pow(i)).product()
}

fn check_budget(what: &'static str, size: u128, budget: u64) -> Result<()> {
    if size > budget as u128 {
        Err(Error::BudgetExceeded { what, size, budget })
    } else {
        Ok(())
    }
}

/// All invertible `n × n` matrices over `level`, in row-lexicographic order.
pub fn enumerate_gl<'a>(
    t: &'a Tower,
    n: usize,
    level: Level,
    budget: u64,
) -> Result<impl Iterator<Item = Mat> + 'a> {
    check_budget("GL_n", gl_order(t, n, level), budget)?;
    let space = level_pow(t, level, (n * n) as u32);
    check_budget("n x n matrix space", space, budget)?;
    Ok((0..space as usize)
        .map(move |i| Mat::from_index(t, n, level, i))
        .filter(move |m| m.is_invertible(t)))
}

/// Upper unipotent matrices over `level` whose above-diagonal entries are free
/// exactly at the positions in `free`.
fn enumerate_pattern<'a>(
    t: &'a Tower,
    n: usize,
    level: Level,
    free: Vec<(usize, usize)>,
) -> impl Iterator<Item = Mat> + 'a {
    let base = t.level_size(level) as usize;
    let count = base.pow(free.len() as u32);
    (0..count).map(move |mut i| {
        let mut m = Mat::identity(n, level);
        for &(r, c) in free.iter().rev() {
            m.set(r, c, t.level_elem(level, i % base));
            i /= base;
        }
        m
    })
}

/// The standard unipotent group `N_n(level)`.
pub fn enumerate_unipotent<'a>(
    t: &'a Tower,
    n: usize,
    level: Level,
) -> impl Iterator<Item = Mat> + 'a {
    let free = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    enumerate_pattern(t, n, level, free)
}

/// Proper compositions of `n` (at least two parts), each giving a standard parabolic.
pub fn proper_compositions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for part in 1..=rest {
            cur.push(part);
            go(rest - part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut out);
    out
}

/// Unipotent radical of the standard parabolic with block sizes `composition`.
pub fn enumerate_radical<'a>(
    t: &'a Tower,
    level: Level,
    composition: &[usize],
) -> impl Iterator<Item = Mat> + 'a {
    let n: usize = composition.iter().sum();
    let mut block = Vec::with_capacity(n);
    for (b, &size) in composition.iter().enumerate() {
        block.extend(std::iter::repeat_n(b, size));
    }
    let free = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| block[i] < block[j])
        .collect();
    enumerate_pattern(t, n, level, free)
}

/// The mirabolic subgroup `P_n(level)`: invertible matrices with last row `e_n`.
pub fn enumerate_mirabolic<'a>(
    t: &'a Tower,
    n: usize,
    level: Level,
    budget: u64,
) -> Result<impl Iterator<Item = Mat> + 'a> {
    let top = level_pow(t, level, (n * (n - 1)) as u32);
    check_budget("P_n", top, budget)?;
    Ok((0..top as usize).filter_map(move |i| {
        let mut m = Mat::identity(n, level);
        let base = t.level_size(level) as usize;
        let mut i = i;
        for pos in (0..n * (n - 1)).rev() {
            m.set(pos / n, pos % n, t.level_elem(level, i % base));
            i /= base;
        }
        m.is_invertible(t).then_some(m)
    }))
}

/// `ψ(u) = ψ(Σ u_{i,i+1})` on `N_n`.
pub fn psi_n(t: &Tower, u: &Mat, chi: AddChar) -> Result<Complex64> {
    if !u.is_upper_unipotent() {
        return Err(Error::NotUnipotent);
    }
    let s = (0..u.n().saturating_sub(1)).fold(FieldElem::ZERO, |acc, i| t.add(acc, u.get(i, i + 1)));
    t.eval_add(chi, s)
}

/// Which side the unipotent group acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetSide {
    /// Orbits `N·g`, i.e. `N \ GL_n`.
    Left,
    /// Orbits `g·N`, i.e. `GL_n / N`.
    Right,
}

/// Canonical representatives of `N_n \ GL_n` (or `GL_n / N_n`) over one level;
/// each representative is the row-lex smallest matrix of its orbit.
#[derive(Clone, Debug)]
pub struct CosetTable {
    n: usize,
    level: Level,
    side: CosetSide,
    reps: Vec<Mat>,
    unipotents: Vec<Mat>,
}

impl CosetTable {
    pub fn build(t: &Tower, n: usize, level: Level, side: CosetSide, budget: u64) -> Result<Self> {
        let unipotents: Vec<Mat> = enumerate_unipotent(t, n, level).collect();
        let space = level_pow(t, level, (n * n) as u32) as usize;
        let mut seen = vec![false; space];
        let mut reps = Vec::new();
        for g in enumerate_gl(t, n, level, budget)? {
            let idx = g.index(t);
            if seen[idx] {
                continue;
            }
            reps.push(g);
            for u in &unipotents {
                let h = match side {
                    CosetSide::Left => u.mul(&g, t),
                    CosetSide::Right => g.mul(u, t),
                };
                seen[h.index(t)] = true;
            }
        }
        Ok(CosetTable {
            n,
            level,
            side,
            reps,
            unipotents,
        })
    }

    /// `N_n(F) \ GL_n(F)`, the domain of the zeta sums.
    pub fn base(t: &Tower, budget: u64) -> Result<Self> {
        Self::build(t, t.n(), Level::F, CosetSide::Left, budget)
    }

    pub fn reps(&self) -> &[Mat] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn unipotents(&self) -> &[Mat] {
        &self.unipotents
    }

    /// The representative of the orbit of `g`.
    pub fn canonicalize(&self, t: &Tower, g: &Mat) -> Mat {
        self.unipotents
            .iter()
            .map(|u| match self.side {
                CosetSide::Left => u.mul(g, t),
                CosetSide::Right => g.mul(u, t),
            })
            .min_by_key(|h| h.index(t))
            .expect("N_n is nonempty")
    }
}

/// Conjugacy data sufficient for cuspidal characters when `n ∈ {2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// `g = z·u` with `z ∈ E^×` central and `u` unipotent with `blocks` Jordan blocks.
    CentralTimesUnipotent { z: FieldElem, blocks: usize },
    /// Irreducible characteristic polynomial over `E`; `alpha` is its smallest-log root in `K`.
    RegularElliptic { alpha: FieldElem },
    Other,
}

fn eval_poly(t: &Tower, coeffs: &[FieldElem], x: FieldElem) -> FieldElem {
    coeffs
        .iter()
        .rev()
        .fold(FieldElem::ZERO, |acc, &c| t.add(t.mul(acc, x), c))
}

/// Coefficients of `(x - r)^n`, low degree first.
fn power_of_linear(t: &Tower, r: FieldElem, n: usize) -> Vec<FieldElem> {
    let mut poly = vec![FieldElem::ONE];
    let neg_r = t.neg(r);
    for _ in 0..n {
        let mut next = vec![FieldElem::ZERO; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = t.add(next[i + 1], c);
            next[i] = t.add(next[i], t.mul(c, neg_r));
        }
        poly = next;
    }
    poly
}

/// Classification of the characteristic polynomial alone (rank is handled separately).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PolyKind {
    PurePower(FieldElem),
    Irreducible(FieldElem),
    Other,
}

fn classify_poly(t: &Tower, cp: &[FieldElem]) -> PolyKind {
    let n = cp.len() - 1;
    match t.elements(Level::E).find(|&r| eval_poly(t, cp, r).is_zero()) {
        Some(r) => {
            if power_of_linear(t, r, n) == cp {
                PolyKind::PurePower(r)
            } else {
                PolyKind::Other
            }
        }
        // n ≤ 3: no root in E means irreducible over E.
        None => {
            let alpha = (0..t.order())
                .map(FieldElem::from_log)
                .find(|&a| eval_poly(t, cp, a).is_zero())
                .expect("irreducible polynomial of degree n splits in K");
            PolyKind::Irreducible(alpha)
        }
    }
}

fn finish_class(t: &Tower, g: &Mat, kind: PolyKind) -> ClassKind {
    match kind {
        PolyKind::PurePower(z) => {
            let mut shifted = *g;
            for i in 0..g.n() {
                shifted.set(i, i, t.sub(g.get(i, i), z));
            }
            ClassKind::CentralTimesUnipotent {
                z,
                blocks: g.n() - shifted.rank(t),
            }
        }
        PolyKind::Irreducible(alpha) => ClassKind::RegularElliptic { alpha },
        PolyKind::Other => ClassKind::Other,
    }
}

/// Conjugacy data of `g ∈ GL_n(E)`.
pub fn class_data(t: &Tower, g: &Mat) -> Result<ClassKind> {
    if !(2..=3).contains(&g.n()) {
        return Err(Error::UnsupportedRank(g.n()));
    }
    if !g.is_invertible(t) {
        return Err(Error::Singular);
    }
    let cp = g.char_poly(t);
    Ok(finish_class(t, g, classify_poly(t, &cp)))
}

/// Dense data on `G = GL_n(E)`: every element, its position lookup and its class.
///
/// Classes are interned so that a cuspidal character is a short vector of
/// values indexed by class id.
#[derive(Clone, Debug)]
pub struct GroupTable {
    n: usize,
    elements: Vec<Mat>,
    /// Matrix index → position in `elements`, `u32::MAX` when singular.
    position: Vec<u32>,
    class_of: Vec<u16>,
    classes: Vec<ClassKind>,
}

impl GroupTable {
    pub fn build(t: &Tower, budget: u64) -> Result<Self> {
        let n = t.n();
        let elements: Vec<Mat> = enumerate_gl(t, n, Level::E, budget)?.collect();
        let space = level_pow(t, Level::E, (n * n) as u32) as usize;
        let mut position = vec![u32::MAX; space];
        for (i, g) in elements.iter().enumerate() {
            position[g.index(t)] = i as u32;
        }
        let polys: Vec<Vec<FieldElem>> = elements.par_iter().map(|g| g.char_poly(t)).collect();
        let mut poly_kind: HashMap<Vec<FieldElem>, PolyKind> = HashMap::new();
        for cp in &polys {
            if !poly_kind.contains_key(cp) {
                poly_kind.insert(cp.clone(), classify_poly(t, cp));
            }
        }
        let kinds: Vec<ClassKind> = elements
            .par_iter()
            .zip(polys.par_iter())
            .map(|(g, cp)| finish_class(t, g, poly_kind[cp]))
            .collect();
        let mut intern: HashMap<ClassKind, u16> = HashMap::new();
        let mut classes = Vec::new();
        let class_of = kinds
            .into_iter()
            .map(|k| {
                *intern.entry(k).or_insert_with(|| {
                    classes.push(k);
                    (classes.len() - 1) as u16
                })
            })
            .collect();
        Ok(GroupTable {
            n,
            elements,
            position,
            class_of,
            classes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Mat] {
        &self.elements
    }

    pub fn classes(&self) -> &[ClassKind] {
        &self.classes
    }

    /// Position of `g` in the element list; `g` must be over `E` and invertible.
    #[inline]
    pub fn position(&self, t: &Tower, g: &Mat) -> usize {
        let p = self.position[g.at_level(Level::E).index(t)];
        debug_assert_ne!(p, u32::MAX, "singular matrix has no position");
        p as usize
    }

    #[inline]
    pub fn class_at(&self, pos: usize) -> u16 {
        self.class_of[pos]
    }

    #[inline]
    pub fn class_of(&self, t: &Tower, g: &Mat) -> u16 {
        self.class_of[self.position(t, g)]
    }
}
