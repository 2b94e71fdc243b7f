//! Zeta sums over `N_n(F) \ GL_n(F)`, the Asai gamma factor and distinction.
//!
//! The gamma factor is computed two ways:
//!
//! * [`gamma_bessel`]: `γ = Σ_{g ∈ N_n(F)\H} 𝓑(g) ψ((g^{-1})_{n1})`;
//! * [`gamma_fe`]: the constant of proportionality in
//!   `γ·Z(W, φ; ψ) = Z(W̃, 𝓕_ψ φ; ψ^{-1})`, checked over right translates of
//!   the Bessel function and all point indicators `δ_x`, `x ≠ 0`.
//!
//! Distinction by `H = GL_n(F)` is decided by four independent criteria that
//! must agree: the `H`-average of the character, `χ∘τ = χ`, the Bessel
//! symmetry `𝓑(θ(g)^{-1}) = 𝓑(g)`, and the coset sum `Σ 𝓑 ∈ {q^n - 1, 0}`.

use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bessel::{BesselFn, BesselKernel};
use crate::cuspidal::{as_count, avg_over, norm_over, CuspidalRep, Subgroup, INTEGRAL_TOL};
use crate::error::{Error, Result};
use crate::field::{FieldElem, Level, Tower, DEFAULT_BUDGET};
use crate::matgroup::{proper_compositions, CosetSide, CosetTable, GroupTable, Mat};

/// Tolerance on functional-equation ratio dispersion and Bessel identities.
pub const FE_TOL: f64 = 1e-8;

/// Position of a vector of `F^n` in row order (first coordinate most significant).
pub fn vector_index(t: &Tower, v: &[FieldElem]) -> usize {
    let q = t.q() as usize;
    v.iter().fold(0, |acc, &x| {
        acc * q + t.level_index(x, Level::F).expect("coordinate lies in F")
    })
}

pub fn vector_from_index(t: &Tower, n: usize, mut index: usize) -> Vec<FieldElem> {
    let q = t.q() as usize;
    let mut v = vec![FieldElem::ZERO; n];
    for slot in v.iter_mut().rev() {
        *slot = t.level_elem(Level::F, index % q);
        index /= q;
    }
    v
}

/// A complex-valued function on `F^n`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct SchwartzFn {
    n: usize,
    values: Vec<Complex64>,
}

impl SchwartzFn {
    pub fn zero(t: &Tower) -> Self {
        let len = (t.q() as usize).pow(t.n() as u32);
        SchwartzFn {
            n: t.n(),
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_values(t: &Tower, values: Vec<Complex64>) -> Result<Self> {
        let expected = (t.q() as usize).pow(t.n() as u32);
        if values.len() != expected {
            return Err(Error::Config(format!(
                "Schwartz table has {} entries, expected {expected}",
                values.len()
            )));
        }
        Ok(SchwartzFn { n: t.n(), values })
    }

    pub fn constant(t: &Tower, c: Complex64) -> Self {
        let mut f = Self::zero(t);
        f.values.iter_mut().for_each(|v| *v = c);
        f
    }

    /// Indicator of the vector with position `index`.
    pub fn delta(t: &Tower, index: usize) -> Self {
        let mut f = Self::zero(t);
        f.values[index] = Complex64::new(1.0, 0.0);
        f
    }

    /// `φ_n`, the indicator of `e_n = (0, …, 0, 1)`.
    pub fn phi_n(t: &Tower) -> Self {
        Self::delta(t, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    pub fn add(&self, other: &SchwartzFn) -> SchwartzFn {
        SchwartzFn {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> SchwartzFn {
        SchwartzFn {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `(𝓕φ)(y) = Σ_x φ(x) ψ(±⟨x, y⟩)`.
    pub fn fourier(&self, t: &Tower, sign: i8) -> SchwartzFn {
        let vecs: Vec<Vec<FieldElem>> = (0..self.len())
            .map(|i| vector_from_index(t, self.n, i))
            .collect();
        let values = vecs
            .iter()
            .map(|y| {
                vecs.iter()
                    .zip(&self.values)
                    .filter(|(_, v)| v.norm_sqr() != 0.0)
                    .map(|(x, v)| v * t.psi_at(Level::F, pairing_index(t, x, y), sign))
                    .sum()
            })
            .collect();
        SchwartzFn { n: self.n, values }
    }
}

/// F-index of `⟨x, y⟩ = Σ x_i y_i`.
fn pairing_index(t: &Tower, x: &[FieldElem], y: &[FieldElem]) -> usize {
    let s = x
        .iter()
        .zip(y)
        .fold(FieldElem::ZERO, |acc, (&a, &b)| t.add(acc, t.mul(a, b)));
    t.level_index(s, Level::F).expect("pairing of F-vectors lies in F")
}

/// A finite combination `Σ c_h 𝓑(· h)` of right translates of the Bessel
/// function, optionally passed through `W ↦ W̃` some number of times.
#[derive(Clone, Debug, PartialEq)]
pub struct WhittakerElem {
    terms: Vec<(Complex64, Mat)>,
    tilde_count: u8,
}

impl WhittakerElem {
    /// The Bessel function itself.
    pub fn bessel(n: usize) -> Self {
        Self::translate(Mat::identity(n, Level::E))
    }

    /// `g ↦ 𝓑(g h)`.
    pub fn translate(h: Mat) -> Self {
        WhittakerElem {
            terms: vec![(Complex64::new(1.0, 0.0), h.at_level(Level::E))],
            tilde_count: 0,
        }
    }

    pub fn combination(terms: Vec<(Complex64, Mat)>) -> Self {
        WhittakerElem {
            terms: terms
                .into_iter()
                .map(|(c, h)| (c, h.at_level(Level::E)))
                .collect(),
            tilde_count: 0,
        }
    }

    /// `W̃(g) = W(ω_n · transpose(g)^{-1})`.
    pub fn tilde(&self) -> Self {
        WhittakerElem {
            terms: self.terms.clone(),
            tilde_count: self.tilde_count + 1,
        }
    }

    pub fn eval(&self, ctx: &AsaiContext, b: &BesselFn, g: &Mat) -> Result<Complex64> {
        let t = ctx.tower();
        let mut arg = g.at_level(Level::E);
        for _ in 0..self.tilde_count {
            arg = arg.tilde_arg(t)?;
        }
        Ok(self
            .terms
            .iter()
            .map(|(c, h)| c * b.value(ctx.group(), &arg.mul(h, t)))
            .sum())
    }
}

/// Per-coset data for `N_n(F) \ H`.
#[derive(Clone, Copy, Debug)]
struct CosetPoint {
    /// Position of `r` in `G`.
    pos: usize,
    /// Position of `e_n r` in `F^n`.
    last_row: usize,
    /// F-index of `(r^{-1})_{n1} = ⟨e_n r^{-1}, e_1⟩`.
    inv_n1: usize,
}

/// Knobs for [`AsaiContext::build`].
#[derive(Clone, Copy, Debug)]
pub struct ContextOptions {
    pub budget: u64,
    /// Use every representative of `G / N_n(E)` as a translate when there are at most this many.
    pub max_translates: usize,
    /// Otherwise, this many pseudo-random translates (plus the identity).
    pub sampled_translates: usize,
    pub seed: u64,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            budget: DEFAULT_BUDGET,
            max_translates: 1000,
            sampled_translates: 200,
            seed: 0,
        }
    }
}

/// Everything about a tower that does not depend on the representation.
pub struct AsaiContext {
    tower: Arc<Tower>,
    options: ContextOptions,
    group: GroupTable,
    kernel: BesselKernel,
    cosets: CosetTable,
    points: Vec<CosetPoint>,
    translates: Vec<Mat>,
    translates_exhaustive: bool,
    /// For each translate `h`: positions of `r h` and of `ω ᵗr^{-1} h`, per coset.
    translate_pos: Vec<(Vec<u32>, Vec<u32>)>,
    /// F-index of `⟨x, y⟩`, row-major over `F^n × F^n`.
    pairing: Vec<u32>,
    tau_pos: Vec<u32>,
    frob_inv_pos: Vec<u32>,
}

impl AsaiContext {
    pub fn build(tower: Arc<Tower>, options: ContextOptions) -> Result<Self> {
        let t = &*tower;
        let n = t.n();
        let budget = options.budget;
        let group = GroupTable::build(t, budget)?;
        let kernel = BesselKernel::build(t, &group, budget)?;
        let cosets = CosetTable::base(t, budget)?;
        let omega = Mat::omega(n, Level::E);
        let points = cosets
            .reps()
            .iter()
            .map(|r| {
                let inv = r.inverse(t)?;
                let re = r.at_level(Level::E);
                Ok(CosetPoint {
                    pos: group.position(t, &re),
                    last_row: vector_index(t, &r.row(n - 1)),
                    inv_n1: t
                        .level_index(inv.get(n - 1, 0), Level::F)
                        .expect("entry of an F-matrix"),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let (translates, translates_exhaustive) = choose_translates(t, &group, &kernel, options)?;
        let translate_pos = translates
            .par_iter()
            .map(|h| {
                let mut direct = Vec::with_capacity(points.len());
                let mut tilde = Vec::with_capacity(points.len());
                for r in cosets.reps() {
                    let re = r.at_level(Level::E);
                    direct.push(group.position(t, &re.mul(h, t)) as u32);
                    let arg = omega.mul(&re.transpose().inverse(t).expect("invertible"), t);
                    tilde.push(group.position(t, &arg.mul(h, t)) as u32);
                }
                (direct, tilde)
            })
            .collect();

        let len = (t.q() as usize).pow(n as u32);
        let vecs: Vec<Vec<FieldElem>> = (0..len).map(|i| vector_from_index(t, n, i)).collect();
        let pairing = vecs
            .iter()
            .flat_map(|x| vecs.iter().map(move |y| pairing_index(t, x, y) as u32))
            .collect();

        let (tau_pos, frob_inv_pos) = group
            .elements()
            .par_iter()
            .map(|g| {
                let tau = g.tau(t).expect("invertible");
                let fi = g.frob(t, 1).inverse(t).expect("invertible");
                (group.position(t, &tau) as u32, group.position(t, &fi) as u32)
            })
            .unzip();

        Ok(AsaiContext {
            tower,
            options,
            group,
            kernel,
            cosets,
            points,
            translates,
            translates_exhaustive,
            translate_pos,
            pairing,
            tau_pos,
            frob_inv_pos,
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn tower_arc(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn options(&self) -> ContextOptions {
        self.options
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    pub fn kernel(&self) -> &BesselKernel {
        &self.kernel
    }

    pub fn cosets(&self) -> &CosetTable {
        &self.cosets
    }

    pub fn translates(&self) -> &[Mat] {
        &self.translates
    }

    /// Whether the translates cover all of `G / N_n(E)`.
    pub fn translates_exhaustive(&self) -> bool {
        self.translates_exhaustive
    }

    pub fn bessel(&self, rep: &CuspidalRep, sign: i8) -> BesselFn {
        BesselFn::build(rep, &self.group, &self.kernel, sign)
    }

    fn vector_count(&self) -> usize {
        (self.tower.q() as usize).pow(self.tower.n() as u32)
    }

    #[inline]
    fn pair(&self, x: usize, y: usize) -> usize {
        self.pairing[x * self.vector_count() + y] as usize
    }
}

fn choose_translates(
    t: &Tower,
    group: &GroupTable,
    kernel: &BesselKernel,
    options: ContextOptions,
) -> Result<(Vec<Mat>, bool)> {
    let cosets = group.len() / kernel.unipotents().len();
    if cosets <= options.max_translates {
        let table = CosetTable::build(t, t.n(), Level::E, CosetSide::Right, options.budget)?;
        let id = Mat::identity(t.n(), Level::E);
        let id_rep = table.canonicalize(t, &id);
        let mut reps = vec![id];
        reps.extend(table.reps().iter().copied().filter(|r| *r != id_rep));
        return Ok((reps, true));
    }
    let seed = options.seed ^ ((t.p() as u64) << 32 | (t.f() as u64) << 16 | t.n() as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let canonical = |g: &Mat| {
        kernel
            .unipotents()
            .iter()
            .map(|u| g.mul(u, t))
            .min_by_key(|h| h.index(t))
            .expect("N_n(E) is nonempty")
    };
    let mut seen = HashSet::new();
    let mut out = vec![Mat::identity(t.n(), Level::E)];
    seen.insert(out[0]);
    while out.len() < options.sampled_translates + 1 {
        let g = canonical(&group.elements()[rng.gen_range(0..group.len())]);
        if seen.insert(g) {
            out.push(g);
        }
    }
    Ok((out, false))
}

/// `Z(W, φ; ψ) = Σ_{g ∈ N_n(F)\H} W(g) φ(e_n g)`.
pub fn zeta(ctx: &AsaiContext, b: &BesselFn, w: &WhittakerElem, phi: &SchwartzFn) -> Result<Complex64> {
    let t = ctx.tower();
    let n = t.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in ctx.cosets().reps() {
        let v = phi.at(vector_index(t, &r.row(n - 1)));
        if v.norm_sqr() != 0.0 {
            acc += w.eval(ctx, b, r)? * v;
        }
    }
    Ok(acc)
}

/// `γ = Σ_{g ∈ N_n(F)\H} 𝓑(g) ψ(⟨e_n g^{-1}, e_1⟩)`, with `ψ` matching the sign of `b`.
pub fn gamma_bessel(ctx: &AsaiContext, b: &BesselFn) -> Complex64 {
    let t = ctx.tower();
    ctx.points
        .iter()
        .map(|p| b.at(p.pos) * t.psi_at(Level::F, p.inv_n1, b.sign()))
        .sum()
}

/// Functional-equation data behind [`gamma_fe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFe {
    pub gamma: Complex64,
    /// `max |Z(W̃, 𝓕φ)/Z(W, φ) - γ|` over pairs with nonzero denominator, `φ(0) = 0`.
    pub dispersion: f64,
    /// `max |Z(W̃, 𝓕φ) - γ Z(W, φ)|` over all pairs with `φ(0) = 0`.
    pub residual: f64,
    /// Ratio dispersion for `φ = δ_0 + δ_x`, which has `φ(0) ≠ 0`.
    pub general_dispersion: f64,
    /// `max |Z(W̃, 𝓕δ_0) - γ Z(W, δ_0)|` over the translates.
    pub general_residual: f64,
    pub pairs_used: usize,
    pub pairs_total: usize,
}

impl GammaFe {
    /// Whether the functional equation also holds for `φ` with `φ(0) ≠ 0`.
    pub fn extends_to_all_phi(&self, tol: f64) -> bool {
        self.general_residual <= tol && self.general_dispersion <= tol
    }
}

/// Usable denominators must exceed this in modulus.
const DENOM_FLOOR: f64 = 1e-6;

/// The gamma factor as the constant in the functional equation.
pub fn gamma_fe(ctx: &AsaiContext, b: &BesselFn, tol: f64) -> Result<GammaFe> {
    let t = ctx.tower();
    let sign = b.sign();
    let nvec = ctx.vector_count();
    let psi = |x: usize, y: usize| t.psi_at(Level::F, ctx.pair(x, y), sign);

    // For each translate: den[x] = Z(W, δ_x), num[x] = Z(W̃, 𝓕δ_x).
    let sums: Vec<(Vec<Complex64>, Vec<Complex64>)> = ctx
        .translate_pos
        .par_iter()
        .map(|(direct, tilde)| {
            let mut den = vec![Complex64::new(0.0, 0.0); nvec];
            let mut num = vec![Complex64::new(0.0, 0.0); nvec];
            for (k, p) in ctx.points.iter().enumerate() {
                den[p.last_row] += b.at(direct[k] as usize);
                let wt = b.at(tilde[k] as usize);
                for (x, slot) in num.iter_mut().enumerate() {
                    *slot += wt * psi(x, p.last_row);
                }
            }
            (den, num)
        })
        .collect();

    // Reference pair: the Bessel function (first translate is the identity) and φ_n.
    debug_assert_eq!(ctx.translates[0], Mat::identity(t.n(), Level::E));
    let (den0, num0) = &sums[0];
    if den0[1].norm() <= DENOM_FLOOR {
        return Err(Error::Verification("Z(𝓑, φ_n) vanishes".into()));
    }
    let gamma = num0[1] / den0[1];

    let mut out = GammaFe {
        gamma,
        dispersion: 0.0,
        residual: 0.0,
        general_dispersion: 0.0,
        general_residual: 0.0,
        pairs_used: 0,
        pairs_total: 0,
    };
    for (den, num) in &sums {
        for x in 1..nvec {
            out.pairs_total += 1;
            out.residual = out.residual.max((num[x] - gamma * den[x]).norm());
            if den[x].norm() > DENOM_FLOOR {
                out.pairs_used += 1;
                out.dispersion = out.dispersion.max((num[x] / den[x] - gamma).norm());
                let general = (num[x] + num[0]) / (den[x] + den[0]);
                out.general_dispersion = out.general_dispersion.max((general - gamma).norm());
            }
        }
        out.general_residual = out.general_residual.max((num[0] - gamma * den[0]).norm());
    }
    if out.pairs_used == 0 {
        return Err(Error::Verification("no pair with nonzero zeta sum".into()));
    }
    if out.dispersion > tol || out.residual > tol {
        return Err(Error::Verification(format!(
            "functional-equation ratio is not constant: dispersion {:.3e}, residual {:.3e}",
            out.dispersion, out.residual
        )));
    }
    Ok(out)
}

/// The four distinction criteria.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistinctionReport {
    /// `(1/|H|) Σ_{h ∈ H} χ(h)`, rounded.
    pub multiplicity: u64,
    pub multiplicity_raw: Complex64,
    /// `χ(τ(g)) = χ(g)` for all `g ∈ G`.
    pub gow: bool,
    pub gow_dev: f64,
    /// `𝓑(θ(g)^{-1}) = 𝓑(g)` for all `g ∈ G`.
    pub bessel_sym: bool,
    pub bessel_sym_dev: f64,
    /// `Σ_{g ∈ N_n(F)\H} 𝓑(g)`.
    pub coset_sum: Complex64,
    pub coset_sum_verdict: bool,
    pub distinguished: bool,
}

pub fn distinction(ctx: &AsaiContext, b: &BesselFn) -> Result<DistinctionReport> {
    let t = ctx.tower();
    let rep = b.rep();
    let group = ctx.group();
    let h = Subgroup::BaseGroup.elements(t, ctx.options.budget)?;
    let multiplicity_raw = avg_over(rep, group, &h);
    let multiplicity = as_count(multiplicity_raw, "H-multiplicity")?;

    let chi = rep.class_values(group);
    let gow_dev = (0..group.len())
        .map(|pos| {
            let a = chi[group.class_at(ctx.tau_pos[pos] as usize) as usize];
            (a - chi[group.class_at(pos) as usize]).norm()
        })
        .fold(0.0, f64::max);
    let bessel_sym_dev = (0..group.len())
        .map(|pos| (b.at(ctx.frob_inv_pos[pos] as usize) - b.at(pos)).norm())
        .fold(0.0, f64::max);
    let coset_sum: Complex64 = ctx.points.iter().map(|p| b.at(p.pos)).sum();
    let target = (t.q() as f64).powi(t.n() as i32) - 1.0;
    let coset_sum_verdict = if (coset_sum - target).norm() < INTEGRAL_TOL {
        true
    } else if coset_sum.norm() < INTEGRAL_TOL {
        false
    } else {
        return Err(Error::Verification(format!(
            "coset sum {coset_sum} is neither 0 nor q^n - 1"
        )));
    };
    if multiplicity > 1 {
        return Err(Error::Verification(format!(
            "H-multiplicity {multiplicity} exceeds 1"
        )));
    }
    let report = DistinctionReport {
        multiplicity,
        multiplicity_raw,
        gow: gow_dev < INTEGRAL_TOL,
        gow_dev,
        bessel_sym: bessel_sym_dev < FE_TOL,
        bessel_sym_dev,
        coset_sum,
        coset_sum_verdict,
        distinguished: multiplicity == 1,
    };
    if !report.criteria_agree() {
        return Err(Error::CriteriaDisagree(format!(
            "theta orbit {:?}: {report:?}",
            rep.theta_orbit()
        )));
    }
    Ok(report)
}

impl DistinctionReport {
    pub fn criteria_agree(&self) -> bool {
        let v = self.multiplicity == 1;
        self.gow == v && self.bessel_sym == v && self.coset_sum_verdict == v
    }
}

/// Character checks: `⟨χ,χ⟩_G`, averages over parabolic radicals, `P_n(F)`,
/// `N_n(E)`, and the norm of the restriction to `P_n(E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterSanity {
    pub norm_g: f64,
    pub radical_avgs: Vec<(Vec<usize>, Complex64)>,
    pub avg_mirabolic_f: Complex64,
    pub avg_unipotent_e: Complex64,
    pub norm_mirabolic_e: f64,
}

impl CharacterSanity {
    pub fn max_dev(&self) -> f64 {
        let mut dev = (self.norm_g - 1.0).abs();
        for (_, v) in &self.radical_avgs {
            dev = dev.max(v.norm());
        }
        dev.max((self.avg_mirabolic_f - 1.0).norm())
            .max(self.avg_unipotent_e.norm())
            .max((self.norm_mirabolic_e - 1.0).abs())
    }
}

/// Subgroup element lists reused across representations.
pub struct SubgroupCache {
    mirabolic_f: Vec<Mat>,
    mirabolic_e: Vec<Mat>,
    unipotent_e: Vec<Mat>,
    radicals: Vec<(Vec<usize>, Vec<Mat>)>,
}

impl SubgroupCache {
    pub fn build(ctx: &AsaiContext) -> Result<Self> {
        let t = ctx.tower();
        let budget = ctx.options.budget;
        Ok(SubgroupCache {
            mirabolic_f: Subgroup::MirabolicF.elements(t, budget)?,
            mirabolic_e: Subgroup::MirabolicE.elements(t, budget)?,
            unipotent_e: Subgroup::UnipotentE.elements(t, budget)?,
            radicals: proper_compositions(t.n())
                .into_iter()
                .map(|c| {
                    let elems = Subgroup::Radical(c.clone()).elements(t, budget)?;
                    Ok((c, elems))
                })
                .collect::<Result<_>>()?,
        })
    }
}

pub fn character_sanity(ctx: &AsaiContext, cache: &SubgroupCache, rep: &CuspidalRep) -> CharacterSanity {
    let group = ctx.group();
    let chi = rep.class_values(group);
    let norm_g = (0..group.len())
        .map(|pos| chi[group.class_at(pos) as usize].norm_sqr())
        .sum::<f64>()
        / group.len() as f64;
    CharacterSanity {
        norm_g,
        radical_avgs: cache
            .radicals
            .iter()
            .map(|(c, elems)| (c.clone(), avg_over(rep, group, elems)))
            .collect(),
        avg_mirabolic_f: avg_over(rep, group, &cache.mirabolic_f),
        avg_unipotent_e: avg_over(rep, group, &cache.unipotent_e),
        norm_mirabolic_e: norm_over(rep, group, &cache.mirabolic_e),
    }
}

/// Everything computed for one cuspidal representation.
#[derive(Clone, Debug)]
pub struct RepAnalysis {
    pub rep: CuspidalRep,
    pub gamma_bessel: Complex64,
    pub fe: GammaFe,
    pub distinction: DistinctionReport,
    /// `γ(π̃, ψ^{-1})` by the Bessel route.
    pub dual_gamma_bessel: Complex64,
    /// `γ(π̃, ψ^{-1})` by the functional-equation route.
    pub dual_fe: GammaFe,
}

impl RepAnalysis {
    pub fn gamma(&self) -> Complex64 {
        self.gamma_bessel
    }

    /// `|γ_bessel - γ_fe|`.
    pub fn route_deviation(&self) -> f64 {
        (self.gamma_bessel - self.fe.gamma)
            .norm()
            .max((self.dual_gamma_bessel - self.dual_fe.gamma).norm())
    }

    /// `γ(π, ψ)·γ(π̃, ψ^{-1})`.
    pub fn duality_product(&self) -> Complex64 {
        self.fe.gamma * self.dual_fe.gamma
    }

    /// `|conj γ(π, ψ) - γ(π̃, ψ^{-1})|`.
    pub fn conjugation_deviation(&self) -> f64 {
        (self.gamma_bessel.conj() - self.dual_gamma_bessel).norm()
    }
}

pub fn analyze(ctx: &AsaiContext, rep: &CuspidalRep, tol: f64) -> Result<RepAnalysis> {
    let b = ctx.bessel(rep, 1);
    let dual = ctx.bessel(&rep.contragredient(), -1);
    Ok(RepAnalysis {
        rep: rep.clone(),
        gamma_bessel: gamma_bessel(ctx, &b),
        fe: gamma_fe(ctx, &b, tol)?,
        distinction: distinction(ctx, &b)?,
        dual_gamma_bessel: gamma_bessel(ctx, &dual),
        dual_fe: gamma_fe(ctx, &dual, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuspidal::list_cuspidal;

    fn ctx(p: u64, n: usize) -> AsaiContext {
        let t = Arc::new(Tower::new(p, 1, n).unwrap());
        AsaiContext::build(t, ContextOptions::default()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn fourier_examples() {
        let t = Tower::new(3, 1, 2).unwrap();
        let delta0 = SchwartzFn::delta(&t, 0);
        let one = SchwartzFn::constant(&t, 1.0.into());
        assert!(delta0.fourier(&t, 1).values().iter().all(|v| close(*v, 1.0.into(), 1e-12)));
        let f1 = one.fourier(&t, 1);
        assert!(close(f1.at(0), 9.0.into(), 1e-12));
        assert!(f1.values()[1..].iter().all(|v| v.norm() < 1e-12));
        let fphi = SchwartzFn::phi_n(&t).fourier(&t, 1);
        for i in 0..fphi.len() {
            let y = vector_from_index(&t, 2, i);
            assert!(close(fphi.at(i), t.psi_f(y[1]).unwrap(), 1e-12));
        }
    }

    #[test]
    fn fourier_inversion_on_basis() {
        for (p, f, n) in [(2, 1, 2), (3, 1, 3), (2, 2, 2)] {
            let t = Tower::new(p, f, n).unwrap();
            let qn = (t.q() as f64).powi(n as i32);
            for i in 0..(t.q() as usize).pow(n as u32) {
                let phi = SchwartzFn::delta(&t, i);
                let back = phi.fourier(&t, 1).fourier(&t, -1);
                for (a, b) in back.values().iter().zip(phi.values()) {
                    assert!(close(*a, b * qn, 1e-10));
                }
            }
        }
    }

    #[test]
    fn zeta_examples() {
        let c = ctx(2, 2);
        let t = c.tower();
        for rep in list_cuspidal(c.tower_arc()) {
            let b = c.bessel(&rep, 1);
            let w = WhittakerElem::bessel(2);
            assert!(close(zeta(&c, &b, &w, &SchwartzFn::phi_n(t)).unwrap(), 1.0.into(), 1e-12));
            assert!(zeta(&c, &b, &w, &SchwartzFn::delta(t, 0)).unwrap().norm() < 1e-12);
            let d = distinction(&c, &b).unwrap();
            let z1 = zeta(&c, &b, &w, &SchwartzFn::constant(t, 1.0.into())).unwrap();
            if d.distinguished {
                assert!(close(z1, 3.0.into(), 1e-9));
            } else {
                assert!(z1.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn tilde_is_an_involution_and_equivariant() {
        let c = ctx(2, 2);
        let t = c.tower();
        let rep = &list_cuspidal(c.tower_arc())[0];
        let b = c.bessel(rep, 1);
        let h = c.group().elements()[17];
        let w = WhittakerElem::translate(h);
        let units = c.kernel().unipotents();
        for r in c.cosets().reps() {
            assert!(close(w.tilde().tilde().eval(&c, &b, r).unwrap(), w.eval(&c, &b, r).unwrap(), 1e-12));
        }
        for g in c.group().elements() {
            let wt = w.tilde();
            for u in units {
                let lhs = wt.eval(&c, &b, &u.mul(g, t)).unwrap();
                let psi_inv = crate::matgroup::psi_n(t, u, crate::field::AddChar::PSI_E).unwrap().conj();
                assert!(close(lhs, psi_inv * wt.eval(&c, &b, g).unwrap(), 1e-10));
            }
        }
        let bt = WhittakerElem::bessel(2).tilde();
        let id = Mat::identity(2, Level::E);
        assert!(close(bt.eval(&c, &b, &id).unwrap(), b.value(c.group(), &Mat::omega(2, Level::E)), 1e-12));
    }

    #[test]
    fn routes_agree_and_dichotomy_q2_n2() {
        let c = ctx(2, 2);
        let reps = list_cuspidal(c.tower_arc());
        for rep in &reps {
            let a = analyze(&c, rep, FE_TOL).unwrap();
            assert!(a.route_deviation() < 1e-8, "{a:?}");
            assert_eq!(a.distinction.distinguished, galois_oracle(c.tower(), rep.theta().exponent()));
            if a.distinction.distinguished {
                assert!(close(a.gamma(), (-1.0).into(), 1e-8));
            } else {
                assert!((a.gamma().norm() - 2.0).abs() < 1e-8);
                assert!(close(a.duality_product(), 4.0.into(), 1e-6));
                assert!(a.fe.extends_to_all_phi(1e-8));
            }
            assert!(a.conjugation_deviation() < 1e-8);
        }
    }

    /// Independent check: `π_θ` is distinguished iff `θ^{-1} = θ^{q^j}` for some odd `j < 2n`.
    fn galois_oracle(t: &Tower, k: u64) -> bool {
        let n = t.order() as u64;
        let mut pw = t.q() % n;
        for j in 1..2 * t.n() as u32 {
            if j % 2 == 1 && (k * pw + k).is_multiple_of(n) {
                return true;
            }
            pw = pw * t.q() % n;
        }
        false
    }

    #[test]
    fn oracle_has_no_distinguished_for_even_n() {
        for (p, f) in [(2, 1), (3, 1), (2, 2)] {
            let c = Arc::new(Tower::new(p, f, 2).unwrap());
            assert!(list_cuspidal(&c).iter().all(|r| !galois_oracle(&c, r.theta().exponent())));
        }
        let t3 = Arc::new(Tower::new(2, 1, 3).unwrap());
        let d: Vec<_> = list_cuspidal(&t3)
            .into_iter()
            .filter(|r| galois_oracle(&t3, r.theta().exponent()))
            .map(|r| r.theta().exponent())
            .collect();
        assert_eq!(d, vec![7, 14]);
    }

    #[test]
    fn zeta_matches_fast_route() {
        // The generic zeta/tilde evaluators reproduce the tabulated functional equation.
        let c = ctx(3, 2);
        let t = c.tower();
        let rep = &list_cuspidal(c.tower_arc())[3];
        let b = c.bessel(rep, 1);
        let fe = gamma_fe(&c, &b, FE_TOL).unwrap();
        for h in c.translates().iter().take(25) {
            let w = WhittakerElem::translate(*h);
            for x in 1..9 {
                let phi = SchwartzFn::delta(t, x);
                let lhs = fe.gamma * zeta(&c, &b, &w, &phi).unwrap();
                let rhs = zeta(&c, &b, &w.tilde(), &phi.fourier(t, 1)).unwrap();
                assert!(close(lhs, rhs, 1e-9));
            }
        }
    }
}
