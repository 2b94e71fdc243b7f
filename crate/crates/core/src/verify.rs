//! Invariant suites over one tower, from field axioms to level-zero identities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asai::{
    character_sanity, vector_from_index, AsaiContext, RepAnalysis, SchwartzFn, SubgroupCache,
};
use crate::bessel::{verify_bessel_suite, SuiteMode, BESSEL_TOL};
use crate::cuspidal::{CuspidalRep, INTEGRAL_TOL};
use crate::error::Result;
use crate::field::{FieldElem, Level, Tower};
use crate::level_zero::{
    asai_l, coefficient_identity, epsilon_check, epsilon_check_with, local_gamma_vol,
    IDENTITY_TOL,
};
use crate::matgroup::gl_order;

/// Tolerance for products like `γ·γ̃ = q^n`.
pub const DUALITY_TOL: f64 = 1e-6;
/// Tolerance for Fourier inversion.
pub const FOURIER_TOL: f64 = 1e-10;
/// Exhaustive bi-equivariance when `|G|·|N|²` is at most this.
pub const EXHAUSTIVE_TRIPLES: usize = 1_000_000;
/// Sample size for bi-equivariance otherwise.
pub const SAMPLED_TRIPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub max_dev: f64,
    pub checked: usize,
    pub detail: String,
}

impl SuiteResult {
    fn new(suite: &str, max_dev: f64, tol: f64, checked: usize, detail: String) -> Self {
        SuiteResult {
            suite: suite.to_string(),
            passed: max_dev <= tol,
            max_dev,
            checked,
            detail,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// Field axioms, Frobenius and additive characters on sampled triples.
pub fn field_suite(t: &Tower, samples: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = t.level_size(Level::K) as usize;
    let elem = |i: usize| if i == 0 { FieldElem::ZERO } else { FieldElem::from_log(i as u32 - 1) };
    let mut failures = 0usize;
    let mut psi_dev = 0.0f64;
    let f_size = t.level_size(Level::F) as usize;
    for _ in 0..samples {
        let (a, b, c) = (
            elem(rng.gen_range(0..size)),
            elem(rng.gen_range(0..size)),
            elem(rng.gen_range(0..size)),
        );
        let ok = t.add(t.add(a, b), c) == t.add(a, t.add(b, c))
            && t.mul(t.mul(a, b), c) == t.mul(a, t.mul(b, c))
            && t.mul(a, t.add(b, c)) == t.add(t.mul(a, b), t.mul(a, c))
            && t.add(a, t.neg(a)) == FieldElem::ZERO
            && t.inv(a).map_or(a.is_zero(), |i| t.mul(a, i) == FieldElem::ONE)
            && t.frob(t.add(a, b), 1) == t.add(t.frob(a, 1), t.frob(b, 1))
            && t.frob(t.mul(a, b), 1) == t.mul(t.frob(a, 1), t.frob(b, 1));
        failures += usize::from(!ok);
        let x = t.level_elem(Level::F, rng.gen_range(0..f_size));
        let y = t.level_elem(Level::F, rng.gen_range(0..f_size));
        let lhs = t.psi_f(t.add(x, y)).expect("x + y in F");
        let rhs = t.psi_f(x).expect("in F") * t.psi_f(y).expect("in F");
        psi_dev = psi_dev.max((lhs - rhs).norm());
    }
    let dev = if failures > 0 { f64::INFINITY } else { psi_dev };
    SuiteResult::new(
        "field_axioms",
        dev,
        1e-12,
        samples,
        format!("{failures} axiom failures, psi_F additivity dev {psi_dev:.3e}"),
    )
}

/// Group and coset counts against closed formulas.
pub fn group_suite(ctx: &AsaiContext) -> SuiteResult {
    let t = ctx.tower();
    let n = t.n();
    let g = gl_order(t, n, Level::E);
    let h = gl_order(t, n, Level::F);
    let nf = (t.q() as u128).pow((n * (n - 1) / 2) as u32);
    let ne = (t.big_q() as u128).pow((n * (n - 1) / 2) as u32);
    let ok = ctx.group().len() as u128 == g
        && ctx.cosets().len() as u128 == h / nf
        && ctx.kernel().unipotents().len() as u128 == ne;
    SuiteResult::new(
        "group_counts",
        if ok { 0.0 } else { f64::INFINITY },
        0.0,
        3,
        format!(
            "|G| = {}, |N(F)\\H| = {}, |N(E)| = {}",
            ctx.group().len(),
            ctx.cosets().len(),
            ctx.kernel().unipotents().len()
        ),
    )
}

pub fn character_suite(ctx: &AsaiContext, reps: &[CuspidalRep]) -> Result<SuiteResult> {
    let cache = SubgroupCache::build(ctx)?;
    let dev = reps
        .par_iter()
        .map(|r| character_sanity(ctx, &cache, r).max_dev())
        .reduce(|| 0.0, f64::max);
    Ok(SuiteResult::new(
        "character_sanity",
        dev,
        INTEGRAL_TOL,
        reps.len(),
        "<χ,χ> = 1, radical averages 0, P_n(F) average 1, N_n(E) average 0, |χ|_{P_n(E)}| = 1".into(),
    ))
}

/// Bessel mode used for this tower.
pub fn bessel_mode(ctx: &AsaiContext, seed: u64) -> SuiteMode {
    let m = ctx.kernel().unipotents().len();
    if ctx.group().len() * m * m <= EXHAUSTIVE_TRIPLES {
        SuiteMode::Exhaustive
    } else {
        SuiteMode::Sampled {
            count: SAMPLED_TRIPLES,
            seed,
        }
    }
}

pub fn bessel_suite(ctx: &AsaiContext, reps: &[CuspidalRep], seed: u64) -> Result<SuiteResult> {
    let mode = bessel_mode(ctx, seed);
    let budget = ctx.options().budget;
    let reports = reps
        .par_iter()
        .map(|r| {
            let b = ctx.bessel(r, 1);
            verify_bessel_suite(&b, ctx.group(), ctx.kernel(), mode, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    let dev = reports.iter().map(|r| r.max_dev()).fold(0.0, f64::max);
    let triples: usize = reports.iter().map(|r| r.triples_checked).sum();
    Ok(SuiteResult::new(
        "bessel",
        dev,
        BESSEL_TOL,
        triples,
        format!("{mode:?}; identity, bi-equivariance, support on P_n(E), g^-1 conjugation"),
    ))
}

pub fn gamma_suites(ctx: &AsaiContext, analyses: &[RepAnalysis], tol: f64) -> Vec<SuiteResult> {
    let t = ctx.tower();
    let qn = (t.q() as f64).powi(t.n() as i32);
    let mut dich = 0.0f64;
    let mut route = 0.0f64;
    let mut duality = 0.0f64;
    let mut conj = 0.0f64;
    let mut coset = 0.0f64;
    let mut agree = true;
    let mut distinguished = 0;
    for a in analyses {
        let g = a.gamma();
        route = route.max(a.route_deviation());
        conj = conj.max(a.conjugation_deviation());
        agree &= a.distinction.criteria_agree() && a.distinction.multiplicity <= 1;
        if a.distinction.distinguished {
            distinguished += 1;
            dich = dich.max((g + 1.0).norm());
            coset = coset.max((a.distinction.coset_sum - (qn - 1.0)).norm());
        } else {
            dich = dich.max((g.norm() - qn.sqrt()).abs());
            route = route.max(a.fe.general_dispersion).max(a.fe.general_residual);
            duality = duality.max((a.duality_product() - qn).norm());
        }
    }
    let count = analyses.len();
    vec![
        SuiteResult::new(
            "gamma_dichotomy",
            dich,
            tol,
            count,
            format!("{distinguished} distinguished: γ = -1; others |γ| = q^(n/2)"),
        ),
        SuiteResult::new(
            "route_agreement",
            route,
            tol,
            count,
            "Bessel sum vs functional equation; phi(0) != 0 for non-distinguished".into(),
        ),
        SuiteResult::new(
            "duality_product",
            duality,
            DUALITY_TOL,
            count,
            "γ(π,ψ)γ(π̃,ψ^-1) = q^n".into(),
        ),
        SuiteResult::new(
            "duality_conjugation",
            conj,
            tol,
            count,
            "conj γ(π,ψ) = γ(π̃,ψ^-1)".into(),
        ),
        SuiteResult::new(
            "distinction_criteria",
            if agree { coset } else { f64::INFINITY },
            INTEGRAL_TOL,
            count,
            "multiplicity, χ∘τ = χ, Bessel symmetry, coset sum agree".into(),
        ),
    ]
}

pub fn fourier_suite(t: &Tower) -> SuiteResult {
    let n = t.n();
    let len = (t.q() as usize).pow(n as u32);
    let qn = len as f64;
    let dev = (0..len)
        .into_par_iter()
        .map(|i| {
            let phi = SchwartzFn::delta(t, i);
            let back = phi.fourier(t, 1).fourier(t, -1);
            back.values()
                .iter()
                .zip(phi.values())
                .map(|(a, b)| (a - b * qn).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    debug_assert_eq!(vector_from_index(t, n, 1)[n - 1], FieldElem::ONE);
    SuiteResult::new(
        "fourier_inversion",
        dev,
        FOURIER_TOL,
        len,
        "F_{ψ^-1} F_ψ δ_x = q^n δ_x".into(),
    )
}

/// λ values on and off the unit circle.
pub fn sample_lambdas(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let arg = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = if i % 2 == 0 { 1.0 } else { rng.gen_range(0.2..5.0) };
            Complex64::from_polar(r, arg)
        })
        .collect()
}

pub fn level_zero_suite(t: &Tower, analyses: &[RepAnalysis], seed: u64) -> Result<SuiteResult> {
    let (q, n) = (t.q(), t.n());
    let lambdas = sample_lambdas(20, seed);
    let mut dev = 0.0f64;
    let mut failures = Vec::new();
    for &lambda in &lambdas {
        let (lhs, rhs) = coefficient_identity(q, n, lambda);
        dev = dev.max((&lhs - &rhs).max_norm());
        match epsilon_check(q, n, lambda) {
            Ok(e) => dev = dev.max(e.max_dev),
            Err(e) => failures.push(e.to_string()),
        }
        if asai_l(q, n, lambda, true)?.pole_count() != n {
            failures.push("pole count".into());
        }
        let g = Complex64::new(0.3, -1.1);
        match local_gamma_vol(q, n, lambda, g, 0.0.into())?.as_constant()? {
            Some(c) => dev = dev.max((c - g).norm()),
            None => failures.push("non-distinguished vol·γ depends on s".into()),
        }
        for a in analyses.iter().filter(|a| a.distinction.distinguished) {
            match epsilon_check_with(q, n, lambda, a.gamma(), a.distinction.coset_sum) {
                Ok(e) => dev = dev.max(e.max_dev),
                Err(e) => failures.push(format!("{:?}: {e}", a.rep.theta_orbit())),
            }
        }
    }
    if !failures.is_empty() {
        dev = f64::INFINITY;
    }
    Ok(SuiteResult::new(
        "level_zero",
        dev,
        IDENTITY_TOL,
        lambdas.len(),
        if failures.is_empty() {
            "coefficient identities, ε monomial with c3 = n, n poles, constant non-distinguished γ".into()
        } else {
            failures.join("; ")
        },
    ))
}

/// Every suite, in a fixed order.
pub fn run_all(
    ctx: &AsaiContext,
    reps: &[CuspidalRep],
    analyses: &[RepAnalysis],
    tol: f64,
    seed: u64,
) -> Result<VerifyReport> {
    let t = ctx.tower();
    let mut suites = vec![
        field_suite(t, 10_000, seed),
        group_suite(ctx),
        character_suite(ctx, reps)?,
        bessel_suite(ctx, reps, seed)?,
    ];
    suites.extend(gamma_suites(ctx, analyses, tol));
    suites.push(fourier_suite(t));
    suites.push(level_zero_suite(t, analyses, seed)?);
    Ok(VerifyReport { suites })
}
