//! Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned.

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use asai_gamma::asai::{
    analyze, character_sanity, AsaiContext, ContextOptions, RepAnalysis, SchwartzFn, SubgroupCache,
};
use asai_gamma::bessel::{verify_bessel_suite, SuiteMode};
use asai_gamma::cuspidal::{list_cuspidal, CuspidalRep};
use asai_gamma::level_zero::{
    asai_l, coefficient_identity, epsilon_check, epsilon_check_with, local_gamma_vol,
};
use asai_gamma::Tower;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA_TOL: f64 = 1e-8;
const DUALITY_TOL: f64 = 1e-6;
const CHAR_TOL: f64 = 1e-6;
const BESSEL_TOL: f64 = 1e-8;
const FOURIER_TOL: f64 = 1e-10;
const LEVEL_ZERO_TOL: f64 = 1e-10;
const BUDGET: u64 = 10_000_000;

struct Tower3 {
    label: &'static str,
    ctx: AsaiContext,
    reps: Vec<CuspidalRep>,
    analyses: Vec<RepAnalysis>,
    elapsed: Duration,
}

/// (p, n, expected orbit count, expected |γ| off the distinguished locus, runtime limit)
const TOWERS: [(u64, usize, usize, f64, u64, &str); 3] = [
    (2, 2, 6, 2.0, 1, "GL_2(F_4)"),
    (3, 2, 36, 3.0, 30, "GL_2(F_9)"),
    (2, 3, 20, std::f64::consts::SQRT_2 * 2.0, 120, "GL_3(F_4)"),
];

fn run_tower(p: u64, n: usize, label: &'static str) -> Tower3 {
    let start = Instant::now();
    let t = Arc::new(Tower::with_budget(p, 1, n, BUDGET).unwrap());
    let ctx = AsaiContext::build(t.clone(), ContextOptions::default()).unwrap();
    let reps = list_cuspidal(&t);
    let analyses = reps
        .iter()
        .map(|r| analyze(&ctx, r, GAMMA_TOL).unwrap())
        .collect();
    Tower3 {
        label,
        ctx,
        reps,
        analyses,
        elapsed: start.elapsed(),
    }
}

/// `π_θ` is distinguished iff `θ^{-1} = θ^{q^j}` for some odd `j`.
fn galois_distinguished(t: &Tower, k: u64) -> bool {
    let order = t.order() as u64;
    let mut pw = t.q() % order;
    for j in 1..2 * t.n() as u32 {
        if j % 2 == 1 && (k * pw + k).is_multiple_of(order) {
            return true;
        }
        pw = pw * t.q() % order;
    }
    false
}

struct Gate {
    failures: Vec<usize>,
}

impl Gate {
    fn report(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        println!("criterion {id} [{name}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(id);
        }
    }
}

fn lambdas(count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|i| {
            let r = if i % 2 == 0 { 1.0 } else { rng.gen_range(0.1..10.0) };
            Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

fn main() {
    let mut gate = Gate { failures: vec![] };
    let towers: Vec<Tower3> = TOWERS.iter().map(|&(p, n, .., label)| run_tower(p, n, label)).collect();

    // 1. Dichotomy and runtime.
    let mut ok = true;
    let mut detail = vec![];
    for (tw, &(_, _, orbits, modulus, limit, _)) in towers.iter().zip(&TOWERS) {
        let t = tw.ctx.tower();
        let mut dev = 0.0f64;
        let mut dist = 0;
        for a in &tw.analyses {
            let oracle = galois_distinguished(t, a.rep.theta().exponent());
            ok &= oracle == a.distinction.distinguished;
            if a.distinction.distinguished {
                dist += 1;
                dev = dev.max((a.gamma() + 1.0).norm());
            } else {
                dev = dev.max((a.gamma().norm() - modulus).abs());
            }
        }
        ok &= tw.reps.len() == orbits && dev <= GAMMA_TOL && tw.elapsed < Duration::from_secs(limit);
        detail.push(format!(
            "{}: {} orbits, {dist} distinguished, dev {dev:.1e}, {:.2?} < {limit}s",
            tw.label,
            tw.reps.len(),
            tw.elapsed
        ));
    }
    gate.report(1, "gamma dichotomy", ok, detail.join("; "));

    // 2. Route agreement.
    let mut route = 0.0f64;
    let mut general = 0.0f64;
    for a in towers.iter().flat_map(|t| &t.analyses) {
        route = route.max(a.route_deviation());
        if !a.distinction.distinguished {
            general = general.max(a.fe.general_dispersion).max(a.fe.general_residual);
        }
    }
    gate.report(
        2,
        "route agreement",
        route <= GAMMA_TOL && general <= GAMMA_TOL,
        format!("bessel vs fe {route:.1e}; phi(0) != 0 dispersion {general:.1e}"),
    );

    // 3. Duality.
    let mut prod = 0.0f64;
    let mut conj = 0.0f64;
    for tw in &towers {
        let t = tw.ctx.tower();
        let qn = (t.q() as f64).powi(t.n() as i32);
        for a in &tw.analyses {
            conj = conj.max((a.gamma_bessel.conj() - a.dual_gamma_bessel).norm());
            if !a.distinction.distinguished {
                prod = prod.max((a.fe.gamma * a.dual_fe.gamma - qn).norm());
            }
        }
    }
    gate.report(
        3,
        "duality",
        prod <= DUALITY_TOL && conj <= GAMMA_TOL,
        format!("γγ̃ - q^n {prod:.1e}; conj {conj:.1e}"),
    );

    // 4. Distinction criteria.
    let mut agree = true;
    let mut coset = 0.0f64;
    for tw in &towers {
        let t = tw.ctx.tower();
        let target = (t.q() as f64).powi(t.n() as i32) - 1.0;
        for a in &tw.analyses {
            let d = &a.distinction;
            let v = d.multiplicity == 1;
            agree &= d.multiplicity <= 1 && d.gow == v && d.bessel_sym == v && d.coset_sum_verdict == v;
            if v {
                coset = coset.max((d.coset_sum - target).norm());
            } else {
                agree &= d.coset_sum.norm() <= CHAR_TOL;
            }
        }
    }
    gate.report(
        4,
        "distinction criteria",
        agree && coset <= CHAR_TOL,
        format!("verdicts agree: {agree}; coset sum dev {coset:.1e}"),
    );

    // 5. Character sanity.
    let mut dev = 0.0f64;
    for tw in &towers {
        let cache = SubgroupCache::build(&tw.ctx).unwrap();
        for r in &tw.reps {
            dev = dev.max(character_sanity(&tw.ctx, &cache, r).max_dev());
        }
    }
    gate.report(5, "character sanity", dev <= CHAR_TOL, format!("max dev {dev:.1e}"));

    // 6. Bessel suite.
    let mut dev = 0.0f64;
    let mut triples = vec![];
    for (i, tw) in towers.iter().enumerate() {
        let mode = if i == 0 {
            SuiteMode::Exhaustive
        } else {
            SuiteMode::Sampled { count: 1000, seed: 7 }
        };
        let mut count = 0;
        for r in &tw.reps {
            let b = tw.ctx.bessel(r, 1);
            let rep = verify_bessel_suite(&b, tw.ctx.group(), tw.ctx.kernel(), mode, BUDGET).unwrap();
            dev = dev.max(rep.max_dev());
            count = rep.triples_checked;
        }
        triples.push(format!("{}: {count} triples/orbit", tw.label));
    }
    gate.report(6, "bessel suite", dev <= BESSEL_TOL, format!("max dev {dev:.1e}; {}", triples.join(", ")));

    // 7. Fourier inversion.
    let mut dev = 0.0f64;
    for (p, f) in [(2, 1), (3, 1), (2, 2)] {
        for n in [2, 3] {
            let t = Tower::new(p, f, n).unwrap();
            let len = (t.q() as usize).pow(n as u32);
            for i in 0..len {
                let phi = SchwartzFn::delta(&t, i);
                let back = phi.fourier(&t, 1).fourier(&t, -1);
                for (a, b) in back.values().iter().zip(phi.values()) {
                    dev = dev.max((a - b * len as f64).norm());
                }
            }
        }
    }
    gate.report(7, "fourier inversion", dev <= FOURIER_TOL, format!("max dev {dev:.1e}"));

    // 8. Level-zero identities.
    let mut ok = true;
    let mut dev = 0.0f64;
    for n in [2usize, 3] {
        for q in [2u64, 3] {
            for lambda in lambdas(20) {
                let (lhs, rhs) = coefficient_identity(q, n, lambda);
                dev = dev.max((&lhs - &rhs).max_norm());
                let e = epsilon_check(q, n, lambda).unwrap();
                ok &= e.c3 == n as i32;
                dev = dev.max((e.c2_vol - lambda.inv()).norm());
                ok &= asai_l(q, n, lambda, true).unwrap().pole_count() == n;
                let g = Complex64::new(-0.7, 0.4);
                let c = local_gamma_vol(q, n, lambda, g, 0.0.into()).unwrap().as_constant().unwrap();
                ok &= c.is_some_and(|c| (c - g).norm() <= LEVEL_ZERO_TOL);
            }
        }
    }
    for tw in &towers {
        let t = tw.ctx.tower();
        for a in tw.analyses.iter().filter(|a| a.distinction.distinguished) {
            for lambda in lambdas(5) {
                let e = epsilon_check_with(t.q(), t.n(), lambda, a.gamma(), a.distinction.coset_sum);
                ok &= e.is_ok_and(|e| e.c3 == t.n() as i32);
            }
        }
    }
    gate.report(
        8,
        "level-zero identities",
        ok && dev <= LEVEL_ZERO_TOL,
        format!("coefficient dev {dev:.1e}; monomial ε, c3 = n, n poles, constant γ: {ok}"),
    );

    // 9. Reproducibility against the shipped golden files.
    let bin = env!("CARGO_BIN_EXE_asai");
    let golden_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden");
    let tmp = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = vec![];
    for &(p, n, ..) in &TOWERS {
        let name = format!("q{p}_n{n}.jsonl");
        let shipped = std::fs::read(golden_dir.join(&name)).unwrap();
        let mut runs = vec![];
        for k in 0..2 {
            let out = tmp.path().join(format!("{k}_{name}"));
            let status = Command::new(bin)
                .args(["golden", "--p", &p.to_string(), "--n", &n.to_string(), "--out"])
                .arg(&out)
                .output()
                .unwrap()
                .status;
            ok &= status.success();
            runs.push(std::fs::read(&out).unwrap());
        }
        let check = Command::new(bin)
            .args(["golden", "--p", &p.to_string(), "--n", &n.to_string(), "--check"])
            .arg(golden_dir.join(&name))
            .output()
            .unwrap();
        let same = runs[0] == runs[1] && runs[0] == shipped;
        ok &= same && check.status.success();
        detail.push(format!("{name}: byte-identical {same}, check exit {:?}", check.status.code()));
    }
    gate.report(9, "reproducibility", ok, detail.join("; "));

    if gate.failures.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", gate.failures);
        std::process::exit(1);
    }
}
