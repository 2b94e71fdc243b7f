//! The `asai` command line: list, gamma, verify, level-zero, golden.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asai::{analyze, AsaiContext, ContextOptions, RepAnalysis};
use crate::cuspidal::{list_cuspidal, CuspidalRep};
use crate::error::{Error, Result};
use crate::field::{Tower, DEFAULT_BUDGET};
use crate::level_zero::{asai_l, coefficient_identity, epsilon_check, local_gamma_vol, RationalFn};
use crate::verify::{run_all, sample_lambdas, SuiteResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "asai", version, about = "Asai gamma factors of cuspidal representations of GL_n(F_{q^2})")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List cuspidal orbits with dimension and distinction.
    List(ConfigArgs),
    /// Compute gamma records for every (or the selected) orbit.
    Gamma(ConfigArgs),
    /// Run every invariant suite for the tower.
    Verify(ConfigArgs),
    /// Level-zero L, gamma and epsilon factors.
    LevelZero(LevelZeroArgs),
    /// Write (--out) or compare against (--check) a golden gamma file.
    Golden(GoldenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Characteristic.
    #[arg(long)]
    pub p: u64,
    /// Degree of F = F_q over F_p.
    #[arg(long, default_value_t = 1)]
    pub f: u32,
    /// Matrix size, 2 or 3.
    #[arg(long)]
    pub n: usize,
    /// Restrict to the orbits of these character exponents.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Vec<i64>,
    /// Override z = g^Z, which must lie in E but not F.
    #[arg(long)]
    pub z: Option<u64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Maximum enumeration size.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Seed for sampled checks and translates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format; defaults to table on stdout, jsonl with --out.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LevelZeroArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Central parameter λ as `re` or `re:im`; repeatable.
    #[arg(long = "lambda", value_parser = parse_complex, allow_negative_numbers = true)]
    pub lambda: Vec<Complex64>,
}

#[derive(Debug, Clone, Args)]
pub struct GoldenArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Compare against this golden file instead of writing one.
    #[arg(long, conflicts_with = "out")]
    pub check: Option<PathBuf>,
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

/// The run parameters, echoed at the top of every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u64,
    pub f: u32,
    pub n: usize,
    pub theta: Option<Vec<i64>>,
    pub z: Option<u64>,
    pub tol: f64,
    pub budget: u64,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<Self> {
        if !(a.tol.is_finite() && a.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", a.tol)));
        }
        Ok(RunConfig {
            p: a.p,
            f: a.f,
            n: a.n,
            theta: (!a.theta.is_empty()).then(|| a.theta.clone()),
            z: a.z,
            tol: a.tol,
            budget: a.budget,
            seed: a.seed,
        })
    }

    pub fn tower(&self) -> Result<Arc<Tower>> {
        let t = Tower::with_budget(self.p, self.f, self.n, self.budget)?;
        Ok(Arc::new(match self.z {
            Some(z) => t.with_z(z)?,
            None => t,
        }))
    }

    /// Selected orbits in canonical order, without duplicates.
    pub fn reps(&self, tower: &Arc<Tower>) -> Result<Vec<CuspidalRep>> {
        match &self.theta {
            None => Ok(list_cuspidal(tower)),
            Some(ks) => {
                let mut reps = ks
                    .iter()
                    .map(|&k| CuspidalRep::new(tower.clone(), k))
                    .collect::<Result<Vec<_>>>()?;
                reps.sort_by_key(|r| r.theta().exponent());
                reps.dedup_by_key(|r| r.theta().exponent());
                Ok(reps)
            }
        }
    }

    fn context(&self, tower: Arc<Tower>) -> Result<AsaiContext> {
        AsaiContext::build(
            tower,
            ContextOptions {
                budget: self.budget,
                seed: self.seed,
                ..ContextOptions::default()
            },
        )
    }

    fn echo(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "config": self })).expect("config serializes")
    }
}

/// Rounds to 12 significant digits; values below `1e-12` become `0`.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < 1e-12 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRecord {
    pub q: u64,
    pub n: usize,
    pub theta_orbit: Vec<u64>,
    pub z_log: u32,
    pub distinguished: bool,
    pub multiplicity: u64,
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub gamma_abs: f64,
    pub coset_sum: f64,
    pub route_a_vs_b_dev: f64,
    pub criteria_agreement: bool,
}

pub const GAMMA_COLUMNS: [&str; 12] = [
    "q",
    "n",
    "theta_orbit",
    "z_log",
    "distinguished",
    "multiplicity",
    "gamma_re",
    "gamma_im",
    "gamma_abs",
    "coset_sum",
    "route_a_vs_b_dev",
    "criteria_agreement",
];

impl GammaRecord {
    pub fn from_analysis(t: &Tower, a: &RepAnalysis) -> Self {
        let g = a.gamma();
        GammaRecord {
            q: t.q(),
            n: t.n(),
            theta_orbit: a.rep.theta_orbit(),
            z_log: t.z_log(),
            distinguished: a.distinction.distinguished,
            multiplicity: a.distinction.multiplicity,
            gamma_re: round12(g.re),
            gamma_im: round12(g.im),
            gamma_abs: round12(g.norm()),
            coset_sum: round12(a.distinction.coset_sum.re),
            route_a_vs_b_dev: round12(a.route_deviation()),
            criteria_agreement: a.distinction.criteria_agree(),
        }
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            self.n.to_string(),
            join_orbit(&self.theta_orbit),
            self.z_log.to_string(),
            self.distinguished.to_string(),
            self.multiplicity.to_string(),
            self.gamma_re.to_string(),
            self.gamma_im.to_string(),
            self.gamma_abs.to_string(),
            self.coset_sum.to_string(),
            self.route_a_vs_b_dev.to_string(),
            self.criteria_agreement.to_string(),
        ]
    }

    fn numbers(&self) -> [(&'static str, f64); 5] {
        [
            ("gamma_re", self.gamma_re),
            ("gamma_im", self.gamma_im),
            ("gamma_abs", self.gamma_abs),
            ("coset_sum", self.coset_sum),
            ("route_a_vs_b_dev", self.route_a_vs_b_dev),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListRecord {
    pub q: u64,
    pub n: usize,
    pub theta_orbit: Vec<u64>,
    pub dim: u64,
    pub distinguished: bool,
}

const LIST_COLUMNS: [&str; 5] = ["q", "n", "theta_orbit", "dim", "distinguished"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelZeroRecord {
    pub q: u64,
    pub n: usize,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub l_factor: String,
    pub gamma_vol: String,
    pub epsilon_vol: String,
    pub c2_vol_re: f64,
    pub c2_vol_im: f64,
    pub c3: i32,
    pub identity_dev: f64,
}

const LEVEL_ZERO_COLUMNS: [&str; 11] = [
    "q",
    "n",
    "lambda_re",
    "lambda_im",
    "l_factor",
    "gamma_vol",
    "epsilon_vol",
    "c2_vol_re",
    "c2_vol_im",
    "c3",
    "identity_dev",
];

const SUITE_COLUMNS: [&str; 5] = ["suite", "passed", "max_dev", "checked", "detail"];

fn join_orbit(orbit: &[u64]) -> String {
    orbit.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn fmt_rational(r: &RationalFn) -> String {
    format!("[{}] / [{}]", r.num(), r.den())
}

/// Runs the analysis for every selected orbit and checks the record invariants.
pub fn compute_gamma(cfg: &RunConfig) -> Result<Vec<GammaRecord>> {
    let tower = cfg.tower()?;
    let reps = cfg.reps(&tower)?;
    let ctx = cfg.context(tower.clone())?;
    let analyses = analyze_all(&ctx, &reps, cfg.tol)?;
    let qn = (tower.q() as f64).powi(tower.n() as i32);
    let mut records = Vec::with_capacity(analyses.len());
    for a in &analyses {
        let expected = if a.distinction.distinguished { 1.0 } else { qn.sqrt() };
        if (a.gamma().norm() - expected).abs() > cfg.tol {
            return Err(Error::Verification(format!(
                "|γ| = {} for orbit {:?}, expected {expected}",
                a.gamma().norm(),
                a.rep.theta_orbit()
            )));
        }
        if a.route_deviation() > cfg.tol {
            return Err(Error::Verification(format!(
                "routes disagree by {:.3e} for orbit {:?}",
                a.route_deviation(),
                a.rep.theta_orbit()
            )));
        }
        records.push(GammaRecord::from_analysis(&tower, a));
    }
    Ok(records)
}

fn analyze_all(ctx: &AsaiContext, reps: &[CuspidalRep], tol: f64) -> Result<Vec<RepAnalysis>> {
    reps.par_iter().map(|r| analyze(ctx, r, tol)).collect()
}

pub fn compute_list(cfg: &RunConfig) -> Result<Vec<ListRecord>> {
    let tower = cfg.tower()?;
    let reps = cfg.reps(&tower)?;
    let ctx = cfg.context(tower.clone())?;
    reps.par_iter()
        .map(|r| {
            let b = ctx.bessel(r, 1);
            let d = crate::asai::distinction(&ctx, &b)?;
            Ok(ListRecord {
                q: tower.q(),
                n: tower.n(),
                theta_orbit: r.theta_orbit(),
                dim: r.dim(),
                distinguished: d.distinguished,
            })
        })
        .collect()
}

pub fn compute_verify(cfg: &RunConfig) -> Result<Vec<SuiteResult>> {
    let tower = cfg.tower()?;
    let reps = cfg.reps(&tower)?;
    let ctx = cfg.context(tower)?;
    let analyses = analyze_all(&ctx, &reps, cfg.tol)?;
    let mut suites = run_all(&ctx, &reps, &analyses, cfg.tol, cfg.seed)?.suites;
    for s in &mut suites {
        s.max_dev = round12(s.max_dev);
    }
    Ok(suites)
}

pub fn compute_level_zero(cfg: &RunConfig, lambdas: &[Complex64]) -> Result<Vec<LevelZeroRecord>> {
    let tower = cfg.tower()?;
    let (q, n) = (tower.q(), tower.n());
    let c1 = Complex64::new((q as f64).powi(n as i32) - 1.0, 0.0);
    lambdas
        .iter()
        .map(|&lambda| {
            let l = asai_l(q, n, lambda, true)?;
            let gamma = local_gamma_vol(q, n, lambda, (-1.0).into(), c1)?;
            let eps = epsilon_check(q, n, lambda)?;
            let (lhs, rhs) = coefficient_identity(q, n, lambda);
            let dev = (&lhs - &rhs).max_norm().max(eps.max_dev);
            Ok(LevelZeroRecord {
                q,
                n,
                lambda_re: round12(lambda.re),
                lambda_im: round12(lambda.im),
                l_factor: fmt_rational(&l),
                gamma_vol: fmt_rational(&gamma),
                epsilon_vol: format!(
                    "({:.6}{:+.6}i)X^{}",
                    round12(eps.c2_vol.re),
                    round12(eps.c2_vol.im),
                    eps.c3
                ),
                c2_vol_re: round12(eps.c2_vol.re),
                c2_vol_im: round12(eps.c2_vol.im),
                c3: eps.c3,
                identity_dev: round12(dev),
            })
        })
        .collect()
}

/// Serializes records with the config echo on the first line.
pub fn render<T: Serialize>(
    cfg: &RunConfig,
    format: Format,
    columns: &[&str],
    records: &[T],
    cells: impl Fn(&T) -> Vec<String>,
) -> String {
    let mut out = String::new();
    match format {
        Format::Jsonl => {
            out.push_str(&cfg.echo());
            out.push('\n');
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("record serializes"));
                out.push('\n');
            }
        }
        Format::Csv => {
            let _ = writeln!(out, "# {}", cfg.echo());
            out.push_str(&columns.join(","));
            out.push('\n');
            for r in records {
                let row: Vec<String> = cells(r).into_iter().map(csv_escape).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        Format::Table => {
            let _ = writeln!(out, "# {}", cfg.echo());
            let rows: Vec<Vec<String>> = records.iter().map(&cells).collect();
            let widths: Vec<usize> = (0..columns.len())
                .map(|i| {
                    rows.iter()
                        .map(|r| r[i].chars().count())
                        .chain([columns[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let header: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
            out.push_str(&line(&header));
            out.push('\n');
            for r in &rows {
                out.push_str(&line(r));
                out.push('\n');
            }
        }
    }
    out
}

fn csv_escape(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

pub fn render_gamma(cfg: &RunConfig, format: Format, records: &[GammaRecord]) -> String {
    render(cfg, format, &GAMMA_COLUMNS, records, GammaRecord::cells)
}

/// Parses a JSON-lines gamma file into its config and records.
pub fn parse_gamma_jsonl(text: &str) -> Result<(RunConfig, Vec<GammaRecord>)> {
    #[derive(Deserialize)]
    struct Echo {
        config: RunConfig,
    }
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| Error::GoldenMismatch("golden file is empty".into()))?;
    let config = serde_json::from_str::<Echo>(first)?.config;
    let records = lines
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect::<Result<Vec<GammaRecord>>>()?;
    Ok((config, records))
}

/// Compares fresh records to golden ones; numeric fields within `tol`, the rest exactly.
pub fn compare_golden(
    cfg: &RunConfig,
    golden_cfg: &RunConfig,
    fresh: &[GammaRecord],
    golden: &[GammaRecord],
    tol: f64,
) -> Result<()> {
    let key = |c: &RunConfig| (c.p, c.f, c.n, c.theta.clone(), c.z, c.seed);
    if key(cfg) != key(golden_cfg) {
        return Err(Error::GoldenMismatch(format!(
            "config differs: run {cfg:?}, golden {golden_cfg:?}"
        )));
    }
    if fresh.len() != golden.len() {
        return Err(Error::GoldenMismatch(format!(
            "{} records, golden has {}",
            fresh.len(),
            golden.len()
        )));
    }
    for (a, b) in fresh.iter().zip(golden) {
        let discrete = |r: &GammaRecord| {
            (r.q, r.n, r.theta_orbit.clone(), r.z_log, r.distinguished, r.multiplicity, r.criteria_agreement)
        };
        if discrete(a) != discrete(b) {
            return Err(Error::GoldenMismatch(format!("record {:?} vs golden {:?}", a, b)));
        }
        for ((name, x), (_, y)) in a.numbers().iter().zip(b.numbers().iter()) {
            if (x - y).abs() > tol {
                return Err(Error::GoldenMismatch(format!(
                    "orbit {:?}: {name} = {x}, golden {y}",
                    a.theta_orbit
                )));
            }
        }
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn format_for(a: &ConfigArgs) -> Format {
    a.format.unwrap_or(if a.out.is_some() { Format::Jsonl } else { Format::Table })
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CriteriaDisagree(_) | Error::Verification(_) | Error::GoldenMismatch(_) => EXIT_VERIFY,
        _ => EXIT_USAGE,
    }
}

fn run_command(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::List(a) => {
            let cfg = RunConfig::from_args(a)?;
            let records = compute_list(&cfg)?;
            let text = render(&cfg, format_for(a), &LIST_COLUMNS, &records, |r| {
                vec![
                    r.q.to_string(),
                    r.n.to_string(),
                    join_orbit(&r.theta_orbit),
                    r.dim.to_string(),
                    r.distinguished.to_string(),
                ]
            });
            emit(&text, a.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Gamma(a) => {
            let cfg = RunConfig::from_args(a)?;
            let records = compute_gamma(&cfg)?;
            emit(&render_gamma(&cfg, format_for(a), &records), a.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Verify(a) => {
            let cfg = RunConfig::from_args(a)?;
            let suites = compute_verify(&cfg)?;
            let text = render(&cfg, format_for(a), &SUITE_COLUMNS, &suites, |s| {
                vec![
                    s.suite.clone(),
                    if s.passed { "PASS" } else { "FAIL" }.to_string(),
                    s.max_dev.to_string(),
                    s.checked.to_string(),
                    s.detail.clone(),
                ]
            });
            emit(&text, a.out.as_deref())?;
            Ok(if suites.iter().all(|s| s.passed) { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::LevelZero(l) => {
            let cfg = RunConfig::from_args(&l.config)?;
            let lambdas = if l.lambda.is_empty() {
                sample_lambdas(3, cfg.seed)
            } else {
                l.lambda.clone()
            };
            if lambdas.iter().any(|x| x.norm() == 0.0) {
                return Err(Error::Config("λ must be nonzero".into()));
            }
            let records = compute_level_zero(&cfg, &lambdas)?;
            let text = render(&cfg, format_for(&l.config), &LEVEL_ZERO_COLUMNS, &records, |r| {
                vec![
                    r.q.to_string(),
                    r.n.to_string(),
                    r.lambda_re.to_string(),
                    r.lambda_im.to_string(),
                    r.l_factor.clone(),
                    r.gamma_vol.clone(),
                    r.epsilon_vol.clone(),
                    r.c2_vol_re.to_string(),
                    r.c2_vol_im.to_string(),
                    r.c3.to_string(),
                    r.identity_dev.to_string(),
                ]
            });
            emit(&text, l.config.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Golden(g) => {
            let cfg = RunConfig::from_args(&g.config)?;
            if g.config.format.is_some_and(|f| f != Format::Jsonl) {
                return Err(Error::Config("golden files are always jsonl".into()));
            }
            let records = compute_gamma(&cfg)?;
            let text = render_gamma(&cfg, Format::Jsonl, &records);
            match (&g.check, &g.config.out) {
                (Some(path), _) => {
                    let golden_text = fs::read_to_string(path)?;
                    let (golden_cfg, golden) = parse_gamma_jsonl(&golden_text)?;
                    compare_golden(&cfg, &golden_cfg, &records, &golden, cfg.tol)?;
                    let identical = golden_text == text;
                    println!(
                        "golden {}: {} records match within {}; byte-identical: {identical}",
                        path.display(),
                        records.len(),
                        cfg.tol
                    );
                }
                (None, Some(path)) => {
                    fs::write(path, &text)?;
                    println!("wrote {} records to {}", records.len(), path.display());
                }
                (None, None) => {
                    return Err(Error::Config("golden needs --out FILE or --check FILE".into()))
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_command(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
