//! Bessel functions of cuspidal representations,
//! `𝓑(g) = |N_n(E)|^{-1} Σ_{u ∈ N_n(E)} ψ_E^{-1}(u) χ_π(gu)`.
//!
//! A [`BesselKernel`] stores, for every `g ∈ G` and `u ∈ N_n(E)`, the class
//! of `gu`. It depends only on the tower, so the Bessel table of each
//! representation is a single pass of class-value lookups.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cuspidal::CuspidalRep;
use crate::error::{Error, Result};
use crate::field::{AddChar, Level, Tower};
use crate::matgroup::{class_data, enumerate_mirabolic, enumerate_unipotent, psi_n, GroupTable, Mat};

pub const BESSEL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct BesselKernel {
    unipotents: Vec<Mat>,
    psi_e: Vec<Complex64>,
    gu_class: Vec<u16>,
}

impl BesselKernel {
    pub fn build(t: &Tower, table: &GroupTable, budget: u64) -> Result<Self> {
        let unipotents: Vec<Mat> = enumerate_unipotent(t, t.n(), Level::E).collect();
        let size = table.len().max(unipotents.len()) as u128;
        if size > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "Bessel kernel enumeration",
                size,
                budget,
            });
        }
        let psi_e = unipotents
            .iter()
            .map(|u| psi_n(t, u, AddChar::PSI_E))
            .collect::<Result<Vec<_>>>()?;
        let gu_class = table
            .elements()
            .par_iter()
            .flat_map_iter(|g| unipotents.iter().map(move |u| table.class_of(t, &g.mul(u, t))))
            .collect();
        Ok(BesselKernel {
            unipotents,
            psi_e,
            gu_class,
        })
    }

    pub fn unipotents(&self) -> &[Mat] {
        &self.unipotents
    }

    /// `ψ_E(u_j)` for the `j`-th unipotent.
    pub fn psi_e(&self) -> &[Complex64] {
        &self.psi_e
    }
}

/// The Bessel function of `(π, ψ_E^sign)`, tabulated on all of `G`.
#[derive(Clone, Debug)]
pub struct BesselFn {
    rep: CuspidalRep,
    sign: i8,
    values: Vec<Complex64>,
}

impl BesselFn {
    pub fn build(rep: &CuspidalRep, table: &GroupTable, kernel: &BesselKernel, sign: i8) -> Self {
        let chi = rep.class_values(table);
        let weights: Vec<Complex64> = kernel
            .psi_e
            .iter()
            .map(|&v| if sign > 0 { v.conj() } else { v })
            .collect();
        let m = weights.len();
        let scale = 1.0 / m as f64;
        let values = kernel
            .gu_class
            .par_chunks(m)
            .map(|classes| {
                let s: Complex64 = classes
                    .iter()
                    .zip(&weights)
                    .map(|(&c, &w)| w * chi[c as usize])
                    .sum();
                s * scale
            })
            .collect();
        BesselFn {
            rep: rep.clone(),
            sign,
            values,
        }
    }

    pub fn rep(&self) -> &CuspidalRep {
        &self.rep
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// The additive character of `E` this Bessel function is equivariant for.
    pub fn psi(&self) -> AddChar {
        AddChar {
            level: Level::E,
            sign: self.sign,
        }
    }

    #[inline]
    pub fn at(&self, pos: usize) -> Complex64 {
        self.values[pos]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, table: &GroupTable, g: &Mat) -> Complex64 {
        self.values[table.position(self.rep.tower(), g)]
    }
}

/// The defining sum evaluated directly, class by class, without any table.
pub fn bessel(rep: &CuspidalRep, g: &Mat, sign: i8) -> Result<Complex64> {
    let t = &**rep.tower();
    let chi = AddChar {
        level: Level::E,
        sign: -sign,
    };
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for u in enumerate_unipotent(t, t.n(), Level::E) {
        let gu = g.at_level(Level::E).mul(&u, t);
        acc += psi_n(t, &u, chi)? * rep.value_on_class(&class_data(t, &gu)?);
        count += 1;
    }
    Ok(acc / count as f64)
}

/// Bessel function of the contragredient for the inverse character, `𝓑_{π̃, ψ_E^{-1}}`.
pub fn bessel_tilde(
    rep: &CuspidalRep,
    table: &GroupTable,
    kernel: &BesselKernel,
    sign: i8,
) -> BesselFn {
    BesselFn::build(&rep.contragredient(), table, kernel, -sign)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteMode {
    /// Every `(u₁, g, u₂)` with `g ∈ G`.
    Exhaustive,
    /// Pseudo-random triples.
    Sampled { count: usize, seed: u64 },
}

/// Maximal deviations found by [`verify_bessel_suite`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BesselReport {
    pub identity_dev: f64,
    pub equivariance_dev: f64,
    pub support_dev: f64,
    pub conjugation_dev: f64,
    pub tilde_dev: f64,
    pub triples_checked: usize,
}

impl BesselReport {
    pub fn max_dev(&self) -> f64 {
        [
            self.identity_dev,
            self.equivariance_dev,
            self.support_dev,
            self.conjugation_dev,
            self.tilde_dev,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_dev() <= tol
    }
}

/// Checks value 1 at the identity, bi-equivariance, support on `P_n(E)`,
/// and `𝓑(g^{-1}) = conj 𝓑(g) = 𝓑_{π̃,ψ_E^{-1}}(g)`.
pub fn verify_bessel_suite(
    b: &BesselFn,
    table: &GroupTable,
    kernel: &BesselKernel,
    mode: SuiteMode,
    budget: u64,
) -> Result<BesselReport> {
    let t = &**b.rep().tower();
    let n = t.n();
    let psi = b.psi();
    let units = kernel.unipotents();
    let psi_u: Vec<Complex64> = units
        .iter()
        .map(|u| psi_n(t, u, psi))
        .collect::<Result<_>>()?;
    let mut report = BesselReport {
        identity_dev: (b.value(table, &Mat::identity(n, Level::E)) - 1.0).norm(),
        ..Default::default()
    };

    let equiv = |g: &Mat, i: usize, j: usize| {
        let lhs = b.value(table, &units[i].mul(g, t).mul(&units[j], t));
        (lhs - psi_u[i] * psi_u[j] * b.value(table, g)).norm()
    };
    match mode {
        SuiteMode::Exhaustive => {
            let (dev, count) = table
                .elements()
                .par_iter()
                .map(|g| {
                    let mut dev = 0.0f64;
                    for i in 0..units.len() {
                        for j in 0..units.len() {
                            dev = dev.max(equiv(g, i, j));
                        }
                    }
                    (dev, units.len() * units.len())
                })
                .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
            report.equivariance_dev = dev;
            report.triples_checked = count;
        }
        SuiteMode::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let g = table.elements()[rng.gen_range(0..table.len())];
                let i = rng.gen_range(0..units.len());
                let j = rng.gen_range(0..units.len());
                report.equivariance_dev = report.equivariance_dev.max(equiv(&g, i, j));
            }
            report.triples_checked = count;
        }
    }

    for p in enumerate_mirabolic(t, n, Level::E, budget)? {
        let v = b.value(table, &p);
        let expected = if p.is_upper_unipotent() {
            psi_n(t, &p, psi)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        report.support_dev = report.support_dev.max((v - expected).norm());
    }

    let tilde = bessel_tilde(b.rep(), table, kernel, b.sign());
    let (conj_dev, tilde_dev) = table
        .elements()
        .par_iter()
        .enumerate()
        .map(|(pos, g)| {
            let inv = g.inverse(t).expect("group element");
            let v = b.at(pos).conj();
            ((b.value(table, &inv) - v).norm(), (tilde.at(pos) - v).norm())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    report.conjugation_dev = conj_dev;
    report.tilde_dev = tilde_dev;
    Ok(report)
}
