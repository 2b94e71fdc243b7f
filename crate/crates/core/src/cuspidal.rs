//! Cuspidal representations of `GL_n(E)` parametrized by regular characters
//! of `K^× = F_{Q^n}^×`, and their characters.
//!
//! For `n ∈ {2, 3}` the cuspidal character is supported on elements whose
//! semisimple part is central or regular elliptic:
//!
//! * `z·u`, `u` unipotent with `k` Jordan blocks: `(-1)^{n-1} θ(z) ∏_{i=1}^{k-1} (1 - Q^i)`
//! * regular elliptic with eigenvalue `α ∈ K`: `(-1)^{n-1} Σ_i θ(α^{Q^i})`
//! * everything else: `0`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Level, MultChar, Tower};
use crate::matgroup::{
    class_data, enumerate_gl, enumerate_mirabolic, enumerate_radical, enumerate_unipotent,
    ClassKind, GroupTable, Mat,
};

/// Integrality tolerance for character averages.
pub const INTEGRAL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CuspidalRep {
    tower: Arc<Tower>,
    theta: MultChar,
}

impl PartialEq for CuspidalRep {
    fn eq(&self, other: &Self) -> bool {
        self.theta == other.theta && Arc::ptr_eq(&self.tower, &other.tower)
    }
}

impl CuspidalRep {
    /// The cuspidal representation attached to the Frobenius orbit of `θ_k`.
    pub fn new(tower: Arc<Tower>, k: i64) -> Result<Self> {
        let theta = tower.mult_char(k);
        if !tower.is_regular(theta) {
            return Err(Error::NonRegular(theta.exponent()));
        }
        let canonical = *tower
            .frobenius_orbit(theta.exponent())
            .iter()
            .min()
            .expect("orbit is nonempty");
        let theta = tower.mult_char(canonical as i64);
        Ok(CuspidalRep { tower, theta })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn theta(&self) -> MultChar {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.tower.n()
    }

    /// Sorted exponents of the Frobenius orbit of `θ`.
    pub fn theta_orbit(&self) -> Vec<u64> {
        let mut orbit = self.tower.frobenius_orbit(self.theta.exponent());
        orbit.sort_unstable();
        orbit
    }

    /// `∏_{i=1}^{n-1} (Q^i - 1)`.
    pub fn dim(&self) -> u64 {
        let big_q = self.tower.big_q();
        (1..self.n() as u32).map(|i| big_q.pow(i) - 1).product()
    }

    /// `θ ↦ θ^{-1}`.
    pub fn contragredient(&self) -> CuspidalRep {
        CuspidalRep::new(self.tower.clone(), -(self.theta.exponent() as i64))
            .expect("inverse of a regular character is regular")
    }

    pub fn is_self_dual(&self) -> bool {
        self.contragredient().theta == self.theta
    }

    pub fn value_on_class(&self, kind: &ClassKind) -> Complex64 {
        let t = &*self.tower;
        let n = self.n();
        let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
        match *kind {
            ClassKind::CentralTimesUnipotent { z, blocks } => {
                let big_q = t.big_q() as f64;
                let factor: f64 = (1..blocks as i32).map(|i| 1.0 - big_q.powi(i)).product();
                t.eval_theta(self.theta, z).expect("z is nonzero") * sign * factor
            }
            ClassKind::RegularElliptic { alpha } => {
                let s: Complex64 = (0..n as u32)
                    .map(|i| {
                        let conj = t.frob(alpha, 2 * i);
                        t.eval_theta(self.theta, conj).expect("alpha is nonzero")
                    })
                    .sum();
                s * sign
            }
            ClassKind::Other => Complex64::new(0.0, 0.0),
        }
    }

    /// `χ_π(g)` for `g ∈ GL_n(E)`.
    pub fn character(&self, g: &Mat) -> Result<Complex64> {
        Ok(self.value_on_class(&class_data(&self.tower, g)?))
    }

    /// Character values indexed by the class ids of `table`.
    pub fn class_values(&self, table: &GroupTable) -> Vec<Complex64> {
        table.classes().iter().map(|c| self.value_on_class(c)).collect()
    }
}

/// One representative per Galois orbit of regular characters, ordered by exponent.
pub fn list_cuspidal(tower: &Arc<Tower>) -> Vec<CuspidalRep> {
    (0..tower.order() as u64)
        .filter(|&k| {
            let orbit = tower.frobenius_orbit(k);
            orbit.len() == tower.n() && orbit.iter().all(|&j| j >= k)
        })
        .map(|k| CuspidalRep {
            tower: tower.clone(),
            theta: tower.mult_char(k as i64),
        })
        .collect()
}

/// Subgroups over which characters are averaged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subgroup {
    /// `H = GL_n(F)`.
    BaseGroup,
    /// `P_n(F)`.
    MirabolicF,
    /// `P_n(E)`.
    MirabolicE,
    /// `N_n(E)`.
    UnipotentE,
    /// Unipotent radical over `E` of the standard parabolic with these block sizes.
    Radical(Vec<usize>),
}

impl Subgroup {
    pub fn elements(&self, t: &Tower, budget: u64) -> Result<Vec<Mat>> {
        let n = t.n();
        let lift = |m: Mat| m.at_level(Level::E);
        Ok(match self {
            Subgroup::BaseGroup => enumerate_gl(t, n, Level::F, budget)?.map(lift).collect(),
            Subgroup::MirabolicF => enumerate_mirabolic(t, n, Level::F, budget)?
                .map(lift)
                .collect(),
            Subgroup::MirabolicE => enumerate_mirabolic(t, n, Level::E, budget)?.collect(),
            Subgroup::UnipotentE => enumerate_unipotent(t, n, Level::E).collect(),
            Subgroup::Radical(c) => enumerate_radical(t, Level::E, c).collect(),
        })
    }
}

/// `(1/|S|) Σ_{s ∈ S} χ(s)`: the dimension of the `S`-fixed vectors.
pub fn avg_over(rep: &CuspidalRep, table: &GroupTable, elements: &[Mat]) -> Complex64 {
    let t = &**rep.tower();
    let values = rep.class_values(table);
    let s: Complex64 = elements
        .iter()
        .map(|g| values[table.class_of(t, g) as usize])
        .sum();
    s / elements.len() as f64
}

/// `(1/|S|) Σ_{s ∈ S} |χ(s)|²`.
pub fn norm_over(rep: &CuspidalRep, table: &GroupTable, elements: &[Mat]) -> f64 {
    let t = &**rep.tower();
    let values = rep.class_values(table);
    let s: f64 = elements
        .iter()
        .map(|g| values[table.class_of(t, g) as usize].norm_sqr())
        .sum();
    s / elements.len() as f64
}

/// `⟨χ_a, χ_b⟩_G = (1/|G|) Σ_g χ_a(g) conj(χ_b(g))`, summed class by class.
pub fn inner_product(a: &CuspidalRep, b: &CuspidalRep, table: &GroupTable) -> Complex64 {
    let va = a.class_values(table);
    let vb = b.class_values(table);
    let mut counts = vec![0usize; table.classes().len()];
    for pos in 0..table.len() {
        counts[table.class_at(pos) as usize] += 1;
    }
    let s: Complex64 = counts
        .iter()
        .enumerate()
        .map(|(c, &m)| va[c] * vb[c].conj() * m as f64)
        .sum();
    s / table.len() as f64
}

/// Rounds a value that must be a nonnegative integer, failing with diagnostics otherwise.
pub fn as_count(value: Complex64, what: &str) -> Result<u64> {
    let r = value.re.round();
    if (value - r).norm() >= INTEGRAL_TOL || r < 0.0 {
        return Err(Error::Verification(format!(
            "{what}: {value} is not a nonnegative integer"
        )));
    }
    Ok(r as u64)
}
