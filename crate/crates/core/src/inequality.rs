//! Empirical checks of the trilinear-form inequalities and the constant table.
//!
//! ```text
//! |(B(u,v), Aw)|     ≤ k  |Du| |Dv|^{1/2} |Av|^{1/2} |Aw|
//! |(B(w,u), A²w)|    ≤ c  ‖u‖₃ ‖w‖₂²
//! |(B(u,w), A²w)|    ≤ c′ ‖u‖₃ ‖w‖₂²
//! ‖B(u,u)‖₂          ≤ c  ‖u‖₂ ‖u‖₃
//! ```
//!
//! `k = 9 c_s^{3/2}` with the Sobolev constant `c_s = 4√2`, i.e.
//! `k = 72·2^{3/4}`. The constants `c` and `c′` have no known numerical value;
//! they must be configured, and [`estimate_constants`] only gives empirical
//! floors for them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, SpectralVelocityField};
use crate::random::{random_field, substream, RandomFieldSpec};
use crate::transform::{nonlinear_full, trilinear_form};

/// Default Sobolev `L⁶` embedding constant, `4√2`.
pub fn default_sobolev_constant() -> f64 {
    4.0 * std::f64::consts::SQRT_2
}

/// `9 c_s^{3/2}`.
pub fn trilinear_constant(c_s: f64) -> f64 {
    9.0 * c_s.powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantTable {
    pub c_s: f64,
    #[serde(rename = "k")]
    pub k_tri: f64,
    #[serde(rename = "c", default)]
    pub c_b: Option<f64>,
    #[serde(rename = "c_prime", default)]
    pub c_b_prime: Option<f64>,
}

impl Default for ConstantTable {
    fn default() -> Self {
        Self::from_sobolev(default_sobolev_constant())
    }
}

impl ConstantTable {
    /// Table with `k` derived from `c_s` and `c`, `c′` unset.
    pub fn from_sobolev(c_s: f64) -> Self {
        Self {
            c_s,
            k_tri: trilinear_constant(c_s),
            c_b: None,
            c_b_prime: None,
        }
    }

    pub fn with_second_order(mut self, c: f64, c_prime: f64) -> Self {
        self.c_b = Some(c);
        self.c_b_prime = Some(c_prime);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.c_s) || !ok(self.k_tri) {
            return Err(Error::Config("c_s and k must be positive".into()));
        }
        if self.c_b.is_some_and(|c| !ok(c)) || self.c_b_prime.is_some_and(|c| !ok(c)) {
            return Err(Error::Config("c and c_prime must be positive".into()));
        }
        Ok(())
    }

    /// `(c, c′)`, or a configuration error when either is unset.
    pub fn second_order(&self) -> Result<(f64, f64)> {
        match (self.c_b, self.c_b_prime) {
            (Some(c), Some(cp)) => Ok((c, cp)),
            _ => Err(Error::Config(
                "second-order checks need the constants c and c_prime".into(),
            )),
        }
    }
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::input("zero denominator"));
    }
    Ok(num.abs() / den)
}

/// `|(B(u,v),Aw)| / (|Du| |Dv|^{1/2} |Av|^{1/2} |Aw|)`.
pub fn ratio_triform1(
    u: &SpectralVelocityField,
    v: &SpectralVelocityField,
    w: &SpectralVelocityField,
) -> Result<f64> {
    let den = u.sobolev_norm(1.0)
        * (v.sobolev_norm(1.0) * v.sobolev_norm(2.0)).sqrt()
        * w.sobolev_norm(2.0);
    if den <= 0.0 {
        return Err(Error::input("zero denominator"));
    }
    let aw = w.stokes_apply();
    ratio(trilinear_form(u, v, &aw)?, den)
}

/// Argument order inside the second-order trilinear ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// `(B(w,u), A²w)`, bounded by `c`.
    Wu,
    /// `(B(u,w), A²w)`, bounded by `c′`.
    Uw,
}

/// `|(B(·,·),A²w)| / (‖u‖₃ ‖w‖₂²)`.
pub fn ratio_triform2(
    u: &SpectralVelocityField,
    w: &SpectralVelocityField,
    which: Order,
) -> Result<f64> {
    let den = u.sobolev_norm(3.0) * w.sobolev_norm(2.0).powi(2);
    if den <= 0.0 {
        return Err(Error::input("zero denominator"));
    }
    let a2w = w.apply_stokes_power(2.0);
    let num = match which {
        Order::Wu => trilinear_form(w, u, &a2w)?,
        Order::Uw => trilinear_form(u, w, &a2w)?,
    };
    ratio(num, den)
}

/// `‖B(u,u)‖₂ / (‖u‖₂ ‖u‖₃)`.
pub fn ratio_b_v2(u: &SpectralVelocityField) -> Result<f64> {
    let den = u.sobolev_norm(2.0) * u.sobolev_norm(3.0);
    if den <= 0.0 {
        return Err(Error::input("zero denominator"));
    }
    ratio(nonlinear_full(u).sobolev_norm(2.0), den)
}

/// Maxima of every ratio over a seeded sample of random fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub samples: usize,
    pub seed: u64,
    pub max_wavenumber: i32,
    pub decay: f64,
    pub max_triform1: Option<f64>,
    pub max_triform2_wu: Option<f64>,
    pub max_triform2_uw: Option<f64>,
    pub max_b_v2: Option<f64>,
    /// Largest `|(B(u,v),v)| / (|Du| |v|²)` seen; zero up to rounding.
    pub max_skew_defect: Option<f64>,
    /// Configured constants that are smaller than an observed ratio.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct SampleRatios {
    tri1: f64,
    wu: f64,
    uw: f64,
    bv2: f64,
    skew: f64,
}

fn sample(
    domain: DomainSpec,
    spec: &RandomFieldSpec,
    seed: u64,
    index: u64,
) -> Result<SampleRatios> {
    let mut rng = substream(seed, index);
    let u = random_field(domain, spec, &mut rng);
    let v = random_field(domain, spec, &mut rng);
    let w = random_field(domain, spec, &mut rng);
    let skew =
        trilinear_form(&u, &v, &v)?.abs() / (u.sobolev_norm(1.0) * v.sobolev_norm(0.0).powi(2));
    Ok(SampleRatios {
        tri1: ratio_triform1(&u, &v, &w)?,
        wu: ratio_triform2(&u, &w, Order::Wu)?,
        uw: ratio_triform2(&u, &w, Order::Uw)?,
        bv2: ratio_b_v2(&u)?,
        skew,
    })
}

/// Samples `sample_count` independent triples `(u, v, w)` of random fields;
/// sample `i` uses substream `i` of `seed`.
pub fn estimate_constants(
    domain: DomainSpec,
    sample_count: usize,
    spec: &RandomFieldSpec,
    seed: u64,
    constants: &ConstantTable,
) -> Result<ConstantEstimate> {
    let ratios: Vec<SampleRatios> = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| sample(domain, spec, seed, i))
        .collect::<Result<_>>()?;
    let max_of = |f: fn(&SampleRatios) -> f64| ratios.iter().map(f).reduce(f64::max);
    let mut est = ConstantEstimate {
        samples: sample_count,
        seed,
        max_wavenumber: spec.max_wavenumber,
        decay: spec.decay,
        max_triform1: max_of(|r| r.tri1),
        max_triform2_wu: max_of(|r| r.wu),
        max_triform2_uw: max_of(|r| r.uw),
        max_b_v2: max_of(|r| r.bv2),
        max_skew_defect: max_of(|r| r.skew),
        violations: Vec::new(),
    };
    let mut flag = |name: &str, configured: Option<f64>, observed: Option<f64>| {
        if let (Some(c), Some(o)) = (configured, observed) {
            if c < o {
                est.violations
                    .push(format!("{name} = {c} is below the observed ratio {o}"));
            }
        }
    };
    flag("k", Some(constants.k_tri), est.max_triform1);
    flag("c", constants.c_b, est.max_triform2_wu);
    flag("c", constants.c_b, est.max_b_v2);
    flag("c_prime", constants.c_b_prime, est.max_triform2_uw);
    Ok(est)
}
