//! Divergence-free truncated Fourier fields on a periodic box.
//!
//! A field is stored as
//!
//! ```text
//! u(x) = Σ_k û_k e^{i k̃·x},    k̃ = 2π (k₁/L₁, k₂/L₂, k₃/L₃)
//! ```
//!
//! with only one representative of every `±k` pair kept (see
//! [`WaveVector::is_canonical`]); the partner coefficient is `û_{−k} = conj(û_k)`.
//! Norms carry the explicit volume factor, `|u|² = L₁L₂L₃ Σ_k |û_k|²` where the
//! sum runs over all `k` (both members of every pair).
//!
//! The Stokes operator is diagonal, `A ↦ λ_k = |k̃|²`, and the Galerkin
//! projection `P_n` keeps the modes with `λ_k ≤ Λ` for an eigenvalue cutoff
//! `Λ`, so eigenvalue shells are never split.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex 3-vector of Fourier coefficients.
pub type Vec3c = [Complex64; 3];

pub(crate) const ZERO3: Vec3c = [Complex64::new(0.0, 0.0); 3];

/// Relative tolerance used when checking incompressibility of stored modes.
pub const DIVERGENCE_TOL: f64 = 1e-12;

pub(crate) fn dot_rc(k: &[f64; 3], v: &Vec3c) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

pub(crate) fn norm_sqr3(v: &Vec3c) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn conj3(v: &Vec3c) -> Vec3c {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

/// Removes the component of `v` along `k`.
pub(crate) fn project_transverse(k: &[f64; 3], v: &Vec3c) -> Vec3c {
    let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if kk == 0.0 {
        return ZERO3;
    }
    let s = dot_rc(k, v) / kk;
    [v[0] - s * k[0], v[1] - s * k[1], v[2] - s * k[2]]
}

/// Periodic box `[0, L₁) × [0, L₂) × [0, L₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub periods: [f64; 3],
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            periods: [2.0 * PI; 3],
        }
    }
}

impl DomainSpec {
    pub fn new(periods: [f64; 3]) -> Result<Self> {
        if periods.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::input("domain periods must be positive"));
        }
        Ok(Self { periods })
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    /// Physical wavenumber `k̃`.
    pub fn wavenumber(&self, k: WaveVector) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = 2.0 * PI * k.0[i] as f64 / self.periods[i];
        }
        out
    }

    /// Stokes eigenvalue `λ_k = |k̃|²`.
    pub fn eigenvalue(&self, k: WaveVector) -> f64 {
        self.wavenumber(k).iter().map(|x| x * x).sum()
    }

    pub fn wave_index(&self, k: WaveVector) -> WaveIndex {
        WaveIndex {
            k,
            lambda: self.eigenvalue(k),
        }
    }

    /// Largest `|k_i|` per axis that can satisfy `λ_k ≤ cutoff`.
    pub fn max_index(&self, cutoff: f64) -> [i32; 3] {
        let r = cutoff.max(0.0).sqrt();
        let mut out = [0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (r * self.periods[i] / (2.0 * PI) + 1e-9).floor() as i32;
        }
        out
    }

    /// Canonical wave vectors with `0 < λ_k ≤ cutoff`, in key order.
    pub fn canonical_modes(&self, cutoff: f64) -> Vec<WaveVector> {
        let m = self.max_index(cutoff);
        let mut out = Vec::new();
        for a in -m[0]..=m[0] {
            for b in -m[1]..=m[1] {
                for c in -m[2]..=m[2] {
                    let k = WaveVector([a, b, c]);
                    if k.is_canonical() && self.eigenvalue(k) <= cutoff {
                        out.push(k);
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub(crate) fn ensure_same(&self, other: &DomainSpec) -> Result<()> {
        if self.periods == other.periods {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.periods, other.periods
            )))
        }
    }
}

/// Integer wave vector `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub const fn new(k1: i32, k2: i32, k3: i32) -> Self {
        Self([k1, k2, k3])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// The stored member of a `±k` pair: first nonzero component positive.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        }
    }

    pub fn max_abs(&self) -> [i32; 3] {
        [self.0[0].abs(), self.0[1].abs(), self.0[2].abs()]
    }
}

/// A wave vector together with its Stokes eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveIndex {
    pub k: WaveVector,
    pub lambda: f64,
}

/// Unprojected per-mode data with both members of every `±k` pair present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawField {
    pub coeffs: BTreeMap<WaveVector, Vec3c>,
}

impl RawField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `v` at `k` and `conj(v)` at `−k`.
    pub fn insert_pair(&mut self, k: WaveVector, v: Vec3c) {
        self.coeffs.insert(k, v);
        self.coeffs.insert(k.neg(), conj3(&v));
    }
}

/// Leray projection of raw mode data onto divergence-free fields.
///
/// The `k = 0` mode is dropped. The cutoff of the result is the largest
/// eigenvalue present in `raw` (zero for empty input).
pub fn leray_project(raw: &RawField, domain: &DomainSpec) -> Result<SpectralVelocityField> {
    let mut cutoff: f64 = 0.0;
    let mut coeffs = BTreeMap::new();
    for (&k, v) in &raw.coeffs {
        if k.is_zero() {
            continue;
        }
        let partner = raw.coeffs.get(&k.neg()).copied().unwrap_or(ZERO3);
        let scale = norm_sqr3(v).sqrt() + norm_sqr3(&partner).sqrt();
        let mismatch: f64 = (0..3).map(|i| (v[i] - partner[i].conj()).norm_sqr()).sum();
        if mismatch.sqrt() > 1e-12 * scale {
            return Err(Error::input(format!(
                "reality symmetry violated at k = {:?}",
                k.0
            )));
        }
        cutoff = cutoff.max(domain.eigenvalue(k));
        if k.is_canonical() {
            let p = project_transverse(&domain.wavenumber(k), v);
            coeffs.insert(k, p);
        }
    }
    Ok(SpectralVelocityField {
        domain: *domain,
        cutoff,
        coeffs,
    })
}

/// Divergence-free velocity field truncated at `λ_k ≤ cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVelocityField {
    domain: DomainSpec,
    cutoff: f64,
    coeffs: BTreeMap<WaveVector, Vec3c>,
}

impl SpectralVelocityField {
    pub fn zero(domain: DomainSpec, cutoff: f64) -> Self {
        Self {
            domain,
            cutoff,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a field from canonical-or-not modes, projecting each one.
    ///
    /// Non-canonical keys are folded onto their partner by conjugation.
    /// Fails when a mode lies above `cutoff` or at `k = 0`.
    pub fn from_modes<I>(domain: DomainSpec, cutoff: f64, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WaveVector, Vec3c)>,
    {
        let mut coeffs = BTreeMap::new();
        for (k, v) in modes {
            if k.is_zero() {
                return Err(Error::input("the k = 0 mode is not allowed"));
            }
            if domain.eigenvalue(k) > cutoff * (1.0 + 1e-12) {
                return Err(Error::input(format!(
                    "mode {:?} lies above the cutoff {cutoff}",
                    k.0
                )));
            }
            let (key, val) = if k.is_canonical() {
                (k, v)
            } else {
                (k.neg(), conj3(&v))
            };
            let p = project_transverse(&domain.wavenumber(key), &val);
            coeffs.insert(key, p);
        }
        Ok(Self {
            domain,
            cutoff,
            coeffs,
        })
    }

    /// `û_{±k} = polarization` (conjugated at `−k`), Leray projected.
    pub fn single_mode(domain: DomainSpec, k: WaveVector, polarization: Vec3c) -> Result<Self> {
        let cutoff = domain.eigenvalue(k);
        Self::from_modes(domain, cutoff, [(k, polarization)])
    }

    /// `(cos ax sin by, −(a/b) sin ax cos by, 0)` with `a = 2π/L₁`, `b = 2π/L₂`,
    /// scaled by `amplitude`.
    pub fn taylor_green(domain: DomainSpec, amplitude: f64) -> Self {
        let ratio = domain.periods[1] / domain.periods[0];
        let mut modes = Vec::new();
        for s1 in [-1i32, 1] {
            for s2 in [-1i32, 1] {
                let k = WaveVector::new(s1, s2, 0);
                if !k.is_canonical() {
                    continue;
                }
                let ux = Complex64::new(0.0, -(s2 as f64) / 4.0) * amplitude;
                let uy = Complex64::new(0.0, ratio * s1 as f64 / 4.0) * amplitude;
                modes.push((k, [ux, uy, Complex64::new(0.0, 0.0)]));
            }
        }
        let cutoff = domain.eigenvalue(WaveVector::new(1, 1, 0));
        Self::from_modes(domain, cutoff, modes).expect("Taylor-Green modes lie on the cutoff")
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Stored canonical modes.
    pub fn modes(&self) -> impl Iterator<Item = (&WaveVector, &Vec3c)> {
        self.coeffs.iter()
    }

    /// All modes, both members of every pair.
    pub fn modes_full(&self) -> impl Iterator<Item = (WaveVector, Vec3c)> + '_ {
        self.coeffs
            .iter()
            .flat_map(|(k, v)| [(*k, *v), (k.neg(), conj3(v))])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, k: WaveVector) -> Vec3c {
        if k.is_canonical() {
            self.coeffs.get(&k).copied().unwrap_or(ZERO3)
        } else {
            self.coeffs.get(&k.neg()).map(conj3).unwrap_or(ZERO3)
        }
    }

    /// Largest `|k_i|` over the stored support, per axis.
    pub fn support_extent(&self) -> [i32; 3] {
        let mut m = [0; 3];
        for k in self.coeffs.keys() {
            for (mi, ki) in m.iter_mut().zip(k.max_abs()) {
                *mi = (*mi).max(ki);
            }
        }
        m
    }

    /// Largest eigenvalue over the stored support (zero when empty).
    pub fn max_eigenvalue(&self) -> f64 {
        self.coeffs
            .keys()
            .map(|&k| self.domain.eigenvalue(k))
            .fold(0.0, f64::max)
    }

    /// Same coefficients with a different cutoff attribute.
    pub fn with_cutoff(mut self, cutoff: f64) -> Result<Self> {
        if self.max_eigenvalue() > cutoff * (1.0 + 1e-12) {
            return Err(Error::input("support exceeds the requested cutoff"));
        }
        self.cutoff = cutoff;
        Ok(self)
    }

    fn map_modes(&self, f: impl Fn(WaveVector, &Vec3c) -> Vec3c) -> Self {
        Self {
            domain: self.domain,
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, f(*k, v))).collect(),
        }
    }

    /// Multiplies every mode by `λ_k^power`.
    pub fn apply_stokes_power(&self, power: f64) -> Self {
        self.map_modes(|k, v| {
            let s = self.domain.eigenvalue(k).powf(power);
            [v[0] * s, v[1] * s, v[2] * s]
        })
    }

    /// `Au`.
    pub fn stokes_apply(&self) -> Self {
        self.map_modes(|k, v| {
            let s = self.domain.eigenvalue(k);
            [v[0] * s, v[1] * s, v[2] * s]
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, v| [v[0] * s, v[1] * s, v[2] * s])
    }

    /// `self + a·other`; the cutoff becomes the larger of the two.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.domain.ensure_same(&other.domain)?;
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        for (k, v) in &other.coeffs {
            let e = out.coeffs.entry(*k).or_insert(ZERO3);
            for i in 0..3 {
                e[i] += v[i] * a;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Applies a per-mode scalar factor that depends on the eigenvalue.
    pub fn scale_by_eigenvalue(&self, f: impl Fn(f64) -> f64) -> Self {
        self.map_modes(|k, v| {
            let s = f(self.domain.eigenvalue(k));
            [v[0] * s, v[1] * s, v[2] * s]
        })
    }

    /// `P_n u` with `P_n` the projection on `λ_k ≤ cutoff`.
    ///
    /// The result carries `cutoff` as its truncation attribute.
    pub fn galerkin_project(&self, cutoff: f64) -> Self {
        Self {
            domain: self.domain,
            cutoff,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| self.domain.eigenvalue(**k) <= cutoff)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// `Q_n u = u − P_n u`.
    pub fn tail_project(&self, cutoff: f64) -> Self {
        Self {
            domain: self.domain,
            cutoff: self.cutoff,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| self.domain.eigenvalue(**k) > cutoff)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// `P_n u` where `n` counts real eigenfunctions; rounded up to a full shell.
    pub fn galerkin_project_modes(&self, n_modes: usize) -> Self {
        let search = self.cutoff.max(self.max_eigenvalue());
        let cutoff = shell_cutoff_for_modes(&self.domain, n_modes, search);
        self.galerkin_project(cutoff)
    }

    /// `(u, v)` in `L²(Q)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.domain.ensure_same(&other.domain)?;
        let (small, large) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let s: f64 = small
            .coeffs
            .iter()
            .filter_map(|(k, a)| large.coeffs.get(k).map(|b| (a, b)))
            .fold(0.0, |acc, (a, b)| {
                acc + (0..3).map(|i| (a[i] * b[i].conj()).re).sum::<f64>()
            });
        Ok(2.0 * self.domain.volume() * s)
    }

    /// `‖u‖_m = |A^{m/2} u|`.
    pub fn sobolev_norm(&self, m: f64) -> f64 {
        let s: f64 = self.coeffs.iter().fold(0.0, |acc, (k, v)| {
            let lam = self.domain.eigenvalue(*k);
            let w = if m == 0.0 { 1.0 } else { lam.powf(m) };
            acc + w * norm_sqr3(v)
        });
        (2.0 * self.domain.volume() * s).sqrt()
    }

    /// Largest relative divergence `|k̃·û_k| / |û_k|` over stored modes.
    pub fn divergence_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(_, v)| norm_sqr3(v) > 0.0)
            .map(|(k, v)| dot_rc(&self.domain.wavenumber(*k), v).norm() / norm_sqr3(v).sqrt())
            .fold(0.0, f64::max)
    }

    /// Checks reality, incompressibility, truncation and zero mean.
    pub fn check_invariants(&self) -> Result<()> {
        for (k, v) in &self.coeffs {
            if !k.is_canonical() {
                return Err(Error::input(format!("non-canonical key {:?}", k.0)));
            }
            if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::input(format!("non-finite coefficient at {:?}", k.0)));
            }
            if self.domain.eigenvalue(*k) > self.cutoff * (1.0 + 1e-12) {
                return Err(Error::input(format!("mode {:?} above cutoff", k.0)));
            }
            let d = dot_rc(&self.domain.wavenumber(*k), v).norm();
            if d > DIVERGENCE_TOL * norm_sqr3(v).sqrt() {
                return Err(Error::input(format!(
                    "mode {:?} is not divergence-free",
                    k.0
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(
        domain: DomainSpec,
        cutoff: f64,
        coeffs: BTreeMap<WaveVector, Vec3c>,
    ) -> Self {
        Self {
            domain,
            cutoff,
            coeffs,
        }
    }
}

/// Number of real eigenfunctions with `λ ≤ cutoff`: four per `±k` pair
/// (two transverse polarizations, cosine and sine).
pub fn real_mode_count(domain: &DomainSpec, cutoff: f64) -> usize {
    4 * domain.canonical_modes(cutoff).len()
}

/// Smallest eigenvalue cutoff holding at least `n_modes` real eigenfunctions,
/// searching eigenvalues up to `search_max`. Returns `search_max` when the
/// request exceeds what that range holds.
pub fn shell_cutoff_for_modes(domain: &DomainSpec, n_modes: usize, search_max: f64) -> f64 {
    if n_modes == 0 {
        return 0.0;
    }
    let mut lams: Vec<f64> = domain
        .canonical_modes(search_max)
        .into_iter()
        .map(|k| domain.eigenvalue(k))
        .collect();
    lams.sort_by(f64::total_cmp);
    let pairs = n_modes.div_ceil(4);
    match lams.get(pairs - 1) {
        Some(&lam) => lam,
        None => search_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r3(a: f64, b: f64, d: f64) -> Vec3c {
        [c(a, 0.0), c(b, 0.0), c(d, 0.0)]
    }

    #[test]
    fn leray_examples() {
        let d = DomainSpec::default();
        let mut raw = RawField::new();
        raw.insert_pair(WaveVector::new(1, 0, 0), r3(1.0, 0.0, 0.0));
        let u = leray_project(&raw, &d).unwrap();
        assert_eq!(norm_sqr3(&u.coefficient(WaveVector::new(1, 0, 0))), 0.0);

        let mut raw = RawField::new();
        raw.insert_pair(WaveVector::new(1, 0, 0), r3(0.0, 1.0, 0.0));
        let u = leray_project(&raw, &d).unwrap();
        assert_eq!(u.coefficient(WaveVector::new(1, 0, 0)), r3(0.0, 1.0, 0.0));

        let mut raw = RawField::new();
        raw.insert_pair(WaveVector::new(1, 1, 0), r3(1.0, 0.0, 0.0));
        let u = leray_project(&raw, &d).unwrap();
        let got = u.coefficient(WaveVector::new(1, 1, 0));
        let want = r3(0.5, -0.5, 0.0);
        for i in 0..3 {
            assert!((got[i] - want[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn leray_rejects_reality_violation_and_drops_mean() {
        let d = DomainSpec::default();
        let mut raw = RawField::new();
        raw.coeffs
            .insert(WaveVector::new(1, 0, 0), r3(0.0, 1.0, 0.0));
        assert!(matches!(leray_project(&raw, &d), Err(Error::Input(_))));

        let mut raw = RawField::new();
        raw.coeffs
            .insert(WaveVector::new(0, 0, 0), r3(1.0, 2.0, 3.0));
        raw.insert_pair(WaveVector::new(0, 0, 2), r3(1.0, 0.0, 0.0));
        let u = leray_project(&raw, &d).unwrap();
        assert_eq!(u.len(), 1);
        u.check_invariants().unwrap();
    }

    #[test]
    fn leray_is_idempotent() {
        let d = DomainSpec::new([1.0, 2.0, 3.0]).unwrap();
        let mut raw = RawField::new();
        raw.insert_pair(
            WaveVector::new(1, -2, 3),
            [c(0.3, 1.0), c(-2.0, 0.5), c(0.7, 0.1)],
        );
        raw.insert_pair(
            WaveVector::new(0, 1, 1),
            [c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)],
        );
        let once = leray_project(&raw, &d).unwrap();
        let mut again = RawField::new();
        for (k, v) in once.modes() {
            again.insert_pair(*k, *v);
        }
        let twice = leray_project(&again, &d).unwrap();
        for (k, v) in once.modes() {
            let w = twice.coefficient(*k);
            for i in 0..3 {
                assert!((v[i] - w[i]).norm() <= 1e-15 * norm_sqr3(v).sqrt());
            }
        }
    }

    #[test]
    fn stokes_examples() {
        let d = DomainSpec::default();
        let u = SpectralVelocityField::single_mode(d, WaveVector::new(1, 0, 0), r3(0.0, 1.0, 0.0))
            .unwrap();
        assert_eq!(u.stokes_apply(), u);
        let v = SpectralVelocityField::single_mode(d, WaveVector::new(1, 2, 0), r3(0.0, 0.0, 1.0))
            .unwrap();
        let av = v.stokes_apply();
        assert!((av.coefficient(WaveVector::new(1, 2, 0))[2].re - 5.0).abs() < 1e-14);
        let z = SpectralVelocityField::zero(d, 3.0);
        assert!(z.stokes_apply().is_empty());
    }

    #[test]
    fn sobolev_examples() {
        let d = DomainSpec::default();
        assert_eq!(SpectralVelocityField::zero(d, 1.0).sobolev_norm(1.5), 0.0);
        let u = SpectralVelocityField::single_mode(d, WaveVector::new(1, 0, 0), r3(0.0, 1.0, 0.0))
            .unwrap();
        let expect = (2.0 * (2.0 * PI).powi(3)).sqrt();
        assert!((expect - 22.2733).abs() < 1e-4);
        for m in [0.0, 1.0, 2.0] {
            assert!((u.sobolev_norm(m) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn projection_examples() {
        let d = DomainSpec::default();
        let u = SpectralVelocityField::single_mode(d, WaveVector::new(1, 1, 0), r3(0.0, 0.0, 1.0))
            .unwrap();
        assert!(u.galerkin_project(1.0).is_empty());
        assert_eq!(
            u.tail_project(1.0).coefficient(WaveVector::new(1, 1, 0)),
            r3(0.0, 0.0, 1.0)
        );
        let total = real_mode_count(&d, u.cutoff());
        assert_eq!(u.galerkin_project_modes(total + 10).len(), 1);
        assert_eq!(u.galerkin_project_modes(1).len(), 0);
    }

    #[test]
    fn mode_counts_respect_shells() {
        let d = DomainSpec::default();
        // Shell λ = 1 holds the three axis pairs.
        assert_eq!(real_mode_count(&d, 1.0), 12);
        assert_eq!(shell_cutoff_for_modes(&d, 1, 10.0), 1.0);
        assert_eq!(shell_cutoff_for_modes(&d, 12, 10.0), 1.0);
        assert_eq!(shell_cutoff_for_modes(&d, 13, 10.0), 2.0);
    }

    #[test]
    fn taylor_green_is_divergence_free() {
        let u = SpectralVelocityField::taylor_green(DomainSpec::default(), 1.0);
        u.check_invariants().unwrap();
        assert_eq!(u.len(), 2);
        // |u|² = ∫ cos²x sin²y + sin²x cos²y = 2 · (2π)³ / 4
        let e = u.sobolev_norm(0.0).powi(2);
        assert!((e - (2.0 * PI).powi(3) / 2.0).abs() < 1e-11);
    }

    #[test]
    fn from_modes_rejects_mean_and_out_of_cutoff() {
        let d = DomainSpec::default();
        assert!(
            SpectralVelocityField::from_modes(d, 1.0, [(WaveVector::new(0, 0, 0), ZERO3)]).is_err()
        );
        assert!(
            SpectralVelocityField::from_modes(d, 1.0, [(WaveVector::new(1, 1, 0), ZERO3)]).is_err()
        );
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let a = SpectralVelocityField::zero(DomainSpec::default(), 1.0);
        let b = SpectralVelocityField::zero(DomainSpec::new([1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(a.add(&b), Err(Error::DomainMismatch(_))));
        assert!(a.inner(&b).is_err());
    }
}
