//! Channel flow in a mixed Fourier–sine basis.
//!
//! The domain is `0 < x < Lx`, `0 < y < 1`, `0 < z < Lz`, periodic in `x` and
//! `z`, with basis functions
//!
//! ```text
//! w_k = e^{2πi(k₁x/Lx + k₃z/Lz)} sin(πk₂y),   k₂ ≥ 0
//! ```
//!
//! and `u_n = Σ α_k w_k` with `α_{(−k₁,k₂,−k₃)} = conj(α_k)`. Two evaluations of
//! every quantity are offered side by side:
//!
//! * an **oracle**: fields and their derivatives evaluated on a tensor grid
//!   (uniform in `x`, `z`; Gauss–Legendre in `y`) and integrated or projected
//!   back by quadrature;
//! * a **verbatim** evaluation of the closed-form expansions (the index sum
//!   `S(k₂)`, the hatted wavevector `k̂`, the triple sum for `B`), reported
//!   next to the oracle without reconciliation.
//!
//! Within the truncated span the sine and cosine families in `y` are linearly
//! independent, so a coefficient set is divergence-free exactly when every
//! mode has `α₂ = 0` and `k₁α₁/Lx + k₃α₃/Lz = 0`. The oracle Leray projection
//! is the orthogonal projection onto that subspace, applied mode by mode.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Vec3c;
use crate::trajectory::NormSample;

pub type ChannelMode = [i32; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ZERO3: Vec3c = [ZERO; 3];
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Grid points per resolved wavenumber in each direction.
pub const OVERSAMPLE: usize = 8;

/// Largest truncation accepted by the verbatim triple sum.
pub const VERBATIM_MAX_N: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDomain {
    pub lx: f64,
    pub lz: f64,
}

impl Default for ChannelDomain {
    fn default() -> Self {
        Self { lx: 1.0, lz: 1.0 }
    }
}

impl ChannelDomain {
    pub fn new(lx: f64, lz: f64) -> Result<Self> {
        if !(lx > 0.0 && lx.is_finite() && lz > 0.0 && lz.is_finite()) {
            return Err(Error::input("channel periods must be positive"));
        }
        Ok(Self { lx, lz })
    }

    /// `4π²(k₁²/Lx² + k₂²/4 + k₃²/Lz²)`, the eigenvalue of `−Δ` on `w_k`.
    pub fn stokes_factor(&self, k: ChannelMode) -> f64 {
        let [a, b, c] = k.map(f64::from);
        4.0 * PI * PI * (a * a / (self.lx * self.lx) + b * b / 4.0 + c * c / (self.lz * self.lz))
    }
}

pub fn basis_eval(k: ChannelMode, point: [f64; 3], domain: &ChannelDomain) -> Complex64 {
    let [x, y, z] = point;
    let phase = 2.0 * PI * (k[0] as f64 * x / domain.lx + k[2] as f64 * z / domain.lz);
    Complex64::from_polar(1.0, phase) * (PI * k[1] as f64 * y).sin()
}

fn partner(k: ChannelMode) -> ChannelMode {
    [-k[0], k[1], -k[2]]
}

fn conj3(v: &Vec3c) -> Vec3c {
    v.map(|z| z.conj())
}

fn norm3(v: &Vec3c) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Coefficients `α_k` for `−n ≤ k₁, k₃ ≤ n`, `0 ≤ k₂ ≤ n`; absent modes are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoefficients {
    n: i32,
    alpha: BTreeMap<ChannelMode, Vec3c>,
}

impl ChannelCoefficients {
    pub fn zero(n: i32) -> Self {
        Self {
            n,
            alpha: BTreeMap::new(),
        }
    }

    /// Validates the index range and the conjugation symmetry.
    pub fn new(n: i32, alpha: BTreeMap<ChannelMode, Vec3c>) -> Result<Self> {
        if n < 0 {
            return Err(Error::input("truncation must be nonnegative"));
        }
        let c = Self { n, alpha };
        for k in c.alpha.keys() {
            if !c.in_range(*k) {
                return Err(Error::input(format!(
                    "mode {k:?} outside the truncation n = {n}"
                )));
            }
        }
        let defect = c.reality_defect();
        if defect > 1e-12 {
            return Err(Error::input(format!(
                "coefficients violate the reality condition by {defect:e}"
            )));
        }
        Ok(c)
    }

    /// Inserts each `(k, v)` together with its conjugate partner.
    pub fn from_real_modes(
        n: i32,
        modes: impl IntoIterator<Item = (ChannelMode, Vec3c)>,
    ) -> Result<Self> {
        let mut alpha = BTreeMap::new();
        for (k, v) in modes {
            if partner(k) == k && v.iter().any(|z| z.im != 0.0) {
                return Err(Error::input(format!(
                    "self-conjugate mode {k:?} needs real coefficients"
                )));
            }
            alpha.insert(k, v);
            alpha.insert(partner(k), conj3(&v));
        }
        Self::new(n, alpha)
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn modes(&self) -> impl Iterator<Item = (&ChannelMode, &Vec3c)> {
        self.alpha.iter()
    }

    pub fn get(&self, k: ChannelMode) -> Vec3c {
        self.alpha.get(&k).copied().unwrap_or(ZERO3)
    }

    pub fn in_range(&self, k: ChannelMode) -> bool {
        let n = self.n;
        (-n..=n).contains(&k[0]) && (0..=n).contains(&k[1]) && (-n..=n).contains(&k[2])
    }

    /// `max_k |α_{(−k₁,k₂,−k₃)} − conj(α_k)| / (1 + |α_k|)`.
    pub fn reality_defect(&self) -> f64 {
        self.alpha
            .iter()
            .map(|(k, v)| {
                let w = self.get(partner(*k));
                let d: f64 = (0..3)
                    .map(|i| (w[i] - v[i].conj()).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                d / (1.0 + norm3(v))
            })
            .fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(ChannelMode, &Vec3c) -> Vec3c) -> Self {
        Self {
            n: self.n,
            alpha: self.alpha.iter().map(|(k, v)| (*k, f(*k, v))).collect(),
        }
    }

    /// `self + a·other`; the truncation becomes the larger of the two.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let mut out = self.clone();
        out.n = self.n.max(other.n);
        for (k, v) in &other.alpha {
            let e = out.alpha.entry(*k).or_insert(ZERO3);
            for i in 0..3 {
                e[i] += v[i] * a;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, v| v.map(|z| z * s))
    }

    /// Maximum per-mode defect of the exact divergence constraint.
    pub fn constraint_defect(&self, domain: &ChannelDomain) -> f64 {
        self.alpha
            .iter()
            .map(|(k, v)| {
                let h = v[0] * (k[0] as f64 / domain.lx) + v[2] * (k[2] as f64 / domain.lz);
                h.norm().max(if k[1] > 0 { v[1].norm() } else { 0.0 })
            })
            .fold(0.0, f64::max)
    }

    /// Orthogonal projection onto divergence-free coefficient sets.
    pub fn leray_project(&self, domain: &ChannelDomain) -> Self {
        self.map(|k, v| {
            let d = [k[0] as f64 / domain.lx, k[2] as f64 / domain.lz];
            let dd = d[0] * d[0] + d[1] * d[1];
            let (mut a, mut c) = (v[0], v[2]);
            if dd > 0.0 {
                let s = (a * d[0] + c * d[1]) / dd;
                a -= s * d[0];
                c -= s * d[1];
            }
            [a, ZERO, c]
        })
    }
}

/// Seeded divergence-free coefficients with `|α_k| ∝ (1 + |k|²)^{−decay/2}`.
pub fn random_channel(
    n: i32,
    domain: &ChannelDomain,
    amplitude: f64,
    decay: f64,
    rng: &mut ChaCha8Rng,
) -> ChannelCoefficients {
    let mut modes = Vec::new();
    for k1 in -n..=n {
        for k2 in 1..=n {
            for k3 in -n..=n {
                let k = [k1, k2, k3];
                if partner(k) < k {
                    continue;
                }
                let r2 = (k1 * k1 + k2 * k2 + k3 * k3) as f64;
                let sd = amplitude * (1.0 + r2).powf(-0.5 * decay);
                let mut g = || -> f64 { rng.sample(StandardNormal) };
                let v = if k1 == 0 && k3 == 0 {
                    [
                        Complex64::new(sd * g(), 0.0),
                        ZERO,
                        Complex64::new(sd * g(), 0.0),
                    ]
                } else {
                    let t = [-(k3 as f64) / domain.lz, k1 as f64 / domain.lx];
                    let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
                    let c = Complex64::new(g(), g()) * (sd / len);
                    [c * t[0], ZERO, c * t[1]]
                };
                modes.push((k, v));
            }
        }
    }
    ChannelCoefficients::from_real_modes(n, modes).expect("generated modes are valid")
}

/// `S(k₂) = Σ_{l=⌊k₂/2⌋}^{⌊(k₂+n)/2⌋} (2l+1−k₂)(1/(2k₂−2l−1) + 1/(2l+1))`.
pub fn index_sum(k2: i32, n: i32) -> f64 {
    let lo = k2.div_euclid(2);
    let hi = (k2 + n).div_euclid(2);
    (lo..=hi)
        .map(|l| {
            let l = l as f64;
            let k2 = k2 as f64;
            (2.0 * l + 1.0 - k2) * (1.0 / (2.0 * k2 - 2.0 * l - 1.0) + 1.0 / (2.0 * l + 1.0))
        })
        .sum()
}

/// `k̂ = (πik₁/Lx, S(k₂), πik₃/Lz)`.
pub fn khat(k: ChannelMode, n: i32, domain: &ChannelDomain) -> [Complex64; 3] {
    [
        I * (PI * k[0] as f64 / domain.lx),
        Complex64::new(index_sum(k[1], n), 0.0),
        I * (PI * k[2] as f64 / domain.lz),
    ]
}

fn khat_sum_sqr(k: ChannelMode, n: i32, domain: &ChannelDomain) -> f64 {
    let h = khat(k, n, domain);
    (h[0] + h[1] + h[2]).norm_sqr()
}

// ---------------------------------------------------------------------------
// Quadrature oracle

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (t * p - p0) / (t * t - 1.0);
            let step = p / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy)]
enum YProfile {
    Sin,
    /// `∂_y sin(πk₂y) = πk₂ cos(πk₂y)`.
    DSin,
}

/// Tensor grid: `nx` uniform points in `x`, `ny` Gauss–Legendre nodes on
/// `[0,1]`, `nz` uniform points in `z`.
struct Grid {
    nx: usize,
    ny: usize,
    nz: usize,
    y: Vec<f64>,
    wy: Vec<f64>,
    domain: ChannelDomain,
}

impl Grid {
    fn new(kmax: i32, domain: &ChannelDomain) -> Self {
        let k = kmax.max(1) as usize;
        let nx = OVERSAMPLE * (2 * k + 1);
        let ny = 2 * OVERSAMPLE * (k + 1);
        let (t, w) = gauss_legendre(ny);
        Self {
            nx,
            ny,
            nz: nx,
            y: t.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            wy: w.iter().map(|w| 0.5 * w).collect(),
            domain: *domain,
        }
    }

    fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    fn phases(m: usize, kmax: i32, sign: f64) -> Vec<Vec<Complex64>> {
        (0..m)
            .map(|a| {
                (-kmax..=kmax)
                    .map(|k| {
                        Complex64::from_polar(
                            1.0,
                            sign * 2.0 * PI * (k as f64) * a as f64 / m as f64,
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Values of `Σ c_k e^{…} Y_{k₂}(y)` on the grid, index `(a·ny + b)·nz + c`.
    fn eval(
        &self,
        kmax: i32,
        coeff: impl Fn(ChannelMode) -> Complex64,
        prof: YProfile,
    ) -> Vec<Complex64> {
        let kk = (2 * kmax + 1) as usize;
        let k2n = (kmax + 1) as usize;
        let ex = Self::phases(self.nx, kmax, 1.0);
        let ez = Self::phases(self.nz, kmax, 1.0);
        let ytab: Vec<Vec<f64>> = self
            .y
            .iter()
            .map(|&y| {
                (0..=kmax)
                    .map(|k2| {
                        let a = PI * k2 as f64;
                        match prof {
                            YProfile::Sin => (a * y).sin(),
                            YProfile::DSin => a * (a * y).cos(),
                        }
                    })
                    .collect()
            })
            .collect();
        let dense: Vec<Complex64> = (0..kk * k2n * kk)
            .map(|i| {
                let k1 = (i / (k2n * kk)) as i32 - kmax;
                let k2 = ((i / kk) % k2n) as i32;
                let k3 = (i % kk) as i32 - kmax;
                coeff([k1, k2, k3])
            })
            .collect();
        // z
        let mut t1 = vec![ZERO; kk * k2n * self.nz];
        for p in 0..kk * k2n {
            let row = &dense[p * kk..(p + 1) * kk];
            if row.iter().all(|z| *z == ZERO) {
                continue;
            }
            for c in 0..self.nz {
                t1[p * self.nz + c] = row.iter().zip(&ez[c]).map(|(a, e)| a * e).sum();
            }
        }
        // y
        let mut t2 = vec![ZERO; kk * self.ny * self.nz];
        for k1 in 0..kk {
            for b in 0..self.ny {
                for k2 in 0..k2n {
                    let s = ytab[b][k2];
                    if s == 0.0 {
                        continue;
                    }
                    let src = &t1[(k1 * k2n + k2) * self.nz..][..self.nz];
                    let dst = &mut t2[(k1 * self.ny + b) * self.nz..][..self.nz];
                    for (d, v) in dst.iter_mut().zip(src) {
                        *d += v * s;
                    }
                }
            }
        }
        // x
        let plane = self.ny * self.nz;
        let mut out = vec![ZERO; self.len()];
        for a in 0..self.nx {
            let dst = &mut out[a * plane..(a + 1) * plane];
            for k1 in 0..kk {
                let e = ex[a][k1];
                for (d, v) in dst.iter_mut().zip(&t2[k1 * plane..(k1 + 1) * plane]) {
                    *d += v * e;
                }
            }
        }
        out
    }

    /// `L²` projection of grid values onto `w_k`, `|k_i| ≤ kmax`, `1 ≤ k₂ ≤ kmax`.
    fn project(&self, values: &[Complex64], kmax: i32) -> BTreeMap<ChannelMode, Complex64> {
        let kk = (2 * kmax + 1) as usize;
        let ex = Self::phases(self.nx, kmax, -1.0);
        let ez = Self::phases(self.nz, kmax, -1.0);
        let plane = self.ny * self.nz;
        // x
        let mut s1 = vec![ZERO; kk * plane];
        for a in 0..self.nx {
            let src = &values[a * plane..(a + 1) * plane];
            for k1 in 0..kk {
                let e = ex[a][k1];
                for (d, v) in s1[k1 * plane..(k1 + 1) * plane].iter_mut().zip(src) {
                    *d += v * e;
                }
            }
        }
        let mut out = BTreeMap::new();
        let norm = 2.0 / (self.nx * self.nz) as f64;
        for k2 in 1..=kmax {
            let sy: Vec<f64> = self
                .y
                .iter()
                .zip(&self.wy)
                .map(|(y, w)| (PI * k2 as f64 * y).sin() * w)
                .collect();
            for k1 in 0..kk {
                // y
                let mut s2 = vec![ZERO; self.nz];
                for (b, s) in sy.iter().enumerate() {
                    let src = &s1[k1 * plane + b * self.nz..][..self.nz];
                    for (d, v) in s2.iter_mut().zip(src) {
                        *d += v * s;
                    }
                }
                // z
                for k3 in 0..kk {
                    let beta: Complex64 = s2.iter().zip(&ez).map(|(v, e)| v * e[k3]).sum();
                    out.insert([k1 as i32 - kmax, k2, k3 as i32 - kmax], beta * norm);
                }
            }
        }
        out
    }

    fn integrate_sqr(&self, values: &[Complex64]) -> f64 {
        let cell = self.domain.lx * self.domain.lz / (self.nx * self.nz) as f64;
        let mut s = 0.0;
        for (i, v) in values.iter().enumerate() {
            let b = (i / self.nz) % self.ny;
            s += self.wy[b] * v.norm_sqr();
        }
        s * cell
    }
}

/// Physical fields needed by the oracle: `u_j` and `∂_i u_j`.
struct Physical {
    u: [Vec<Complex64>; 3],
    /// `du[i][j] = ∂_i u_j`.
    du: [[Vec<Complex64>; 3]; 3],
}

fn physical(c: &ChannelCoefficients, g: &Grid) -> Physical {
    let n = c.n;
    let d = g.domain;
    let comp = |j: usize, w: &dyn Fn(ChannelMode) -> Complex64, p: YProfile| {
        g.eval(n, |k| c.get(k)[j] * w(k), p)
    };
    let one = |_: ChannelMode| Complex64::new(1.0, 0.0);
    let dx = move |k: ChannelMode| I * (2.0 * PI * k[0] as f64 / d.lx);
    let dz = move |k: ChannelMode| I * (2.0 * PI * k[2] as f64 / d.lz);
    Physical {
        u: std::array::from_fn(|j| comp(j, &one, YProfile::Sin)),
        du: [
            std::array::from_fn(|j| comp(j, &dx, YProfile::Sin)),
            std::array::from_fn(|j| comp(j, &one, YProfile::DSin)),
            std::array::from_fn(|j| comp(j, &dz, YProfile::Sin)),
        ],
    }
}

fn max_imag_ratio(fields: &[&Vec<Complex64>]) -> f64 {
    let mut im: f64 = 0.0;
    let mut mag: f64 = 0.0;
    for f in fields {
        for z in f.iter() {
            im = im.max(z.im.abs());
            mag = mag.max(z.norm());
        }
    }
    if mag == 0.0 {
        0.0
    } else {
        im / mag
    }
}

/// Oracle `‖∇u‖_{L²}` of a coefficient set.
pub fn oracle_gradient_norm(c: &ChannelCoefficients, domain: &ChannelDomain) -> f64 {
    let g = Grid::new(c.n, domain);
    let p = physical(c, &g);
    p.du.iter()
        .flatten()
        .map(|f| g.integrate_sqr(f))
        .sum::<f64>()
        .sqrt()
}

/// Oracle `‖Δu‖_{L²}` of a coefficient set.
pub fn oracle_laplacian_norm(c: &ChannelCoefficients, domain: &ChannelDomain) -> f64 {
    let g = Grid::new(c.n, domain);
    (0..3)
        .map(|j| {
            let f = g.eval(
                c.n,
                |k| -c.get(k)[j] * domain.stokes_factor(k),
                YProfile::Sin,
            );
            g.integrate_sqr(&f)
        })
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// Operations

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    /// `‖∇·u‖_{L²}` by quadrature.
    pub oracle: f64,
    /// `(Σ_k |πi(k₁α₁/Lx + k₃α₃/Lz) + S(k₂)α₂|²)^{1/2}`.
    pub verbatim: f64,
}

pub fn divergence_residual(c: &ChannelCoefficients, domain: &ChannelDomain) -> DivergenceReport {
    let g = Grid::new(c.n, domain);
    let p = physical(c, &g);
    let div: Vec<Complex64> = (0..g.len())
        .map(|i| p.du[0][0][i] + p.du[1][1][i] + p.du[2][2][i])
        .collect();
    let verbatim = c
        .modes()
        .map(|(k, a)| {
            let h = I * PI * (a[0] * (k[0] as f64 / domain.lx) + a[2] * (k[2] as f64 / domain.lz));
            (h + a[1] * index_sum(k[1], c.n)).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    DivergenceReport {
        oracle: g.integrate_sqr(&div).sqrt(),
        verbatim,
    }
}

/// Multiplies every mode by `4π²(k₁²/Lx² + k₂²/4 + k₃²/Lz²)`.
pub fn stokes_channel(c: &ChannelCoefficients, domain: &ChannelDomain) -> ChannelCoefficients {
    c.map(|k, v| v.map(|z| z * domain.stokes_factor(k)))
}

/// Per-mode comparison of two coefficient sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub k1: i32,
    pub k2: i32,
    pub k3: i32,
    pub oracle_abs: f64,
    pub verbatim_abs: f64,
    pub difference_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearComparison {
    /// Projected `Π(u·∇)u` on modes up to `2n`, by quadrature.
    pub oracle: ChannelCoefficients,
    /// The closed-form triple sum on the same modes.
    pub verbatim: ChannelCoefficients,
    pub rows: Vec<DiscrepancyRow>,
    /// Largest imaginary part of the physical product relative to its size.
    pub max_imag_ratio: f64,
}

impl NonlinearComparison {
    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows)
    }
}

fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::parse("csv", e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::parse("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Oracle `Π_n(u·∇)u` with output truncation `2n`.
pub fn nonlinear_oracle(
    c: &ChannelCoefficients,
    domain: &ChannelDomain,
) -> (ChannelCoefficients, f64) {
    let kout = 2 * c.n;
    let g = Grid::new(kout, domain);
    let p = physical(c, &g);
    let prod: [Vec<Complex64>; 3] = std::array::from_fn(|i| {
        (0..g.len())
            .map(|q| (0..3).map(|j| p.u[j][q] * p.du[j][i][q]).sum())
            .collect()
    });
    let imag = max_imag_ratio(&[&prod[0], &prod[1], &prod[2]]);
    let comps: Vec<_> = prod
        .iter()
        .map(|f| {
            let re: Vec<Complex64> = f.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
            g.project(&re, kout)
        })
        .collect();
    let alpha = comps[0]
        .keys()
        .map(|k| (*k, [comps[0][k], comps[1][k], comps[2][k]]))
        .filter(|(_, v)| v.iter().any(|z| *z != ZERO))
        .collect();
    let raw = ChannelCoefficients { n: kout, alpha };
    (raw.leray_project(domain), imag)
}

/// The closed-form triple sum for `B(u_n,u_n)` read literally.
///
/// Reading adopted: `k` runs over `−2n ≤ k₁,k₃ ≤ 2n`, `0 ≤ k₂ ≤ 2n`; `j` over
/// the integer box between `k₋` and `k₊`; `α` vanishes outside its
/// truncation; dot products are bilinear without conjugation with `j` taken
/// as the raw index vector; `|k̂|²` is the sum of squared moduli and the
/// projection term is dropped when `k̂ = 0`.
pub fn nonlinear_verbatim(
    c: &ChannelCoefficients,
    domain: &ChannelDomain,
) -> Result<ChannelCoefficients> {
    let n = c.n;
    if n > VERBATIM_MAX_N {
        return Err(Error::input(format!(
            "verbatim triple sum limited to n <= {VERBATIM_MAX_N}"
        )));
    }
    let get = |k: ChannelMode| if c.in_range(k) { c.get(k) } else { ZERO3 };
    let mut alpha = BTreeMap::new();
    for k1 in -2 * n..=2 * n {
        for k2 in 0..=2 * n {
            for k3 in -2 * n..=2 * n {
                let k = [k1, k2, k3];
                let kh = khat(k, n, domain);
                let kh2: f64 = kh.iter().map(|z| z.norm_sqr()).sum();
                let mut acc = ZERO3;
                let lo = k.map(|x| x.min(0));
                let hi = k.map(|x| x.max(0));
                for j1 in lo[0]..=hi[0] {
                    for j2 in lo[1]..=hi[1] {
                        for j3 in lo[2]..=hi[2] {
                            let j = [j1, j2, j3];
                            let aj = get(j);
                            if aj == ZERO3 {
                                continue;
                            }
                            let mut proj = aj;
                            if kh2 > 0.0 {
                                let s: Complex64 =
                                    (0..3).map(|i| aj[i] * kh[i]).sum::<Complex64>() / kh2;
                                for i in 0..3 {
                                    proj[i] -= kh[i] * s;
                                }
                            }
                            let (m_lo, m_hi) = ((k2 + 1).div_euclid(2), (k2 + 2 * n).div_euclid(2));
                            for m in m_lo..=m_hi {
                                let km = [k1, 2 * m + 1 - k2, k3];
                                let a = get([km[0] - j1, km[1] - j2, km[2] - j3]);
                                let dot: Complex64 = (0..3).map(|i| a[i] * j[i] as f64).sum();
                                if dot == ZERO {
                                    continue;
                                }
                                let (m, j2f, k2f) = (m as f64, j2 as f64, k2 as f64);
                                let w = (1.0 / (2.0 * m - 2.0 * j2f + 1.0)
                                    + 1.0 / (2.0 * m - 2.0 * j2f - 2.0 * k2f + 1.0)
                                    - 1.0 / (2.0 * m + 1.0)
                                    - 1.0 / (2.0 * m - 2.0 * k2f + 1.0))
                                    / PI;
                                for i in 0..3 {
                                    acc[i] += dot * proj[i] * (2.0 * w);
                                }
                            }
                        }
                    }
                }
                if acc != ZERO3 {
                    alpha.insert(k, acc);
                }
            }
        }
    }
    Ok(ChannelCoefficients { n: 2 * n, alpha })
}

pub fn compare(
    oracle: &ChannelCoefficients,
    verbatim: &ChannelCoefficients,
) -> Vec<DiscrepancyRow> {
    let mut keys: Vec<ChannelMode> = oracle
        .alpha
        .keys()
        .chain(verbatim.alpha.keys())
        .copied()
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let (a, b) = (oracle.get(k), verbatim.get(k));
            let d: Vec3c = std::array::from_fn(|i| a[i] - b[i]);
            DiscrepancyRow {
                k1: k[0],
                k2: k[1],
                k3: k[2],
                oracle_abs: norm3(&a),
                verbatim_abs: norm3(&b),
                difference_abs: norm3(&d),
            }
        })
        .collect()
}

/// `B(u_n,u_n)` by quadrature and by the closed-form triple sum.
pub fn nonlinear_channel(
    c: &ChannelCoefficients,
    domain: &ChannelDomain,
) -> Result<NonlinearComparison> {
    let (oracle, max_imag_ratio) = nonlinear_oracle(c, domain);
    let verbatim = nonlinear_verbatim(c, domain)?;
    Ok(NonlinearComparison {
        rows: compare(&oracle, &verbatim),
        oracle,
        verbatim,
        max_imag_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelNorms {
    pub oracle_du: f64,
    pub oracle_au: f64,
    /// `(2LxLz Σ |α_k|² |k̂₁+k̂₂+k̂₃|²)^{1/2}`.
    pub verbatim_du: f64,
    /// `(2π²LxLz Σ |α_k|² (k₁²/Lx² + k₂²/4 + k₃²/Lz²)²)^{1/2}`.
    pub verbatim_au: f64,
}

pub fn verbatim_gradient_norm(c: &ChannelCoefficients, n: i32, domain: &ChannelDomain) -> f64 {
    let s = c.modes().fold(0.0, |acc, (k, a)| {
        acc + norm3(a).powi(2) * khat_sum_sqr(*k, n, domain)
    });
    (2.0 * domain.lx * domain.lz * s).sqrt()
}

pub fn channel_norms(c: &ChannelCoefficients, domain: &ChannelDomain) -> ChannelNorms {
    let au = c.modes().fold(0.0, |acc, (k, a)| {
        acc + norm3(a).powi(2) * (domain.stokes_factor(*k) / (4.0 * PI * PI)).powi(2)
    });
    ChannelNorms {
        oracle_du: oracle_gradient_norm(c, domain),
        oracle_au: oracle_laplacian_norm(c, domain),
        verbatim_du: verbatim_gradient_norm(c, c.n, domain),
        verbatim_au: (2.0 * PI * PI * domain.lx * domain.lz * au).sqrt(),
    }
}

/// Row of the norm comparison table over seeded random coefficient sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormDiscrepancyRow {
    pub sample: usize,
    pub oracle_du: f64,
    pub verbatim_du: f64,
    pub oracle_au: f64,
    pub verbatim_au: f64,
}

pub fn norm_discrepancy_csv(rows: &[NormDiscrepancyRow]) -> Result<String> {
    rows_to_csv(rows)
}

/// Sine series of the body force `(1, 0, 1)`: `b_{k₂} = 4/(πk₂)` for odd `k₂ ≤ n`.
pub fn channel_forcing(n: i32) -> ChannelCoefficients {
    let alpha = (1..=n.max(0))
        .filter(|k2| k2 % 2 == 1)
        .map(|k2| {
            let b = Complex64::new(4.0 / (PI * k2 as f64), 0.0);
            ([0, k2, 0], [b, ZERO, b])
        })
        .collect();
    ChannelCoefficients { n, alpha }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFormula {
    #[default]
    Oracle,
    Verbatim,
}

/// One sample of a channel coefficient trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub t: f64,
    pub coeffs: ChannelCoefficients,
    pub dcoeffs_dt: Option<ChannelCoefficients>,
}

/// Norm series of a channel run in the layout the verifier consumes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelSeries {
    pub times: Vec<f64>,
    pub abs_du: Vec<f64>,
    pub abs_au: Vec<f64>,
    /// `‖E_n‖₁` with `E_n = du_n/dt + νAu_n + B(u_n,u_n) − f`.
    pub res_h1: Vec<f64>,
}

impl ChannelSeries {
    pub fn to_samples(&self) -> Vec<NormSample> {
        (0..self.times.len())
            .map(|i| NormSample {
                t: self.times[i],
                l2: 0.0,
                h1: self.abs_du[i],
                h2: self.abs_au[i],
                h3: None,
                res_h1: Some(self.res_h1[i]),
                res_h2: None,
            })
            .collect()
    }
}

/// `E_n` coefficients on modes up to `2n`, with `B` from the chosen formula
/// and `f` the sine series of `(1,0,1)` truncated at `2n`.
pub fn channel_residual(
    sample: &ChannelSample,
    domain: &ChannelDomain,
    nu: f64,
    formula: NormFormula,
) -> Result<ChannelCoefficients> {
    let c = &sample.coeffs;
    let dudt = sample
        .dcoeffs_dt
        .as_ref()
        .ok_or_else(|| Error::input(format!("missing time derivative at t = {}", sample.t)))?;
    let b = match formula {
        NormFormula::Oracle => nonlinear_oracle(c, domain).0,
        NormFormula::Verbatim => nonlinear_verbatim(c, domain)?,
    };
    Ok(dudt
        .axpy(nu, &stokes_channel(c, domain))
        .axpy(1.0, &b)
        .axpy(-1.0, &channel_forcing(2 * c.n)))
}

/// `|Du_n|`, `|Au_n|` and `‖E_n‖₁` for every sample.
pub fn channel_certificate_inputs(
    samples: &[ChannelSample],
    domain: &ChannelDomain,
    nu: f64,
    formula: NormFormula,
) -> Result<ChannelSeries> {
    let mut out = ChannelSeries::default();
    for s in samples {
        let e = channel_residual(s, domain, nu, formula)?;
        let (du, au, r) = match formula {
            NormFormula::Oracle => (
                oracle_gradient_norm(&s.coeffs, domain),
                oracle_laplacian_norm(&s.coeffs, domain),
                oracle_gradient_norm(&e, domain),
            ),
            NormFormula::Verbatim => {
                let norms = channel_norms(&s.coeffs, domain);
                (
                    norms.verbatim_du,
                    norms.verbatim_au,
                    verbatim_gradient_norm(&e, s.coeffs.n, domain),
                )
            }
        };
        out.times.push(s.t);
        out.abs_du.push(du);
        out.abs_au.push(au);
        out.res_h1.push(r);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Coefficient files

pub const CHANNEL_MAGIC: &str = "ns-certify-channel";

/// Text format: magic and version, `domain Lx Lz`, `n`, `modes count`, then one
/// `k1 k2 k3 Re α1 Im α1 Re α2 Im α2 Re α3 Im α3` record per mode.
pub fn write_channel_string(c: &ChannelCoefficients, domain: &ChannelDomain) -> String {
    let mut s = String::new();
    writeln!(s, "{CHANNEL_MAGIC} 1").unwrap();
    writeln!(s, "domain {:e} {:e}", domain.lx, domain.lz).unwrap();
    writeln!(s, "n {}", c.n).unwrap();
    writeln!(s, "modes {}", c.alpha.len()).unwrap();
    for (k, v) in &c.alpha {
        write!(s, "{} {} {}", k[0], k[1], k[2]).unwrap();
        for z in v {
            write!(s, " {:e} {:e}", z.re, z.im).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn read_channel_str(text: &str) -> Result<(ChannelDomain, ChannelCoefficients)> {
    let bad = |m: String| Error::parse("channel file", m);
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let mut header = |key: &str| -> Result<Vec<String>> {
        let (no, l) = lines
            .next()
            .ok_or_else(|| bad(format!("missing '{key}' line")))?;
        let mut p = l.split_whitespace();
        if p.next() != Some(key) {
            return Err(bad(format!("line {}: expected '{key}'", no + 1)));
        }
        Ok(p.map(str::to_string).collect())
    };
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad(format!("bad number '{s}'"))) };
    let int = |s: &str| -> Result<i32> { s.parse().map_err(|_| bad(format!("bad integer '{s}'"))) };
    if header(CHANNEL_MAGIC)? != ["1"] {
        return Err(bad("unsupported format version".into()));
    }
    let d = header("domain")?;
    if d.len() != 2 {
        return Err(bad("domain needs Lx and Lz".into()));
    }
    let domain = ChannelDomain::new(num(&d[0])?, num(&d[1])?)?;
    let n = int(header("n")?.first().map(String::as_str).unwrap_or(""))?;
    let count = int(header("modes")?.first().map(String::as_str).unwrap_or(""))? as usize;
    let mut alpha = BTreeMap::new();
    for (no, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 9 {
            return Err(bad(format!("line {}: expected 9 columns", no + 1)));
        }
        let k = [int(f[0])?, int(f[1])?, int(f[2])?];
        let v: Vec3c = std::array::from_fn(|i| {
            Complex64::new(
                num(f[3 + 2 * i]).unwrap_or(f64::NAN),
                num(f[4 + 2 * i]).unwrap_or(f64::NAN),
            )
        });
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(bad(format!("line {}: bad coefficient", no + 1)));
        }
        if alpha.insert(k, v).is_some() {
            return Err(bad(format!("line {}: duplicate mode {k:?}", no + 1)));
        }
    }
    if alpha.len() != count {
        return Err(bad(format!(
            "header announces {count} modes, found {}",
            alpha.len()
        )));
    }
    Ok((domain, ChannelCoefficients::new(n, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::substream;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mode010(v: [f64; 3]) -> ChannelCoefficients {
        ChannelCoefficients::from_real_modes(1, [([0, 1, 0], v.map(c))]).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| x.powi(12) * w).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn basis_examples() {
        let d = ChannelDomain::default();
        assert!((basis_eval([0, 1, 0], [0.3, 0.5, 0.7], &d) - c(1.0)).norm() < 1e-15);
        assert_eq!(basis_eval([2, 0, 1], [0.3, 0.4, 0.7], &d).norm(), 0.0);
        assert!((basis_eval([1, 1, 0], [0.5, 0.5, 0.0], &d) - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn divergence_examples() {
        let d = ChannelDomain::new(1.5, 0.75).unwrap();
        let r = divergence_residual(&mode010([1.0, 0.0, 1.0]), &d);
        assert!(r.oracle < 1e-10 && r.verbatim < 1e-12);
        let r = divergence_residual(&mode010([0.0, 1.0, 0.0]), &d);
        let expect = PI * (d.lx * d.lz / 2.0).sqrt();
        assert!(
            (r.oracle - expect).abs() < 1e-10 * expect,
            "{} vs {expect}",
            r.oracle
        );
        assert_eq!(
            divergence_residual(&ChannelCoefficients::zero(2), &d).oracle,
            0.0
        );
        let u = random_channel(2, &d, 1.0, 1.0, &mut substream(3, 0));
        assert!(divergence_residual(&u, &d).oracle < 1e-10);
    }

    #[test]
    fn stokes_examples() {
        let d = ChannelDomain::default();
        let u = ChannelCoefficients::from_real_modes(1, [([1, 1, 1], [c(1.0), c(0.0), c(-1.0)])])
            .unwrap();
        let a = stokes_channel(&u, &d);
        assert!((a.get([1, 1, 1])[0].re - 9.0 * PI * PI).abs() < 1e-12);
        let a = stokes_channel(&mode010([1.0, 0.0, 1.0]), &d);
        assert!((a.get([0, 1, 0])[2].re - PI * PI).abs() < 1e-12);
        assert!(stokes_channel(&ChannelCoefficients::zero(1), &d)
            .modes()
            .next()
            .is_none());
    }

    #[test]
    fn norm_examples() {
        let d = ChannelDomain::default();
        let n = channel_norms(&mode010([1.0, 0.0, 1.0]), &d);
        assert!((n.oracle_du - PI).abs() < 1e-12);
        // |Δu|² = 2·(π²)²·(1/2).
        assert!((n.oracle_au - PI * PI).abs() < 1e-11);
        let z = channel_norms(&ChannelCoefficients::zero(1), &d);
        assert_eq!(
            [z.oracle_du, z.oracle_au, z.verbatim_du, z.verbatim_au],
            [0.0; 4]
        );
    }

    #[test]
    fn oracle_norms_match_parseval() {
        let d = ChannelDomain::new(2.0, 1.0).unwrap();
        let u = random_channel(2, &d, 1.0, 1.0, &mut substream(9, 1));
        let du2: f64 = u
            .modes()
            .map(|(k, a)| norm3(a).powi(2) * d.stokes_factor(*k))
            .sum::<f64>()
            * d.lx
            * d.lz
            / 2.0;
        let au2: f64 = u
            .modes()
            .map(|(k, a)| norm3(a).powi(2) * d.stokes_factor(*k).powi(2))
            .sum::<f64>()
            * d.lx
            * d.lz
            / 2.0;
        let n = channel_norms(&u, &d);
        assert!((n.oracle_du - du2.sqrt()).abs() < 1e-10 * du2.sqrt());
        assert!((n.oracle_au - au2.sqrt()).abs() < 1e-10 * au2.sqrt());
    }

    #[test]
    fn forcing_coefficients() {
        let f = channel_forcing(6);
        assert!((f.get([0, 1, 0])[0].re - 4.0 / PI).abs() < 1e-15);
        assert_eq!(f.get([0, 2, 0]), ZERO3);
        assert!((f.get([0, 5, 0])[2].re - 4.0 / (5.0 * PI)).abs() < 1e-15);
        assert!(f.modes().all(|(_, v)| v[1] == ZERO));
    }

    #[test]
    fn nonlinear_single_mode_and_zero() {
        let d = ChannelDomain::default();
        let z = nonlinear_channel(&ChannelCoefficients::zero(2), &d).unwrap();
        assert!(z.oracle.modes().next().is_none() && z.verbatim.modes().next().is_none());
        // A shear profile (sin πy, 0, sin πy) has (u·∇)u = 0.
        let cmp = nonlinear_channel(&mode010([1.0, 0.0, 1.0]), &d).unwrap();
        assert!(cmp.oracle.modes().all(|(_, v)| norm3(v) < 1e-12));
        let u = random_channel(2, &d, 1.0, 1.0, &mut substream(5, 2));
        let cmp = nonlinear_channel(&u, &d).unwrap();
        assert!(cmp.oracle.reality_defect() < 1e-10);
        assert!(cmp.max_imag_ratio < 1e-10);
        assert!(cmp.oracle.constraint_defect(&d) < 1e-12);
        assert!(!cmp.to_csv().unwrap().is_empty());
        assert!(nonlinear_verbatim(&ChannelCoefficients::zero(5), &d).is_err());
    }

    #[test]
    fn oracle_product_matches_direct_pointwise_projection() {
        // One coefficient of (u·∇)u computed with an independent midpoint-free
        // Gauss rule in all three directions.
        let d = ChannelDomain::default();
        let u = ChannelCoefficients::from_real_modes(
            1,
            [
                ([1, 1, 0], [c(0.0), c(0.0), Complex64::new(0.3, 0.2)]),
                ([0, 1, 1], [c(0.5), c(0.0), c(0.0)]),
            ],
        )
        .unwrap();
        let (b, _) = nonlinear_oracle(&u, &d);
        let eval = |p: [f64; 3]| -> ([f64; 3], [[f64; 3]; 3]) {
            let mut v = [0.0; 3];
            let mut g = [[0.0; 3]; 3];
            for (k, a) in u.modes() {
                let w = basis_eval(*k, p, &d);
                let ph = Complex64::from_polar(
                    1.0,
                    2.0 * PI * (k[0] as f64 * p[0] + k[2] as f64 * p[2]),
                );
                let dy = ph * PI * k[1] as f64 * (PI * k[1] as f64 * p[1]).cos();
                for j in 0..3 {
                    v[j] += (a[j] * w).re;
                    g[0][j] += (a[j] * w * I * 2.0 * PI * k[0] as f64).re;
                    g[1][j] += (a[j] * dy).re;
                    g[2][j] += (a[j] * w * I * 2.0 * PI * k[2] as f64).re;
                }
            }
            (v, g)
        };
        let (gx, gw) = gauss_legendre(24);
        let m = 12;
        let k = [1, 2, 1];
        let mut beta = ZERO3;
        for a in 0..m {
            for cz in 0..m {
                for (t, w) in gx.iter().zip(&gw) {
                    let p = [a as f64 / m as f64, 0.5 * (t + 1.0), cz as f64 / m as f64];
                    let (v, g) = eval(p);
                    let wk = basis_eval(k, p, &d).conj() * (0.5 * w / (m * m) as f64);
                    for i in 0..3 {
                        let prod: f64 = (0..3).map(|j| v[j] * g[j][i]).sum();
                        beta[i] += wk * prod * 2.0;
                    }
                }
            }
        }
        let raw = ChannelCoefficients {
            n: 2,
            alpha: [(k, beta)].into_iter().collect(),
        }
        .leray_project(&d);
        let want = raw.get(k);
        let got = b.get(k);
        for i in 0..3 {
            assert!((want[i] - got[i]).norm() < 1e-12, "{:?} vs {:?}", want, got);
        }
    }

    #[test]
    fn certificate_inputs() {
        let d = ChannelDomain::default();
        let z = ChannelCoefficients::zero(1);
        let s = ChannelSample {
            t: 0.0,
            coeffs: z.clone(),
            dcoeffs_dt: Some(z.clone()),
        };
        let series = channel_certificate_inputs(
            &[
                s.clone(),
                ChannelSample {
                    t: 1.0,
                    ..s.clone()
                },
            ],
            &d,
            1.0,
            NormFormula::Oracle,
        )
        .unwrap();
        assert_eq!(series.times.len(), 2);
        assert_eq!(series.abs_du, vec![0.0, 0.0]);
        assert!(series.res_h1[0] > 0.0);
        let missing = ChannelSample {
            dcoeffs_dt: None,
            ..s
        };
        assert!(matches!(
            channel_certificate_inputs(&[missing], &d, 1.0, NormFormula::Oracle),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn reality_is_enforced_and_file_roundtrips() {
        let mut alpha = BTreeMap::new();
        alpha.insert([1, 1, 0], [c(1.0), ZERO, ZERO]);
        assert!(ChannelCoefficients::new(1, alpha).is_err());
        let d = ChannelDomain::new(2.0, 3.0).unwrap();
        let u = random_channel(2, &d, 1.0, 1.0, &mut substream(1, 1));
        let (d2, back) = read_channel_str(&write_channel_string(&u, &d)).unwrap();
        assert_eq!(d2, d);
        assert_eq!(back, u);
        assert!(read_channel_str(
            "ns-certify-channel 1\ndomain 1 1\nn 1\nmodes 2\n0 1 0 1 0 0 0 1 0\n"
        )
        .is_err());
    }

    #[test]
    fn index_sum_vanishes_for_k2_zero() {
        for n in 0..5 {
            assert_eq!(index_sum(0, n), 0.0);
        }
    }
}
