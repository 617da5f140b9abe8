//! Physical-space transforms and the alias-free nonlinear term.
//!
//! Products are evaluated on a zero-padded grid. For inputs whose supports
//! extend to `K_u` and `K_v` along an axis and requested output modes up to
//! `K_out`, a grid of `N ≥ K_u + K_v + K_out + 1` points makes every retained
//! coefficient of the product exact: no alias of the product spectrum can land
//! on a retained mode.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::Result;
use crate::field::{project_transverse, DomainSpec, SpectralVelocityField, Vec3c, WaveVector};

/// Smallest `m ≥ n` of the form `2^a 3^b 5^c`.
pub fn good_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Dense complex 3D grid in row-major order (axis 2 fastest).
#[derive(Debug, Clone)]
pub struct Grid3 {
    pub dims: [usize; 3],
    pub data: Vec<Complex64>,
}

impl Grid3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); dims[0] * dims[1] * dims[2]],
        }
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.dims[1] + i[1]) * self.dims[2] + i[2]
    }

    /// Storage position of wave vector `k` (wrapped modulo the grid).
    #[inline]
    pub fn wave_index(&self, k: WaveVector) -> usize {
        let w = |ki: i32, n: usize| ki.rem_euclid(n as i32) as usize;
        self.index([
            w(k.0[0], self.dims[0]),
            w(k.0[1], self.dims[1]),
            w(k.0[2], self.dims[2]),
        ])
    }
}

/// Planned forward and inverse transforms for one grid shape.
pub struct Transform3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl Transform3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let plan = |planner: &mut FftPlanner<f64>, dir| {
            [
                planner.plan_fft(dims[0], dir),
                planner.plan_fft(dims[1], dir),
                planner.plan_fft(dims[2], dir),
            ]
        };
        let forward = plan(&mut planner, FftDirection::Forward);
        let inverse = plan(&mut planner, FftDirection::Inverse);
        Self {
            dims,
            forward,
            inverse,
        }
    }

    /// Spectral coefficients → point values (`Σ_k û_k e^{+2πi k·j/N}`).
    pub fn to_physical(&self, g: &mut Grid3) {
        self.run(g, &self.inverse);
    }

    /// Point values → spectral coefficients, normalized by the point count.
    pub fn to_spectral(&self, g: &mut Grid3) {
        self.run(g, &self.forward);
        let s = 1.0 / g.data.len() as f64;
        for z in &mut g.data {
            *z *= s;
        }
    }

    fn run(&self, g: &mut Grid3, plans: &[Arc<dyn Fft<f64>>; 3]) {
        assert_eq!(g.dims, self.dims, "grid shape does not match the plan");
        let [n0, n1, n2] = self.dims;
        // Contiguous axis.
        plans[2].process(&mut g.data);
        // Strided axes go through a scratch line.
        let mut line = vec![Complex64::new(0.0, 0.0); n0.max(n1)];
        for i0 in 0..n0 {
            for i2 in 0..n2 {
                let at = |i1: usize| (i0 * n1 + i1) * n2 + i2;
                for (i1, z) in line[..n1].iter_mut().enumerate() {
                    *z = g.data[at(i1)];
                }
                plans[1].process(&mut line[..n1]);
                for (i1, z) in line[..n1].iter().enumerate() {
                    g.data[at(i1)] = *z;
                }
            }
        }
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let at = |i0: usize| (i0 * n1 + i1) * n2 + i2;
                for (i0, z) in line[..n0].iter_mut().enumerate() {
                    *z = g.data[at(i0)];
                }
                plans[0].process(&mut line[..n0]);
                for (i0, z) in line[..n0].iter().enumerate() {
                    g.data[at(i0)] = *z;
                }
            }
        }
    }
}

/// Scatters the full spectrum of one component (optionally multiplied by a
/// per-mode factor) into a grid.
fn scatter(
    u: &SpectralVelocityField,
    dims: [usize; 3],
    value: impl Fn(WaveVector, &Vec3c) -> Complex64,
) -> Grid3 {
    let mut g = Grid3::zeros(dims);
    for (k, v) in u.modes() {
        let z = value(*k, v);
        let i = g.wave_index(*k);
        g.data[i] = z;
        let j = g.wave_index(k.neg());
        g.data[j] = z.conj();
    }
    g
}

/// Point values of the three velocity components on an `n`-point grid
/// (`x_j = j L / n`), returned in [`Grid3`] order.
pub fn to_physical(u: &SpectralVelocityField, dims: [usize; 3]) -> [Vec<f64>; 3] {
    let ext = u.support_extent();
    for i in 0..3 {
        assert!(
            dims[i] as i32 > 2 * ext[i],
            "grid too coarse to represent the field"
        );
    }
    let t = Transform3::new(dims);
    let comp = |c: usize| {
        let mut g = scatter(u, dims, |_, v| v[c]);
        t.to_physical(&mut g);
        g.data.iter().map(|z| z.re).collect::<Vec<f64>>()
    };
    [comp(0), comp(1), comp(2)]
}

/// Samples `f` on an `n`-point grid, transforms, keeps `λ ≤ cutoff` and
/// Leray-projects.
pub fn from_physical(
    domain: DomainSpec,
    cutoff: f64,
    dims: [usize; 3],
    f: impl Fn([f64; 3]) -> [f64; 3],
) -> SpectralVelocityField {
    let t = Transform3::new(dims);
    let mut grids = [Grid3::zeros(dims), Grid3::zeros(dims), Grid3::zeros(dims)];
    for i0 in 0..dims[0] {
        for i1 in 0..dims[1] {
            for i2 in 0..dims[2] {
                let x = [
                    i0 as f64 * domain.periods[0] / dims[0] as f64,
                    i1 as f64 * domain.periods[1] / dims[1] as f64,
                    i2 as f64 * domain.periods[2] / dims[2] as f64,
                ];
                let v = f(x);
                let idx = grids[0].index([i0, i1, i2]);
                for c in 0..3 {
                    grids[c].data[idx] = Complex64::new(v[c], 0.0);
                }
            }
        }
    }
    for g in &mut grids {
        t.to_spectral(g);
    }
    let modes = domain
        .canonical_modes(cutoff)
        .into_iter()
        .filter(|k| (0..3).all(|i| 2 * k.0[i].unsigned_abs() < dims[i] as u32))
        .map(|k| {
            let i = grids[0].wave_index(k);
            (k, [grids[0].data[i], grids[1].data[i], grids[2].data[i]])
        });
    SpectralVelocityField::from_modes(domain, cutoff, modes.collect::<Vec<_>>())
        .expect("modes were filtered by the cutoff")
}

/// `Π (u·∇) v`, exact on every mode with `λ ≤ out_cutoff`.
///
/// The cutoff attribute of the result is `out_cutoff`. Modes of the exact
/// product beyond the cutoff are discarded; `4·max(Λ_u, Λ_v)` captures the
/// complete product.
pub fn nonlinear_term(
    u: &SpectralVelocityField,
    v: &SpectralVelocityField,
    out_cutoff: f64,
) -> Result<SpectralVelocityField> {
    u.domain().ensure_same(v.domain())?;
    let domain = *u.domain();
    if u.is_empty() || v.is_empty() {
        return Ok(SpectralVelocityField::zero(domain, out_cutoff));
    }
    let ku = u.support_extent();
    let kv = v.support_extent();
    let limit = domain.max_index(out_cutoff);
    let mut kout = [0; 3];
    let mut dims = [0; 3];
    for i in 0..3 {
        kout[i] = limit[i].min(ku[i] + kv[i]);
        dims[i] = good_size((ku[i] + kv[i] + kout[i] + 1) as usize);
    }
    let t = Transform3::new(dims);

    let mut uphys: Vec<Grid3> = (0..3).map(|c| scatter(u, dims, |_, w| w[c])).collect();
    for g in &mut uphys {
        t.to_physical(g);
    }

    let n = dims.iter().product::<usize>();
    let mut prod = [
        vec![Complex64::new(0.0, 0.0); n],
        vec![Complex64::new(0.0, 0.0); n],
        vec![Complex64::new(0.0, 0.0); n],
    ];
    let i_unit = Complex64::new(0.0, 1.0);
    for (c, acc) in prod.iter_mut().enumerate() {
        for (j, uj) in uphys.iter().enumerate() {
            let mut dv = scatter(v, dims, |k, w| i_unit * domain.wavenumber(k)[j] * w[c]);
            t.to_physical(&mut dv);
            for ((a, x), y) in acc.iter_mut().zip(&uj.data).zip(&dv.data) {
                // Both factors are real up to rounding.
                *a += Complex64::new(x.re * y.re, 0.0);
            }
        }
    }
    let mut spec: Vec<Grid3> = prod.into_iter().map(|data| Grid3 { dims, data }).collect();
    for g in &mut spec {
        t.to_spectral(g);
    }

    let mut coeffs = BTreeMap::new();
    for a in -kout[0]..=kout[0] {
        for b in -kout[1]..=kout[1] {
            for c in -kout[2]..=kout[2] {
                let k = WaveVector([a, b, c]);
                if !k.is_canonical() || domain.eigenvalue(k) > out_cutoff {
                    continue;
                }
                let i = spec[0].wave_index(k);
                let raw = [spec[0].data[i], spec[1].data[i], spec[2].data[i]];
                let p = project_transverse(&domain.wavenumber(k), &raw);
                coeffs.insert(k, p);
            }
        }
    }
    Ok(SpectralVelocityField::from_parts_unchecked(
        domain, out_cutoff, coeffs,
    ))
}

/// `B(u, u)` on the full support of the product.
pub fn nonlinear_full(u: &SpectralVelocityField) -> SpectralVelocityField {
    nonlinear_term(u, u, 4.0 * u.max_eigenvalue()).expect("same domain")
}

/// `b(u, v, w) = ((u·∇)v, w)`.
pub fn trilinear_form(
    u: &SpectralVelocityField,
    v: &SpectralVelocityField,
    w: &SpectralVelocityField,
) -> Result<f64> {
    u.domain().ensure_same(w.domain())?;
    let b = nonlinear_term(u, v, w.max_eigenvalue())?;
    b.inner(w)
}

/// `(B(u, v), Aw)`.
pub fn trilinear_with_stokes(
    u: &SpectralVelocityField,
    v: &SpectralVelocityField,
    w: &SpectralVelocityField,
) -> Result<f64> {
    trilinear_form(u, v, &w.stokes_apply())
}
