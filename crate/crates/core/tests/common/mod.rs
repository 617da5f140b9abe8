//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the FFT path of the library: products are formed by
//! direct convolution sums and physical values by direct Fourier summation.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ns_certify::field::{DomainSpec, SpectralVelocityField, WaveVector};
use ns_certify::ode_bounds::OdeBoundProblem;
use ns_certify::random::{random_field, substream, RandomFieldSpec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type V3 = [Complex64; 3];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn field(seed: u64, stream: u64, max_wavenumber: i32, decay: f64) -> SpectralVelocityField {
    let spec = RandomFieldSpec {
        max_wavenumber,
        decay,
        amplitude: 1.0,
        cutoff: None,
    };
    random_field(DomainSpec::default(), &spec, &mut substream(seed, stream))
}

/// `Π (u·∇)v` on every wavevector, by the `O(N²)` sum over `p + q = k`.
pub fn direct_convolution(
    u: &SpectralVelocityField,
    v: &SpectralVelocityField,
) -> BTreeMap<[i32; 3], V3> {
    let d = *u.domain();
    let um: Vec<_> = u.modes_full().collect();
    let vm: Vec<_> = v.modes_full().collect();
    let mut out: BTreeMap<[i32; 3], V3> = BTreeMap::new();
    for (p, up) in &um {
        for (q, vq) in &vm {
            let kq = d.wavenumber(*q);
            let adv: Complex64 = (0..3).map(|j| up[j] * Complex64::new(0.0, kq[j])).sum();
            let k = [p.0[0] + q.0[0], p.0[1] + q.0[1], p.0[2] + q.0[2]];
            let e = out.entry(k).or_insert([ZERO; 3]);
            for c in 0..3 {
                e[c] += adv * vq[c];
            }
        }
    }
    out.remove(&[0, 0, 0]);
    for (k, a) in out.iter_mut() {
        let kt = d.wavenumber(WaveVector(*k));
        let k2: f64 = kt.iter().map(|x| x * x).sum();
        let dot: Complex64 = (0..3).map(|j| a[j] * kt[j]).sum();
        for j in 0..3 {
            a[j] -= dot * (kt[j] / k2);
        }
    }
    out
}

pub fn norm3(a: &V3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Values of `u` (and optionally of one derivative `∂_j`) at the points of an
/// `n³` uniform grid, by direct summation of the Fourier series.
pub fn physical_direct(
    u: &SpectralVelocityField,
    n: usize,
    derivative: Option<usize>,
) -> Vec<[f64; 3]> {
    let d = *u.domain();
    let modes: Vec<_> = u.modes_full().collect();
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let x = [
                    d.periods[0] * a as f64 / n as f64,
                    d.periods[1] * b as f64 / n as f64,
                    d.periods[2] * c as f64 / n as f64,
                ];
                let mut val = [ZERO; 3];
                for (k, uk) in &modes {
                    let kt = d.wavenumber(*k);
                    let phase = kt[0] * x[0] + kt[1] * x[1] + kt[2] * x[2];
                    let mut e = Complex64::from_polar(1.0, phase);
                    if let Some(j) = derivative {
                        e *= Complex64::new(0.0, kt[j]);
                    }
                    for i in 0..3 {
                        val[i] += uk[i] * e;
                    }
                }
                out.push([val[0].re, val[1].re, val[2].re]);
            }
        }
    }
    out
}

/// `∫ |u|²` by the uniform-grid rule, exact for trigonometric polynomials
/// of degree `< n` per axis.
pub fn l2_sqr_direct(u: &SpectralVelocityField, n: usize) -> f64 {
    let vals = physical_direct(u, n, None);
    let w = u.domain().volume() / vals.len() as f64;
    vals.iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        * w
}

/// `∫ (u·∇)v · w` by direct physical summation on an `n³` grid.
pub fn trilinear_direct(
    u: &SpectralVelocityField,
    v: &SpectralVelocityField,
    w: &SpectralVelocityField,
    n: usize,
) -> f64 {
    let uu = physical_direct(u, n, None);
    let ww = physical_direct(w, n, None);
    let dv: Vec<Vec<[f64; 3]>> = (0..3).map(|j| physical_direct(v, n, Some(j))).collect();
    let vol = u.domain().volume() / uu.len() as f64;
    let mut s = 0.0;
    for p in 0..uu.len() {
        for c in 0..3 {
            let adv: f64 = (0..3).map(|j| uu[p][j] * dv[j][p][c]).sum();
            s += adv * ww[p][c];
        }
    }
    s * vol
}

/// Outcome of integrating the scalar equality ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeOutcome {
    Finite(f64),
    /// First step time at which `y` exceeded the escape level.
    Escaped(f64),
}

/// Oracle steps per horizon.
pub const ODE_STEPS: usize = 10_000;

/// A problem with `η = target` and δ constant on `pieces` equal intervals.
///
/// δ is sampled at the breakpoints; on each interval the oracle uses the
/// larger endpoint value, which is what the conservative rule integrates.
pub fn piecewise_case(
    rng: &mut ChaCha8Rng,
    n: f64,
    alpha: f64,
    horizon: f64,
    target: f64,
) -> (OdeBoundProblem, Vec<f64>) {
    let pieces = [1usize, 2, 4, 5, 8, 10][rng.random_range(0..6)];
    let share: f64 = rng.random_range(0.0..1.0);
    let raw: Vec<f64> = (0..=pieces).map(|_| rng.random_range(0.0..1.0)).collect();
    let per_piece: Vec<f64> = raw.windows(2).map(|w| w[0].max(w[1])).collect();
    let integral: f64 = per_piece.iter().sum::<f64>() * horizon / pieces as f64;
    let scale = (1.0 - share) * target / integral;
    let delta = raw
        .iter()
        .enumerate()
        .map(|(i, d)| (horizon * i as f64 / pieces as f64, d * scale))
        .collect();
    let problem = OdeBoundProblem {
        y0: share * target,
        alpha,
        n_exp: n,
        horizon,
        delta,
    };
    let steps_per_piece = ODE_STEPS / pieces;
    let on_step = per_piece
        .iter()
        .flat_map(|d| std::iter::repeat_n(d * scale, steps_per_piece))
        .collect();
    (problem, on_step)
}

/// Classical RK4 for `ẏ = δ + α yⁿ` with `δ` constant on each step.
///
/// `delta_on(i)` gives the value on step `i`.
pub fn rk4_equality(
    y0: f64,
    alpha: f64,
    n: f64,
    horizon: f64,
    steps: usize,
    escape: f64,
    delta_on: impl Fn(usize) -> f64,
) -> OdeOutcome {
    let h = horizon / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        let d = delta_on(i);
        let f = |y: f64| d + alpha * y.max(0.0).powf(n);
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !y.is_finite() || y > escape {
            return OdeOutcome::Escaped((i + 1) as f64 * h);
        }
    }
    OdeOutcome::Finite(y)
}

/// `(1/27)^{1/4} / (72·2^{3/4})` evaluated directly.
pub fn zero_data_margin() -> f64 {
    (1.0f64 / 27.0).powf(0.25) / (72.0 * 2.0f64.powf(0.75))
}

/// Structural checks on every stored state of a Galerkin trajectory:
/// incompressibility, orthogonality of the residual to the Galerkin range
/// and, for unforced data, the energy equality.
pub fn check_every_step(
    traj: &ns_certify::trajectory::Trajectory,
    data: &ns_certify::galerkin::ProblemData,
    cutoff: f64,
) -> Result<(), String> {
    for (s, u) in traj.samples.iter().zip(&traj.states) {
        for (k, v) in u.modes() {
            let kt = u.domain().wavenumber(*k);
            let dot: Complex64 = (0..3).map(|j| v[j] * kt[j]).sum();
            if dot.norm() > 1e-12 * norm3(v) {
                return Err(format!("divergence at t = {}", s.t));
            }
        }
        let r = ns_certify::galerkin::residual(u, &data.forcing_at(s.t), cutoff)
            .map_err(|e| e.to_string())?;
        let pr = r.galerkin_project(cutoff).sobolev_norm(0.0);
        if pr > 1e-10 * (1.0 + r.sobolev_norm(0.0)) {
            return Err(format!("residual not orthogonal at t = {}: {pr:e}", s.t));
        }
    }
    if data.forcing.is_zero() {
        let t = traj.times();
        let dissipation: Vec<f64> = traj.column(|s| s.h1 * s.h1);
        let integral = ns_certify::quadrature::integrate(
            &t,
            &dissipation,
            ns_certify::quadrature::QuadratureMode::Trapezoid,
        )
        .map_err(|e| e.to_string())?;
        let e0 = traj.samples[0].l2.powi(2);
        let et = traj.samples.last().unwrap().l2.powi(2);
        let defect = (et + 2.0 * data.nu * integral - e0).abs();
        if defect > 1e-6 * e0 {
            return Err(format!("energy defect {defect:e} against {e0:e}"));
        }
    }
    Ok(())
}
