//! Time integration of the Galerkin system
//!
//! ```text
//! du_n/dt + ν A u_n + P_n B(u_n, u_n) = P_n f(t),    u_n(0) = P_n u₀
//! ```
//!
//! The viscous term is integrated exactly through the factor `e^{−νλ_k t}`
//! (Lawson/integrating-factor RK4); a first-order IMEX Euler scheme is
//! available for comparison. At every stored sample the residual
//!
//! ```text
//! du_n/dt + νAu_n + B(u_n,u_n) − f = Q_n [B(u_n,u_n) − f]
//! ```
//!
//! is evaluated from the state alone, with `B` exact on its full support, so
//! no time differencing enters the certificate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::trajectory::{NormSample, Trajectory};
use crate::transform::{nonlinear_full, nonlinear_term};

/// Scalar time profile multiplying one forcing term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TimeEnvelope {
    Constant,
    /// `cos(ω t + φ)`.
    Cosine {
        omega: f64,
        phase: f64,
    },
    /// `e^{−rate·t}`.
    Exponential {
        rate: f64,
    },
}

impl TimeEnvelope {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TimeEnvelope::Constant => 1.0,
            TimeEnvelope::Cosine { omega, phase } => (omega * t + phase).cos(),
            TimeEnvelope::Exponential { rate } => (-rate * t).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTerm {
    pub field: SpectralVelocityField,
    pub envelope: TimeEnvelope,
}

/// `f(t) = Σ_i e_i(t) f_i`; an empty sum is `f ≡ 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Forcing {
    pub terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(field: SpectralVelocityField) -> Self {
        Self {
            terms: vec![ForcingTerm {
                field,
                envelope: TimeEnvelope::Constant,
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.field.is_empty())
    }

    pub fn at(&self, t: f64, domain: &crate::field::DomainSpec) -> SpectralVelocityField {
        let mut out = SpectralVelocityField::zero(*domain, 0.0);
        for term in &self.terms {
            out = out
                .axpy(term.envelope.at(t), &term.field)
                .expect("forcing terms share the domain");
        }
        out
    }

    fn projected(&self, cutoff: f64) -> Forcing {
        Forcing {
            terms: self
                .terms
                .iter()
                .map(|t| ForcingTerm {
                    field: t.field.galerkin_project(cutoff),
                    envelope: t.envelope,
                })
                .collect(),
        }
    }
}

/// Initial condition, forcing, viscosity and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub u0: SpectralVelocityField,
    pub forcing: Forcing,
    pub nu: f64,
    pub horizon: f64,
}

impl ProblemData {
    pub fn unforced(u0: SpectralVelocityField, nu: f64, horizon: f64) -> Self {
        Self {
            u0,
            forcing: Forcing::zero(),
            nu,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::input("viscosity must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::input("horizon must be positive"));
        }
        self.u0.check_invariants()?;
        for t in &self.forcing.terms {
            self.u0.domain().ensure_same(t.field.domain())?;
            t.field.check_invariants()?;
        }
        Ok(())
    }

    pub fn forcing_at(&self, t: f64) -> SpectralVelocityField {
        self.forcing.at(t, self.u0.domain())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Integrating-factor fourth-order Runge–Kutta.
    #[default]
    IfRk4,
    /// Implicit viscous term, explicit nonlinearity, first order.
    ImexEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Eigenvalue cutoff `Λ` defining `P_n`.
    pub cutoff: f64,
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn one() -> usize {
    1
}

impl SolverConfig {
    pub fn new(cutoff: f64, dt: f64) -> Self {
        Self {
            cutoff,
            dt,
            scheme: Scheme::IfRk4,
            sample_stride: 1,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::input("cutoff must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= horizon * (1.0 + 1e-12)) {
            return Err(Error::input("time step must lie in (0, T]"));
        }
        if self.sample_stride == 0 {
            return Err(Error::input("sample stride must be at least 1"));
        }
        Ok(())
    }
}

/// `Q_n [B(state, state) − f_t]`, with `B` exact on its full support.
pub fn residual(
    state: &SpectralVelocityField,
    f_t: &SpectralVelocityField,
    cutoff: f64,
) -> Result<SpectralVelocityField> {
    state.domain().ensure_same(f_t.domain())?;
    if state.max_eigenvalue() > cutoff * (1.0 + 1e-12) {
        return Err(Error::input(
            "state is not supported within the Galerkin range",
        ));
    }
    let b = nonlinear_full(state);
    Ok(b.sub(f_t)?.tail_project(cutoff))
}

fn sample(
    state: &SpectralVelocityField,
    t: f64,
    data: &ProblemData,
    cutoff: f64,
) -> Result<NormSample> {
    let r = residual(state, &data.forcing_at(t), cutoff)?;
    Ok(NormSample {
        t,
        l2: state.sobolev_norm(0.0),
        h1: state.sobolev_norm(1.0),
        h2: state.sobolev_norm(2.0),
        h3: Some(state.sobolev_norm(3.0)),
        res_h1: Some(r.sobolev_norm(1.0)),
        res_h2: Some(r.sobolev_norm(2.0)),
    })
}

struct Stepper<'a> {
    nu: f64,
    cutoff: f64,
    forcing: Forcing,
    domain: &'a crate::field::DomainSpec,
}

impl Stepper<'_> {
    /// `P_n [f(t) − B(u,u)]`.
    fn rhs(&self, u: &SpectralVelocityField, t: f64) -> Result<SpectralVelocityField> {
        let b = nonlinear_term(u, u, self.cutoff)?;
        self.forcing
            .at(t, self.domain)
            .sub(&b)
            .map(|x| x.with_cutoff_unchecked(self.cutoff))
    }

    fn decay(&self, u: &SpectralVelocityField, h: f64) -> SpectralVelocityField {
        let nu = self.nu;
        u.scale_by_eigenvalue(|lam| (-nu * lam * h).exp())
    }

    fn if_rk4(&self, u: &SpectralVelocityField, t: f64, h: f64) -> Result<SpectralVelocityField> {
        let half = 0.5 * h;
        let k1 = self.rhs(u, t)?;
        let a = self.decay(&u.axpy(half, &k1)?, half);
        let k2 = self.rhs(&a, t + half)?;
        let eu_half = self.decay(u, half);
        let b = eu_half.axpy(half, &k2)?;
        let k3 = self.rhs(&b, t + half)?;
        let c = self.decay(u, h).axpy(h, &self.decay(&k3, half))?;
        let k4 = self.rhs(&c, t + h)?;
        let mid = self.decay(&k2.add(&k3)?, half);
        self.decay(u, h)
            .axpy(h / 6.0, &self.decay(&k1, h))?
            .axpy(h / 3.0, &mid)?
            .axpy(h / 6.0, &k4)
    }

    fn imex_euler(
        &self,
        u: &SpectralVelocityField,
        t: f64,
        h: f64,
    ) -> Result<SpectralVelocityField> {
        let n = self.rhs(u, t)?;
        let nu = self.nu;
        Ok(u.axpy(h, &n)?
            .scale_by_eigenvalue(|lam| 1.0 / (1.0 + nu * lam * h)))
    }
}

impl SpectralVelocityField {
    pub(crate) fn with_cutoff_unchecked(self, cutoff: f64) -> Self {
        let d = *self.domain();
        let coeffs = self.modes().map(|(k, v)| (*k, *v)).collect();
        SpectralVelocityField::from_parts_unchecked(d, cutoff, coeffs)
    }

    fn is_finite(&self) -> bool {
        self.modes()
            .all(|(_, v)| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// Integrates the Galerkin system on `[0, T]`.
///
/// The step is shrunk to `T / ⌈T/dt⌉` so the last step lands on `T`. Samples
/// are stored every `sample_stride` steps and always at `T`.
pub fn integrate(data: &ProblemData, config: &SolverConfig) -> Result<Trajectory> {
    data.validate()?;
    config.validate(data.horizon)?;
    let domain = *data.u0.domain();
    let cutoff = config.cutoff;
    let steps = ((data.horizon / config.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = data.horizon / steps as f64;
    let stepper = Stepper {
        nu: data.nu,
        cutoff,
        forcing: data.forcing.projected(cutoff),
        domain: &domain,
    };

    let mut state = data.u0.galerkin_project(cutoff);
    let initial_state = state.clone();
    let mut samples = vec![sample(&state, 0.0, data, cutoff)?];
    let mut states = vec![state.clone()];
    for i in 0..steps {
        let t = i as f64 * h;
        let t_next = if i + 1 == steps {
            data.horizon
        } else {
            (i + 1) as f64 * h
        };
        state = match config.scheme {
            Scheme::IfRk4 => stepper.if_rk4(&state, t, h)?,
            Scheme::ImexEuler => stepper.imex_euler(&state, t, h)?,
        };
        if !state.is_finite() {
            return Err(Error::Divergence { time: t_next });
        }
        if (i + 1) % config.sample_stride == 0 || i + 1 == steps {
            samples.push(sample(&state, t_next, data, cutoff)?);
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        samples,
        states,
        initial_state,
    })
}

/// One row of a cutoff sweep: `sup_t ‖u_hi(t) − u_lo(t)‖_m` for `m = 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cutoff_lo: f64,
    pub cutoff_hi: f64,
    pub sup_h1: f64,
    pub sup_h2: f64,
}

/// Integrates at every cutoff, in parallel.
pub fn integrate_many(
    data: &ProblemData,
    cutoffs: &[f64],
    config: &SolverConfig,
) -> Result<Vec<Trajectory>> {
    cutoffs
        .par_iter()
        .map(|&cutoff| integrate(data, &SolverConfig { cutoff, ..*config }))
        .collect()
}

/// Compares consecutive runs of a sweep on their common sample times.
pub fn compare_runs(cutoffs: &[f64], runs: &[Trajectory]) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for (i, pair) in runs.windows(2).enumerate() {
        let (lo, hi) = (&pair[0], &pair[1]);
        let (mut sup_h1, mut sup_h2) = (0.0f64, 0.0f64);
        let mut j = 0;
        for (a, sa) in lo.states.iter().zip(&lo.samples) {
            while j < hi.samples.len() && hi.samples[j].t < sa.t - 1e-12 {
                j += 1;
            }
            if j == hi.samples.len() || (hi.samples[j].t - sa.t).abs() > 1e-12 {
                continue;
            }
            let d = hi.states[j].sub(a)?;
            sup_h1 = sup_h1.max(d.sobolev_norm(1.0));
            sup_h2 = sup_h2.max(d.sobolev_norm(2.0));
        }
        rows.push(ConvergenceRow {
            cutoff_lo: cutoffs[i],
            cutoff_hi: cutoffs[i + 1],
            sup_h1,
            sup_h2,
        });
    }
    Ok(rows)
}

fn check_cutoffs(cutoffs: &[f64]) -> Result<()> {
    if cutoffs.len() < 2 {
        return Err(Error::input(
            "a convergence study needs at least two cutoffs",
        ));
    }
    if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("cutoffs must be increasing"));
    }
    Ok(())
}

/// `sup_t ‖u_{Λ_{i+1}} − u_{Λ_i}‖_m`, `m = 1, 2`, for consecutive cutoffs.
pub fn convergence_study(
    data: &ProblemData,
    cutoffs: &[f64],
    config: &SolverConfig,
) -> Result<Vec<ConvergenceRow>> {
    check_cutoffs(cutoffs)?;
    compare_runs(cutoffs, &integrate_many(data, cutoffs, config)?)
}

/// Runs and comparison table of a sweep.
pub fn sweep(
    data: &ProblemData,
    cutoffs: &[f64],
    config: &SolverConfig,
) -> Result<(Vec<Trajectory>, Vec<ConvergenceRow>)> {
    check_cutoffs(cutoffs)?;
    let runs = integrate_many(data, cutoffs, config)?;
    let rows = compare_runs(cutoffs, &runs)?;
    Ok((runs, rows))
}
