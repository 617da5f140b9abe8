//! Boundedness of solutions of the scalar differential inequality
//!
//! ```text
//! dy/dt ≤ δ(t) + α yⁿ,   y(0) = y₀,   t ∈ [0, T]
//! ```
//!
//! With `η = y₀ + ∫₀ᵀ δ`, every solution stays bounded on `[0, T]` as soon as
//! `η < [(n−1)αT]^{−1/(n−1)}`, and then
//!
//! ```text
//! y(t) ≤ η / (1 − αT(n−1)η^{n−1})^{1/(n−1)}.
//! ```
//!
//! Failing the threshold proves nothing, so [`check`] answers
//! [`OdeVerdict::Inconclusive`] rather than claiming blow-up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureMode};

/// Data of one boundedness question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeBoundProblem {
    pub y0: f64,
    pub alpha: f64,
    pub n_exp: f64,
    pub horizon: f64,
    /// Samples `(tᵢ, δᵢ)` with `t₀ = 0` and `t_last = horizon`.
    pub delta: Vec<(f64, f64)>,
}

/// Outcome of [`envelope_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Envelope {
    Bounded(f64),
    Blowup,
}

/// Outcome of [`check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum OdeVerdict {
    Bounded(f64),
    Inconclusive,
}

impl OdeBoundProblem {
    /// Problem with constant `δ ≡ value` sampled at the two endpoints.
    pub fn with_constant_delta(y0: f64, alpha: f64, n_exp: f64, horizon: f64, value: f64) -> Self {
        Self {
            y0,
            alpha,
            n_exp,
            horizon,
            delta: vec![(0.0, value), (horizon, value)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y0 >= 0.0 && self.y0.is_finite()) {
            return Err(Error::input("y0 must be finite and nonnegative"));
        }
        check_params(self.alpha, self.n_exp, self.horizon)?;
        let (times, values): (Vec<f64>, Vec<f64>) = self.delta.iter().copied().unzip();
        quadrature::check_grid(&times, &values)?;
        if times.len() < 2 {
            return Err(Error::input("delta needs at least two samples"));
        }
        if values.iter().any(|&d| d < 0.0) {
            return Err(Error::input("delta samples must be nonnegative"));
        }
        let tol = 1e-12 * self.horizon;
        if times[0].abs() > tol || (times[times.len() - 1] - self.horizon).abs() > tol {
            return Err(Error::input("delta samples must span [0, T]"));
        }
        Ok(())
    }
}

fn check_params(alpha: f64, n_exp: f64, horizon: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::input("alpha must be positive"));
    }
    if !(n_exp > 1.0 && n_exp.is_finite()) {
        return Err(Error::input("exponent n must exceed 1"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::input("horizon must be positive"));
    }
    Ok(())
}

/// `η = y₀ + ∫₀ᵀ δ`.
pub fn eta(problem: &OdeBoundProblem, mode: QuadratureMode) -> Result<f64> {
    problem.validate()?;
    let (times, values): (Vec<f64>, Vec<f64>) = problem.delta.iter().copied().unzip();
    Ok(problem.y0 + quadrature::integrate(&times, &values, mode)?)
}

/// Largest `η` for which the lemma guarantees boundedness (exclusive).
pub fn boundedness_threshold(alpha: f64, n_exp: f64, horizon: f64) -> Result<f64> {
    check_params(alpha, n_exp, horizon)?;
    Ok(((n_exp - 1.0) * alpha * horizon).powf(-1.0 / (n_exp - 1.0)))
}

/// Value at `T` of the comparison solution `ż = αzⁿ`, `z(0) = η`.
pub fn envelope_bound(eta_val: f64, alpha: f64, n_exp: f64, horizon: f64) -> Result<Envelope> {
    check_params(alpha, n_exp, horizon)?;
    if !(eta_val >= 0.0 && eta_val.is_finite()) {
        return Err(Error::input("eta must be finite and nonnegative"));
    }
    let q = alpha * horizon * (n_exp - 1.0) * eta_val.powf(n_exp - 1.0);
    if q < 1.0 {
        Ok(Envelope::Bounded(
            eta_val / (1.0 - q).powf(1.0 / (n_exp - 1.0)),
        ))
    } else {
        Ok(Envelope::Blowup)
    }
}

/// Applies the lemma to `problem`.
pub fn check(problem: &OdeBoundProblem, mode: QuadratureMode) -> Result<OdeVerdict> {
    let eta_val = eta(problem, mode)?;
    let threshold = boundedness_threshold(problem.alpha, problem.n_exp, problem.horizon)?;
    if eta_val >= threshold {
        return Ok(OdeVerdict::Inconclusive);
    }
    match envelope_bound(eta_val, problem.alpha, problem.n_exp, problem.horizon)? {
        Envelope::Bounded(v) => Ok(OdeVerdict::Bounded(v)),
        // Only reachable through rounding right at the threshold.
        Envelope::Blowup => Ok(OdeVerdict::Inconclusive),
    }
}

/// Serializable summary written by the `ode` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub eta: f64,
    pub threshold: f64,
    pub verdict: OdeVerdict,
    pub quadrature_mode: QuadratureMode,
}

pub fn report(problem: &OdeBoundProblem, mode: QuadratureMode) -> Result<OdeReport> {
    Ok(OdeReport {
        eta: eta(problem, mode)?,
        threshold: boundedness_threshold(problem.alpha, problem.n_exp, problem.horizon)?,
        verdict: check(problem, mode)?,
        quadrature_mode: mode,
    })
}
