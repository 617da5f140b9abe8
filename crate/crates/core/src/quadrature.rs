//! Time quadrature over sampled integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an integral over sampled data is approximated.
///
/// `Conservative` uses the upper sum `Σ max(f_i, f_{i+1}) Δt_i`, which is never
/// smaller than the trapezoid value. Every certificate integral is arranged so
/// that over-estimating it can only make verification harder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureMode {
    #[default]
    Trapezoid,
    Conservative,
}

impl QuadratureMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuadratureMode::Trapezoid => "trapezoid",
            QuadratureMode::Conservative => "conservative",
        }
    }
}

impl std::str::FromStr for QuadratureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" => Ok(QuadratureMode::Trapezoid),
            "conservative" => Ok(QuadratureMode::Conservative),
            other => Err(Error::input(format!("unknown quadrature mode '{other}'"))),
        }
    }
}

/// Checks that `times` is a strictly increasing grid of finite values matching `values`.
pub fn check_grid(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::input(format!(
            "sample grid has {} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.is_empty() {
        return Err(Error::input("empty sample grid"));
    }
    if times.iter().chain(values).any(|x| !x.is_finite()) {
        return Err(Error::input("non-finite sample"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("sample times must be strictly increasing"));
    }
    Ok(())
}

/// Integrates sampled values over the span of `times`.
pub fn integrate(times: &[f64], values: &[f64], mode: QuadratureMode) -> Result<f64> {
    check_grid(times, values)?;
    let total = times
        .windows(2)
        .zip(values.windows(2))
        .fold(0.0, |acc, (t, f)| {
            let dt = t[1] - t[0];
            acc + match mode {
                QuadratureMode::Trapezoid => 0.5 * (f[0] + f[1]) * dt,
                QuadratureMode::Conservative => f[0].max(f[1]) * dt,
            }
        });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear_data() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let f: Vec<f64> = t.iter().map(|t| 3.0 * t + 1.0).collect();
        let v = integrate(&t, &f, QuadratureMode::Trapezoid).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn conservative_dominates_trapezoid() {
        let t = [0.0, 0.3, 0.5, 1.0];
        let f = [1.0, 4.0, 0.5, 2.0];
        let a = integrate(&t, &f, QuadratureMode::Trapezoid).unwrap();
        let b = integrate(&t, &f, QuadratureMode::Conservative).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(integrate(&[], &[], QuadratureMode::Trapezoid).is_err());
        assert!(integrate(&[0.0, 0.0], &[1.0, 1.0], QuadratureMode::Trapezoid).is_err());
        assert!(integrate(&[0.0, 1.0], &[1.0], QuadratureMode::Trapezoid).is_err());
        assert!(integrate(&[0.0, 1.0], &[1.0, f64::NAN], QuadratureMode::Trapezoid).is_err());
    }
}
