//! Certificate checks for strong-solution existence.
//!
//! Every check compares an initial-deviation-plus-integrated-defect `lhs`
//! against an explicit threshold `rhs`:
//!
//! | kind                 | lhs                                   | rhs                                                  |
//! |----------------------|---------------------------------------|------------------------------------------------------|
//! | `minimal-aposteriori`| `\|D(v₀−u₀)\| + ∫‖r‖₁`                 | `(1/k)(ν³/27T)^{1/4} exp(−(k²/2) I)`                  |
//! | `second-aposteriori` | `‖v₀−u₀‖₂ + ∫‖r‖₂`                     | `(1/c)(2ν/T)^{1/2} exp(−∫(c+c′)‖v‖₃)`                 |
//! | `minimal-robustness` | `\|D(u₀−v₀)\| + ∫\|D(f−g)\|`            | as `minimal-aposteriori`, on the reference solution   |
//! | `second-robustness`  | `\|A(u₀−v₀)\| + ∫\|A(f−g)\|`            | as `second-aposteriori`, on the reference solution    |
//!
//! with `I = ∫ [(27k²/2) ν⁻³ |Du|⁴ + ν⁻¹ |Du||Au|] ds`. The a-posteriori
//! checks evaluate the exponent on the approximation's own norms. All time
//! integrals use the trajectory's sample grid.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field_io::write_field_string;
use crate::galerkin::{Forcing, ProblemData};
use crate::inequality::ConstantTable;
use crate::quadrature::{integrate, QuadratureMode};
use crate::trajectory::{check_span, NormSample, Trajectory};

pub const REPORT_SCHEMA: &str = "ns-certify-report/1";

/// Relative input perturbation used for the rounding-sensitivity estimate.
pub const ROUNDING_PERTURBATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    MinimalAposteriori,
    SecondAposteriori,
    MinimalRobustness,
    SecondRobustness,
}

impl ReportKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportKind::MinimalAposteriori => "minimal-aposteriori",
            ReportKind::SecondAposteriori => "second-aposteriori",
            ReportKind::MinimalRobustness => "minimal-robustness",
            ReportKind::SecondRobustness => "second-robustness",
        }
    }

    fn is_minimal(&self) -> bool {
        matches!(
            self,
            ReportKind::MinimalAposteriori | ReportKind::MinimalRobustness
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    NotVerified,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        if margin > 0.0 {
            Verdict::Verified
        } else {
            Verdict::NotVerified
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub kind: ReportKind,
    pub lhs: f64,
    pub rhs: f64,
    pub exponent_integral: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub quadrature_mode: QuadratureMode,
    pub constants: ConstantTable,
    pub nu: f64,
    pub horizon: f64,
    pub cutoff: f64,
    pub inputs_digest: String,
    /// `|Δmargin|` when every input is nudged by a relative `10⁻¹²` towards
    /// failure.
    pub rounding_sensitivity: f64,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Threshold value and the integral inside its exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub rhs: f64,
    pub exponent_integral: f64,
}

fn check_physics(nu: f64, horizon: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::input("viscosity must be positive"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::input("horizon must be positive"));
    }
    Ok(())
}

/// `(1/k)(ν³/27T)^{1/4} exp(−(k²/2) I)` for a given exponent integral `I`.
pub fn minimal_threshold(exponent_integral: f64, nu: f64, horizon: f64, k: f64) -> f64 {
    (nu.powi(3) / (27.0 * horizon)).powf(0.25) / k * (-0.5 * k * k * exponent_integral).exp()
}

/// `(1/c)(2ν/T)^{1/2} exp(−E)`.
pub fn second_threshold(exponent_integral: f64, nu: f64, horizon: f64, c: f64) -> f64 {
    (2.0 * nu / horizon).sqrt() / c * (-exponent_integral).exp()
}

/// `I = ∫ [(27k²/2) ν⁻³ |Du|⁴ + ν⁻¹ |Du||Au|]` over sampled `|Du|`, `|Au|`.
pub fn minimal_exponent(
    times: &[f64],
    h1: &[f64],
    h2: &[f64],
    nu: f64,
    k: f64,
    mode: QuadratureMode,
) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(Error::input("norm series differ in length"));
    }
    let a = 13.5 * k * k / nu.powi(3);
    let integrand: Vec<f64> = h1
        .iter()
        .zip(h2)
        .map(|(&d, &s)| a * d.powi(4) + d * s / nu)
        .collect();
    integrate(times, &integrand, mode)
}

/// Threshold of the minimal check from sampled `|Du|`, `|Au|`.
pub fn minimal_threshold_from_samples(
    samples: &[NormSample],
    nu: f64,
    horizon: f64,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<Threshold> {
    check_physics(nu, horizon)?;
    constants.validate()?;
    check_span(samples, horizon)?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let h1: Vec<f64> = samples.iter().map(|s| s.h1).collect();
    let h2: Vec<f64> = samples.iter().map(|s| s.h2).collect();
    let exponent_integral = minimal_exponent(&times, &h1, &h2, nu, constants.k_tri, mode)?;
    Ok(Threshold {
        rhs: minimal_threshold(exponent_integral, nu, horizon, constants.k_tri),
        exponent_integral,
    })
}

/// Threshold of the second-order check from sampled `‖u‖₃`.
pub fn second_threshold_from_samples(
    samples: &[NormSample],
    nu: f64,
    horizon: f64,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<Threshold> {
    check_physics(nu, horizon)?;
    constants.validate()?;
    let (c, c_prime) = constants.second_order()?;
    check_span(samples, horizon)?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let integrand: Vec<f64> = samples
        .iter()
        .map(|s| {
            s.h3.map(|x| (c + c_prime) * x)
                .ok_or_else(|| Error::input("trajectory lacks the norm3_u column"))
        })
        .collect::<Result<_>>()?;
    let exponent_integral = integrate(&times, &integrand, mode)?;
    Ok(Threshold {
        rhs: second_threshold(exponent_integral, nu, horizon, c),
        exponent_integral,
    })
}

pub fn minimal_rhs(
    traj: &Trajectory,
    nu: f64,
    horizon: f64,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<f64> {
    minimal_threshold_from_samples(&traj.samples, nu, horizon, constants, mode).map(|t| t.rhs)
}

pub fn second_rhs(
    traj: &Trajectory,
    nu: f64,
    horizon: f64,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<f64> {
    second_threshold_from_samples(&traj.samples, nu, horizon, constants, mode).map(|t| t.rhs)
}

fn initial_deviation(traj: &Trajectory, data: &ProblemData, m: f64) -> Result<f64> {
    Ok(traj.initial_state.sub(&data.u0)?.sobolev_norm(m))
}

/// `|D(v(0) − u₀)| + ∫ ‖r‖₁`.
pub fn minimal_lhs_aposteriori(
    traj: &Trajectory,
    data: &ProblemData,
    mode: QuadratureMode,
) -> Result<f64> {
    traj.check_span(data.horizon)?;
    let r = traj.optional_column("norm1_r", |s| s.res_h1)?;
    Ok(initial_deviation(traj, data, 1.0)? + integrate(&traj.times(), &r, mode)?)
}

/// `‖v(0) − u₀‖₂ + ∫ ‖r‖₂`, first term unsquared.
pub fn second_lhs_aposteriori(
    traj: &Trajectory,
    data: &ProblemData,
    mode: QuadratureMode,
) -> Result<f64> {
    traj.check_span(data.horizon)?;
    let r = traj.optional_column("norm2_r", |s| s.res_h2)?;
    Ok(initial_deviation(traj, data, 2.0)? + integrate(&traj.times(), &r, mode)?)
}

/// `‖u₀ − v₀‖_m + ∫ ‖f − g‖_m` with the forcing difference sampled on `times`.
pub fn perturbation_size(
    base: &ProblemData,
    pert: &ProblemData,
    times: &[f64],
    m: f64,
    mode: QuadratureMode,
) -> Result<f64> {
    base.u0.domain().ensure_same(pert.u0.domain())?;
    let initial = base.u0.sub(&pert.u0)?.sobolev_norm(m);
    let values: Vec<f64> = times
        .iter()
        .map(|&t| Ok(base.forcing_at(t).sub(&pert.forcing_at(t))?.sobolev_norm(m)))
        .collect::<Result<_>>()?;
    Ok(initial + integrate(times, &values, mode)?)
}

struct Inputs<'a> {
    kind: ReportKind,
    samples: &'a [NormSample],
    cutoff: f64,
    nu: f64,
    horizon: f64,
    constants: &'a ConstantTable,
    mode: QuadratureMode,
    digest: String,
}

fn hash_forcing(h: &mut Sha256, f: &Forcing) {
    h.update(format!("forcing {}\n", f.terms.len()));
    for t in &f.terms {
        h.update(serde_json::to_string(&t.envelope).expect("envelope serializes"));
        h.update(write_field_string(&t.field));
    }
}

fn hash_data(h: &mut Sha256, d: &ProblemData) {
    h.update(format!("nu {:e} horizon {:e}\n", d.nu, d.horizon));
    h.update(write_field_string(&d.u0));
    hash_forcing(h, &d.forcing);
}

fn digest_header(kind: ReportKind, mode: QuadratureMode, constants: &ConstantTable) -> Sha256 {
    let mut h = Sha256::new();
    h.update(REPORT_SCHEMA);
    h.update(kind.as_str());
    h.update(mode.as_str());
    h.update(serde_json::to_string(constants).expect("constants serialize"));
    h
}

fn trajectory_digest(
    kind: ReportKind,
    mode: QuadratureMode,
    constants: &ConstantTable,
    traj: &Trajectory,
    data: &ProblemData,
    pert: Option<&ProblemData>,
) -> Result<String> {
    let mut h = digest_header(kind, mode, constants);
    h.update(traj.to_csv_string()?);
    h.update(write_field_string(&traj.initial_state));
    hash_data(&mut h, data);
    if let Some(p) = pert {
        h.update("perturbed");
        hash_data(&mut h, p);
    }
    Ok(hex::encode(h.finalize()))
}

impl<'a> Inputs<'a> {
    fn for_trajectory(
        kind: ReportKind,
        traj: &'a Trajectory,
        data: &ProblemData,
        constants: &'a ConstantTable,
        mode: QuadratureMode,
        digest: String,
    ) -> Self {
        Self {
            kind,
            samples: &traj.samples,
            cutoff: traj.cutoff(),
            nu: data.nu,
            horizon: data.horizon,
            constants,
            mode,
            digest,
        }
    }

    fn threshold(&self, nu: f64, horizon: f64) -> Result<Threshold> {
        if self.kind.is_minimal() {
            minimal_threshold_from_samples(self.samples, nu, horizon, self.constants, self.mode)
        } else {
            second_threshold_from_samples(self.samples, nu, horizon, self.constants, self.mode)
        }
    }

    fn rhs_at(&self, exponent_integral: f64, nu: f64, horizon: f64) -> Result<f64> {
        Ok(if self.kind.is_minimal() {
            minimal_threshold(exponent_integral, nu, horizon, self.constants.k_tri)
        } else {
            second_threshold(
                exponent_integral,
                nu,
                horizon,
                self.constants.second_order()?.0,
            )
        })
    }

    fn report(self, lhs: f64, notes: Vec<String>) -> Result<VerificationReport> {
        let (nu, horizon) = (self.nu, self.horizon);
        let th = self.threshold(nu, horizon)?;
        let margin = th.rhs - lhs;
        let e = ROUNDING_PERTURBATION;
        let nudged = self.rhs_at(
            th.exponent_integral * (1.0 + e),
            nu * (1.0 - e),
            horizon * (1.0 + e),
        )? - lhs * (1.0 + e);
        Ok(VerificationReport {
            schema_version: REPORT_SCHEMA.to_string(),
            kind: self.kind,
            lhs,
            rhs: th.rhs,
            exponent_integral: th.exponent_integral,
            margin,
            verdict: Verdict::from_margin(margin),
            quadrature_mode: self.mode,
            constants: *self.constants,
            nu,
            horizon,
            cutoff: self.cutoff,
            inputs_digest: self.digest,
            rounding_sensitivity: (margin - nudged).abs(),
            notes,
        })
    }
}

fn aposteriori_notes(kind: ReportKind) -> Vec<String> {
    let mut notes =
        vec!["threshold exponent evaluated on the approximation's own norms".to_string()];
    if kind == ReportKind::SecondAposteriori {
        notes.push("initial deviation term taken unsquared: ||v(0) - u0||_2".to_string());
    }
    notes
}

fn robustness_notes() -> Vec<String> {
    vec![
        "threshold exponent evaluated on the reference solution's norms".to_string(),
        "forcing difference sampled on the reference trajectory's time grid".to_string(),
    ]
}

/// A-posteriori check in the minimal (`V`) setting.
pub fn verify_minimal(
    traj: &Trajectory,
    data: &ProblemData,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<VerificationReport> {
    let kind = ReportKind::MinimalAposteriori;
    let lhs = minimal_lhs_aposteriori(traj, data, mode)?;
    let digest = trajectory_digest(kind, mode, constants, traj, data, None)?;
    Inputs::for_trajectory(kind, traj, data, constants, mode, digest)
        .report(lhs, aposteriori_notes(kind))
}

/// A-posteriori check in the `V²` setting.
pub fn verify_second(
    traj: &Trajectory,
    data: &ProblemData,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<VerificationReport> {
    let kind = ReportKind::SecondAposteriori;
    constants.second_order()?;
    let lhs = second_lhs_aposteriori(traj, data, mode)?;
    let digest = trajectory_digest(kind, mode, constants, traj, data, None)?;
    Inputs::for_trajectory(kind, traj, data, constants, mode, digest)
        .report(lhs, aposteriori_notes(kind))
}

/// Minimal a-posteriori check from bare norm samples, for approximations
/// produced outside the periodic solver. `initial_deviation` is
/// `|D(v(0) − u₀)|`; the samples must carry `‖r‖₁`.
#[allow(clippy::too_many_arguments)]
pub fn verify_minimal_samples(
    samples: &[NormSample],
    initial_deviation: f64,
    nu: f64,
    horizon: f64,
    cutoff: f64,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<VerificationReport> {
    let kind = ReportKind::MinimalAposteriori;
    if !(initial_deviation >= 0.0 && initial_deviation.is_finite()) {
        return Err(Error::input(
            "initial deviation must be finite and nonnegative",
        ));
    }
    check_span(samples, horizon)?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let r: Vec<f64> = samples
        .iter()
        .map(|s| {
            s.res_h1
                .ok_or_else(|| Error::input("trajectory lacks the norm1_r column"))
        })
        .collect::<Result<_>>()?;
    let lhs = initial_deviation + integrate(&times, &r, mode)?;
    let mut h = digest_header(kind, mode, constants);
    h.update(format!(
        "nu {nu:e} horizon {horizon:e} cutoff {cutoff:e} dev {initial_deviation:e}\n"
    ));
    h.update(serde_json::to_string(samples).expect("samples serialize"));
    let inputs = Inputs {
        kind,
        samples,
        cutoff,
        nu,
        horizon,
        constants,
        mode,
        digest: hex::encode(h.finalize()),
    };
    inputs.report(lhs, aposteriori_notes(kind))
}

fn robustness(
    kind: ReportKind,
    base_traj: &Trajectory,
    base: &ProblemData,
    pert: &ProblemData,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<VerificationReport> {
    base_traj
        .initial_state
        .domain()
        .ensure_same(base.u0.domain())?;
    base_traj.check_span(base.horizon)?;
    if kind == ReportKind::SecondRobustness {
        constants.second_order()?;
    }
    let m = if kind.is_minimal() { 1.0 } else { 2.0 };
    let lhs = perturbation_size(base, pert, &base_traj.times(), m, mode)?;
    let digest = trajectory_digest(kind, mode, constants, base_traj, base, Some(pert))?;
    Inputs::for_trajectory(kind, base_traj, base, constants, mode, digest)
        .report(lhs, robustness_notes())
}

/// Whether the perturbed problem `(v₀, g)` inherits a strong solution from the
/// reference run `base_traj` in the `V` setting.
pub fn robustness_minimal(
    base_traj: &Trajectory,
    base: &ProblemData,
    pert: &ProblemData,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<VerificationReport> {
    robustness(
        ReportKind::MinimalRobustness,
        base_traj,
        base,
        pert,
        constants,
        mode,
    )
}

/// As [`robustness_minimal`] in the `V²` setting.
pub fn robustness_second(
    base_traj: &Trajectory,
    base: &ProblemData,
    pert: &ProblemData,
    constants: &ConstantTable,
    mode: QuadratureMode,
) -> Result<VerificationReport> {
    robustness(
        ReportKind::SecondRobustness,
        base_traj,
        base,
        pert,
        constants,
        mode,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{DomainSpec, SpectralVelocityField, WaveVector};
    use num_complex::Complex64;

    fn zero_traj(horizon: f64, n: usize) -> Trajectory {
        Trajectory {
            samples: (0..=n)
                .map(|i| NormSample::zero(horizon * i as f64 / n as f64))
                .collect(),
            states: Vec::new(),
            initial_state: SpectralVelocityField::zero(DomainSpec::default(), 3.0),
        }
    }

    fn zero_data(nu: f64, horizon: f64) -> ProblemData {
        ProblemData::unforced(
            SpectralVelocityField::zero(DomainSpec::default(), 3.0),
            nu,
            horizon,
        )
    }

    fn mode_with_h1(h1: f64) -> SpectralVelocityField {
        let u = SpectralVelocityField::single_mode(
            DomainSpec::default(),
            WaveVector::new(1, 0, 0),
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let s = h1 / u.sobolev_norm(1.0);
        u.scale(s)
    }

    #[test]
    fn minimal_rhs_zero_trajectory() {
        let c = ConstantTable::default();
        let k = 72.0 * 2f64.powf(0.75);
        let expect = (1.0f64 / 27.0).powf(0.25) / k;
        let r = minimal_rhs(&zero_traj(1.0, 4), 1.0, 1.0, &c, QuadratureMode::Trapezoid).unwrap();
        assert!((r - expect).abs() < 1e-15);
        assert!((r - 3.6229e-3).abs() < 1e-7);
        let r16 =
            minimal_rhs(&zero_traj(1.0, 4), 16.0, 1.0, &c, QuadratureMode::Trapezoid).unwrap();
        assert!((r16 - 8.0 * expect).abs() < 1e-14);
    }

    #[test]
    fn second_rhs_examples() {
        let c = ConstantTable::default().with_second_order(1.0, 1.0);
        let r = second_rhs(&zero_traj(2.0, 3), 1.0, 2.0, &c, QuadratureMode::Trapezoid).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let c = ConstantTable::default().with_second_order(2.0, 3.0);
        let r = second_rhs(&zero_traj(1.0, 3), 2.0, 1.0, &c, QuadratureMode::Trapezoid).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let unset = ConstantTable::default();
        assert!(matches!(
            second_rhs(
                &zero_traj(1.0, 3),
                1.0,
                1.0,
                &unset,
                QuadratureMode::Trapezoid
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_problem_is_verified() {
        let c = ConstantTable::default();
        let rep = verify_minimal(
            &zero_traj(1.0, 10),
            &zero_data(1.0, 1.0),
            &c,
            QuadratureMode::Trapezoid,
        )
        .unwrap();
        assert!(rep.is_verified());
        assert_eq!(rep.lhs, 0.0);
        assert!((rep.margin - (1.0f64 / 27.0).powf(0.25) / c.k_tri).abs() < 1e-9);
        let c2 = c.with_second_order(1.0, 1.0);
        let rep = verify_second(
            &zero_traj(1.0, 10),
            &zero_data(1.0, 1.0),
            &c2,
            QuadratureMode::Conservative,
        )
        .unwrap();
        assert!(rep.is_verified());
        assert_eq!(rep.margin, rep.rhs);
        assert!(verify_second(
            &zero_traj(1.0, 10),
            &zero_data(1.0, 1.0),
            &c,
            QuadratureMode::Trapezoid
        )
        .is_err());
    }

    #[test]
    fn truncated_trajectory_is_rejected() {
        let mut t = zero_traj(1.0, 10);
        t.samples.pop();
        let c = ConstantTable::default();
        assert!(matches!(
            verify_minimal(&t, &zero_data(1.0, 1.0), &c, QuadratureMode::Trapezoid),
            Err(Error::Input(_))
        ));
        let empty = Trajectory {
            samples: vec![],
            ..t
        };
        assert!(minimal_rhs(&empty, 1.0, 1.0, &c, QuadratureMode::Trapezoid).is_err());
    }

    #[test]
    fn unresolved_initial_data_enters_lhs() {
        let d = DomainSpec::default();
        let hi = SpectralVelocityField::single_mode(
            d,
            WaveVector::new(3, 0, 0),
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let u0 = mode_with_h1(1e-3).add(&hi).unwrap();
        let data = ProblemData::unforced(u0.clone(), 1.0, 1.0);
        let mut traj = zero_traj(1.0, 4);
        traj.initial_state = u0.galerkin_project(2.0);
        let lhs = minimal_lhs_aposteriori(&traj, &data, QuadratureMode::Trapezoid).unwrap();
        assert!((lhs - hi.sobolev_norm(1.0)).abs() < 1e-14 * lhs);
    }

    #[test]
    fn robustness_straddles_threshold() {
        let c = ConstantTable::default();
        let base = zero_data(1.0, 1.0);
        let traj = zero_traj(1.0, 8);
        let same = robustness_minimal(&traj, &base, &base, &c, QuadratureMode::Trapezoid).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert!(same.is_verified());
        let near = ProblemData {
            u0: mode_with_h1(1.8e-3),
            ..base.clone()
        };
        let rep = robustness_minimal(&traj, &base, &near, &c, QuadratureMode::Trapezoid).unwrap();
        assert!(rep.is_verified() && rep.lhs < 3.62e-3);
        let far = ProblemData {
            u0: mode_with_h1(1e-2),
            ..base.clone()
        };
        assert!(
            !robustness_minimal(&traj, &base, &far, &c, QuadratureMode::Trapezoid)
                .unwrap()
                .is_verified()
        );

        let c2 = c.with_second_order(1.0, 1.0);
        let threshold = 2f64.sqrt();
        let a = |x: f64| {
            let u = mode_with_h1(1.0);
            u.scale(x / u.sobolev_norm(2.0))
        };
        let ok = ProblemData {
            u0: a(0.9 * threshold),
            ..base.clone()
        };
        let bad = ProblemData {
            u0: a(1.1 * threshold),
            ..base.clone()
        };
        assert!(
            robustness_second(&traj, &base, &ok, &c2, QuadratureMode::Trapezoid)
                .unwrap()
                .is_verified()
        );
        assert!(
            !robustness_second(&traj, &base, &bad, &c2, QuadratureMode::Trapezoid)
                .unwrap()
                .is_verified()
        );
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let c = ConstantTable::default();
        let base = zero_data(1.0, 1.0);
        let other = ProblemData::unforced(
            SpectralVelocityField::zero(DomainSpec::new([1.0, 1.0, 1.0]).unwrap(), 3.0),
            1.0,
            1.0,
        );
        assert!(matches!(
            robustness_minimal(
                &zero_traj(1.0, 4),
                &base,
                &other,
                &c,
                QuadratureMode::Trapezoid
            ),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn report_is_deterministic_and_serializes() {
        let c = ConstantTable::default();
        let a = verify_minimal(
            &zero_traj(1.0, 10),
            &zero_data(1.0, 1.0),
            &c,
            QuadratureMode::Trapezoid,
        )
        .unwrap();
        let b = verify_minimal(
            &zero_traj(1.0, 10),
            &zero_data(1.0, 1.0),
            &c,
            QuadratureMode::Trapezoid,
        )
        .unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        for key in [
            "kind",
            "lhs",
            "rhs",
            "exponent_integral",
            "margin",
            "verdict",
            "quadrature_mode",
            "constants",
            "nu",
            "horizon",
            "cutoff",
            "inputs_digest",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["kind"], "minimal-aposteriori");
        assert_eq!(v["verdict"], "verified");
        assert!(v["constants"].get("c_prime").is_some());
        let other = verify_minimal(
            &zero_traj(1.0, 10),
            &zero_data(1.0, 1.0),
            &c,
            QuadratureMode::Conservative,
        )
        .unwrap();
        assert_ne!(a.inputs_digest, other.inputs_digest);
    }
}
