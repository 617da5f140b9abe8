//! Experiment configuration files (TOML, schema version 1).
//!
//! Every section is optional; unknown keys anywhere are errors. A complete
//! example:
//!
//! ```toml
//! schema = 1
//! seed = 7
//!
//! [domain]
//! periods = [6.283185307179586, 6.283185307179586, 6.283185307179586]
//!
//! [initial]                 # zero | taylor-green | single-mode | random-decay | file
//! preset = "random-decay"
//! max_wavenumber = 2
//! decay = 4.0
//! h1_norm = 1e-3            # optional rescaling to this |Du₀|
//!
//! [forcing]                 # zero | single-mode | random-decay | file
//! preset = "zero"
//!
//! [physics]
//! nu = 1.0
//! horizon = 0.5
//!
//! [solver]
//! cutoff = 12.0
//! dt = 1e-3
//! scheme = "if-rk4"         # or "imex-euler"
//! sample_stride = 10
//!
//! [constants]               # c_s and k default to 4√2 and 9·c_s^{3/2}
//! c = 1.0
//! c_prime = 1.0
//!
//! [verify]
//! mode = "trapezoid"        # or "conservative"
//! kind = "minimal"          # or "second"
//!
//! [output]
//! dir = "out"
//!
//! [robustness]
//! magnitudes = [1e-3, 2e-3, 4e-3]
//! bisect = { lo = 1.8e-3, hi = 1e-2, steps = 30 }
//! direction = { preset = "single-mode", k = [1, 0, 0], polarization = [0.0, 1.0, 0.0] }
//!
//! [sweep]
//! cutoffs = [3.0, 6.0, 12.0]
//!
//! [lab]
//! samples = 1000
//! grid = 8
//! decay = 2.0
//!
//! [channel]
//! lx = 1.0
//! lz = 1.0
//! n = 2
//! samples = 20
//!
//! [ode]
//! y0 = 0.1
//! alpha = 1.0
//! n = 2.0
//! horizon = 1.0
//! delta = [[0.0, 0.0], [1.0, 0.0]]
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, SpectralVelocityField, WaveVector};
use crate::galerkin::{Forcing, ForcingTerm, ProblemData, Scheme, SolverConfig, TimeEnvelope};
use crate::inequality::{default_sobolev_constant, trilinear_constant, ConstantTable};
use crate::ode_bounds::OdeBoundProblem;
use crate::quadrature::QuadratureMode;
use crate::random::{random_field, substream, RandomFieldSpec};

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub initial: FieldRecipe,
    #[serde(default)]
    pub forcing: ForcingRecipe,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub robustness: RobustnessSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub lab: LabSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub ode: Option<OdeSection>,
}

fn schema_version() -> u32 {
    CONFIG_SCHEMA
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub periods: [f64; 3],
}

impl Default for DomainSection {
    fn default() -> Self {
        Self {
            periods: DomainSpec::default().periods,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Zero,
    TaylorGreen,
    SingleMode,
    RandomDecay,
    File,
}

/// Recipe for a divergence-free field.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRecipe {
    #[serde(default)]
    pub preset: Preset,
    /// Overall factor (taylor-green, single-mode, random-decay).
    pub amplitude: Option<f64>,
    /// Wavevector of a single mode.
    pub k: Option<[i32; 3]>,
    /// Real polarization of a single mode; projected to be transverse.
    pub polarization: Option<[f64; 3]>,
    /// Rescales the field to this `|Du|`.
    pub h1_norm: Option<f64>,
    /// Rescales the field to this `|Au|`.
    pub h2_norm: Option<f64>,
    pub max_wavenumber: Option<i32>,
    /// Coefficients scale as `λ^{−decay}`.
    pub decay: Option<f64>,
    pub cutoff: Option<f64>,
    /// Random substream; defaults to 0 for initial data, 1 for forcing.
    pub stream: Option<u64>,
    pub path: Option<PathBuf>,
}

impl FieldRecipe {
    pub fn single_mode(k: [i32; 3], polarization: [f64; 3]) -> Self {
        Self {
            preset: Preset::SingleMode,
            k: Some(k),
            polarization: Some(polarization),
            ..Self::default()
        }
    }

    pub fn build(
        &self,
        domain: DomainSpec,
        seed: u64,
        default_stream: u64,
        base: &Path,
    ) -> Result<SpectralVelocityField> {
        let amp = self.amplitude.unwrap_or(1.0);
        if !amp.is_finite() {
            return Err(Error::Config("amplitude must be finite".into()));
        }
        let u = match self.preset {
            Preset::Zero => SpectralVelocityField::zero(domain, self.cutoff.unwrap_or(0.0)),
            Preset::TaylorGreen => SpectralVelocityField::taylor_green(domain, amp),
            Preset::SingleMode => {
                let k = self
                    .k
                    .ok_or_else(|| Error::Config("single-mode needs k".into()))?;
                let p = self
                    .polarization
                    .ok_or_else(|| Error::Config("single-mode needs polarization".into()))?;
                let v = p.map(|x| Complex64::new(amp * x, 0.0));
                SpectralVelocityField::single_mode(domain, WaveVector(k), v)?
            }
            Preset::RandomDecay => {
                let spec = RandomFieldSpec {
                    max_wavenumber: self.max_wavenumber.unwrap_or(2),
                    decay: self.decay.unwrap_or(4.0),
                    amplitude: amp,
                    cutoff: self.cutoff,
                };
                if spec.max_wavenumber < 1 || !spec.decay.is_finite() {
                    return Err(Error::Config(
                        "random-decay needs max_wavenumber >= 1 and finite decay".into(),
                    ));
                }
                let mut rng = substream(seed, self.stream.unwrap_or(default_stream));
                random_field(domain, &spec, &mut rng)
            }
            Preset::File => {
                let p = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("file preset needs path".into()))?;
                let u = crate::field_io::read_field(&base.join(p))?;
                domain.ensure_same(u.domain())?;
                u
            }
        };
        let u = match (self.h1_norm, self.h2_norm) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set at most one of h1_norm and h2_norm".into(),
                ))
            }
            (Some(t), None) => rescale(u, 1.0, t)?,
            (None, Some(t)) => rescale(u, 2.0, t)?,
            (None, None) => u,
        };
        u.check_invariants()?;
        Ok(u)
    }
}

fn rescale(u: SpectralVelocityField, m: f64, target: f64) -> Result<SpectralVelocityField> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::Config(
            "norm targets must be finite and nonnegative".into(),
        ));
    }
    let n = u.sobolev_norm(m);
    if n == 0.0 {
        return if target == 0.0 {
            Ok(u)
        } else {
            Err(Error::Config("cannot rescale a zero field".into()))
        };
    }
    Ok(u.scale(target / n))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingRecipe {
    #[serde(default)]
    pub preset: Preset,
    pub amplitude: Option<f64>,
    pub k: Option<[i32; 3]>,
    pub polarization: Option<[f64; 3]>,
    pub h1_norm: Option<f64>,
    pub h2_norm: Option<f64>,
    pub max_wavenumber: Option<i32>,
    pub decay: Option<f64>,
    pub cutoff: Option<f64>,
    pub stream: Option<u64>,
    pub path: Option<PathBuf>,
    pub envelope: Option<TimeEnvelope>,
}

impl ForcingRecipe {
    pub fn build(&self, domain: DomainSpec, seed: u64, base: &Path) -> Result<Forcing> {
        if self.preset == Preset::Zero {
            return Ok(Forcing::zero());
        }
        if self.preset == Preset::TaylorGreen {
            return Err(Error::Config("taylor-green is not a forcing preset".into()));
        }
        let recipe = FieldRecipe {
            preset: self.preset,
            amplitude: self.amplitude,
            k: self.k,
            polarization: self.polarization,
            h1_norm: self.h1_norm,
            h2_norm: self.h2_norm,
            max_wavenumber: self.max_wavenumber,
            decay: self.decay,
            cutoff: self.cutoff,
            stream: self.stream,
            path: self.path.clone(),
        };
        Ok(Forcing {
            terms: vec![ForcingTerm {
                field: recipe.build(domain, seed, 1, base)?,
                envelope: self.envelope.unwrap_or(TimeEnvelope::Constant),
            }],
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub nu: f64,
    pub horizon: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            nu: 1.0,
            horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub cutoff: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub sample_stride: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            cutoff: 9.0,
            dt: 1e-3,
            scheme: Scheme::IfRk4,
            sample_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub c_s: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub c_prime: Option<f64>,
}

impl ConstantsSection {
    pub fn table(&self) -> Result<ConstantTable> {
        let c_s = self.c_s.unwrap_or_else(default_sobolev_constant);
        let t = ConstantTable {
            c_s,
            k_tri: self.k.unwrap_or_else(|| trilinear_constant(c_s)),
            c_b: self.c,
            c_b_prime: self.c_prime,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    #[default]
    Minimal,
    Second,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub mode: QuadratureMode,
    pub kind: CertificateKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectSection {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "bisect_steps")]
    pub steps: usize,
}

fn bisect_steps() -> usize {
    30
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessSection {
    /// Shape of the initial-data perturbation, normalized to unit size.
    pub direction: FieldRecipe,
    pub magnitudes: Vec<f64>,
    pub bisect: Option<BisectSection>,
}

fn default_direction() -> FieldRecipe {
    FieldRecipe::single_mode([1, 0, 0], [0.0, 1.0, 0.0])
}

impl Default for RobustnessSection {
    fn default() -> Self {
        Self {
            direction: default_direction(),
            magnitudes: Vec::new(),
            bisect: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub cutoffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabSection {
    pub samples: usize,
    /// Fields live on a `grid³` grid: `|k_i| ≤ grid/2`.
    pub grid: i32,
    pub decay: f64,
}

impl Default for LabSection {
    fn default() -> Self {
        Self {
            samples: 1000,
            grid: 8,
            decay: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub lx: f64,
    pub lz: f64,
    pub n: i32,
    /// Seeded random coefficient sets in the norm comparison.
    pub samples: usize,
    pub amplitude: f64,
    pub decay: f64,
    /// Optional coefficient file used for the nonlinear comparison.
    pub coefficients: Option<PathBuf>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            lx: 1.0,
            lz: 1.0,
            n: 2,
            samples: 20,
            amplitude: 1.0,
            decay: 2.0,
            coefficients: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    pub y0: f64,
    pub alpha: f64,
    pub n: f64,
    pub horizon: f64,
    /// `(t, δ)` samples; `delta_constant` is the alternative.
    pub delta: Option<Vec<[f64; 2]>>,
    pub delta_constant: Option<f64>,
}

impl OdeSection {
    pub fn problem(&self) -> Result<OdeBoundProblem> {
        let p = match (&self.delta, self.delta_constant) {
            (Some(d), None) => OdeBoundProblem {
                y0: self.y0,
                alpha: self.alpha,
                n_exp: self.n,
                horizon: self.horizon,
                delta: d.iter().map(|[t, v]| (*t, *v)).collect(),
            },
            (None, c) => OdeBoundProblem::with_constant_delta(
                self.y0,
                self.alpha,
                self.n,
                self.horizon,
                c.unwrap_or(0.0),
            ),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set only one of delta and delta_constant".into(),
                ))
            }
        };
        p.validate()?;
        Ok(p)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::parse("config", e.to_string()))?;
        if c.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported config schema {}",
                c.schema
            )));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.domain.periods)
    }

    /// Initial condition, forcing, `ν` and `T`; file paths resolve against `base`.
    pub fn problem(&self, base: &Path) -> Result<ProblemData> {
        let domain = self.domain()?;
        let data = ProblemData {
            u0: self.initial.build(domain, self.seed, 0, base)?,
            forcing: self.forcing.build(domain, self.seed, base)?,
            nu: self.physics.nu,
            horizon: self.physics.horizon,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let s = SolverConfig {
            cutoff: self.solver.cutoff,
            dt: self.solver.dt,
            scheme: self.solver.scheme,
            sample_stride: self.solver.sample_stride,
        };
        s.validate(self.physics.horizon)?;
        Ok(s)
    }
}
