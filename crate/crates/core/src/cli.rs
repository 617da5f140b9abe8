//! Command-line front end of the `ns-certify` binary.
//!
//! Exit codes: `0` success (or verified), `2` not verified, `1` error. Errors
//! are also reported as a one-line JSON record on stderr and, when the output
//! directory is known, in `error.json`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channel::{
    self, channel_forcing, channel_norms, divergence_residual, nonlinear_channel, random_channel,
    ChannelCoefficients, ChannelDomain, NormDiscrepancyRow,
};
use crate::config::{CertificateKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::field_io::{read_field, write_field};
use crate::galerkin::{integrate, sweep, ProblemData};
use crate::inequality::{estimate_constants, ConstantTable};
use crate::ode_bounds;
use crate::output::write_atomic;
use crate::quadrature::QuadratureMode;
use crate::random::{substream, RandomFieldSpec};
use crate::trajectory::Trajectory;
use crate::verifier::{
    robustness_minimal, robustness_second, verify_minimal, verify_second, VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_VERIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ns-certify",
    version,
    about = "Galerkin Navier-Stokes runs and strong-solution certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Time quadrature; overrides `[verify] mode`.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<QuadratureMode>,
    /// Certificate kind; overrides `[verify] kind`.
    #[arg(long, global = true, value_enum)]
    pub kind: Option<CertificateKind>,
    /// Random seed; overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

fn parse_mode(s: &str) -> std::result::Result<QuadratureMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the Galerkin system and write the trajectory.
    Run,
    /// A-posteriori certificate for a trajectory (computed if not given).
    Verify {
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Initial state `v(0)`; defaults to `initial_state.field` next to the trajectory.
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Robustness frontier over perturbation magnitudes, with optional bisection.
    Robustness {
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Comma-separated magnitudes; overrides `[robustness] magnitudes`.
        #[arg(long, value_delimiter = ',')]
        magnitudes: Option<Vec<f64>>,
    },
    /// Convergence table across Galerkin cutoffs.
    Sweep {
        /// Comma-separated cutoffs; overrides `[sweep] cutoffs`.
        #[arg(long, value_delimiter = ',')]
        cutoffs: Option<Vec<f64>>,
    },
    /// Boundedness check for the scalar differential inequality.
    Ode {
        /// Problem file with the keys of the `[ode]` section at top level.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
    /// Empirical trilinear-inequality constants over random fields.
    Lab {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Channel-flow basis checks and comparison tables.
    Channel {
        #[arg(value_enum, default_value_t = ChannelAction::All)]
        action: ChannelAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelAction {
    Divergence,
    Norms,
    Nonlinear,
    Forcing,
    All,
}

/// Resolved settings shared by every subcommand.
struct Context {
    config: ExperimentConfig,
    base: PathBuf,
    out: PathBuf,
    mode: QuadratureMode,
    kind: CertificateKind,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let (mut config, base) = match &cli.config {
            Some(p) => (
                ExperimentConfig::load(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (ExperimentConfig::default(), PathBuf::new()),
        };
        if let Some(s) = cli.seed {
            config.seed = s;
        }
        let out = cli
            .out
            .clone()
            .unwrap_or_else(|| base.join(&config.output.dir));
        Ok(Self {
            mode: cli.mode.unwrap_or(config.verify.mode),
            kind: cli.kind.unwrap_or(config.verify.kind),
            config,
            base,
            out,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
        write_atomic(&self.path(name), text.as_bytes())
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        write_atomic(&self.path(name), text.as_bytes())
    }

    fn problem(&self) -> Result<ProblemData> {
        self.config.problem(&self.base)
    }

    fn constants(&self) -> Result<ConstantTable> {
        self.config.constants.table()
    }

    /// Loads a stored trajectory or integrates the configured problem.
    fn trajectory(
        &self,
        data: &ProblemData,
        path: Option<&Path>,
        initial: Option<&Path>,
    ) -> Result<Trajectory> {
        match path {
            None => integrate(data, &self.config.solver()?),
            Some(p) => {
                let init = match initial {
                    Some(i) => i.to_path_buf(),
                    None => p.with_file_name("initial_state.field"),
                };
                let v0 = read_field(&init)?;
                v0.domain().ensure_same(data.u0.domain())?;
                Trajectory::read_csv(p, v0)
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

/// Parses `args` and runs the selected subcommand; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let ctx = match Context::new(&cli) {
        Ok(c) => c,
        Err(e) => return report_error(&e, cli.out.as_deref()),
    };
    match dispatch(&cli.command, &ctx) {
        Ok(code) => code,
        Err(e) => report_error(&e, Some(&ctx.out)),
    }
}

fn report_error(e: &Error, out: Option<&Path>) -> i32 {
    let rec = ErrorRecord {
        error: e.kind(),
        message: e.to_string(),
    };
    let line = serde_json::to_string(&rec).expect("record serializes");
    eprintln!("{line}");
    if let Some(dir) = out {
        let _ = write_atomic(&dir.join("error.json"), format!("{line}\n").as_bytes());
    }
    EXIT_ERROR
}

fn dispatch(cmd: &Command, ctx: &Context) -> Result<i32> {
    match cmd {
        Command::Run => cmd_run(ctx),
        Command::Verify {
            trajectory,
            initial,
        } => cmd_verify(ctx, trajectory.as_deref(), initial.as_deref()),
        Command::Robustness {
            trajectory,
            initial,
            magnitudes,
        } => cmd_robustness(
            ctx,
            trajectory.as_deref(),
            initial.as_deref(),
            magnitudes.as_deref(),
        ),
        Command::Sweep { cutoffs } => cmd_sweep(ctx, cutoffs.as_deref()),
        Command::Ode { problem } => cmd_ode(ctx, problem.as_deref()),
        Command::Lab { samples } => cmd_lab(ctx, *samples),
        Command::Channel { action } => cmd_channel(ctx, *action),
    }
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    nu: f64,
    horizon: f64,
    cutoff: f64,
    dt: f64,
    scheme: crate::galerkin::Scheme,
    sample_stride: usize,
    samples: usize,
    retained_modes: usize,
}

fn cmd_run(ctx: &Context) -> Result<i32> {
    let data = ctx.problem()?;
    let solver = ctx.config.solver()?;
    let traj = integrate(&data, &solver)?;
    traj.write_csv(&ctx.path("trajectory.csv"))?;
    write_field(&ctx.path("initial_state.field"), &traj.initial_state)?;
    let last = traj.states.last().expect("at least one state");
    write_field(&ctx.path("final_state.field"), last)?;
    ctx.write_json(
        "run.json",
        &RunSummary {
            seed: ctx.config.seed,
            nu: data.nu,
            horizon: data.horizon,
            cutoff: solver.cutoff,
            dt: solver.dt,
            scheme: solver.scheme,
            sample_stride: solver.sample_stride,
            samples: traj.samples.len(),
            retained_modes: traj
                .initial_state
                .domain()
                .canonical_modes(solver.cutoff)
                .len(),
        },
    )?;
    Ok(EXIT_OK)
}

fn verdict_code(r: &VerificationReport) -> i32 {
    if r.is_verified() {
        EXIT_OK
    } else {
        EXIT_NOT_VERIFIED
    }
}

fn cmd_verify(ctx: &Context, trajectory: Option<&Path>, initial: Option<&Path>) -> Result<i32> {
    let data = ctx.problem()?;
    let constants = ctx.constants()?;
    if ctx.kind == CertificateKind::Second {
        constants.second_order()?;
    }
    let traj = ctx.trajectory(&data, trajectory, initial)?;
    let report = match ctx.kind {
        CertificateKind::Minimal => verify_minimal(&traj, &data, &constants, ctx.mode)?,
        CertificateKind::Second => verify_second(&traj, &data, &constants, ctx.mode)?,
    };
    ctx.write_text("report.json", &report.to_json())?;
    Ok(verdict_code(&report))
}

#[derive(Debug, Clone, Copy, Serialize)]
struct FrontierRow {
    magnitude: f64,
    lhs: f64,
    rhs: f64,
    margin: f64,
    verdict: crate::verifier::Verdict,
}

#[derive(Debug, Clone, Serialize)]
struct Bracket {
    kind: CertificateKind,
    quadrature_mode: QuadratureMode,
    /// Largest magnitude found verified.
    lo: f64,
    /// Smallest magnitude found not verified.
    hi: f64,
    steps: usize,
    rhs: f64,
}

fn cmd_robustness(
    ctx: &Context,
    trajectory: Option<&Path>,
    initial: Option<&Path>,
    magnitudes: Option<&[f64]>,
) -> Result<i32> {
    let base = ctx.problem()?;
    let constants = ctx.constants()?;
    let traj = ctx.trajectory(&base, trajectory, initial)?;
    let section = &ctx.config.robustness;
    let domain = *base.u0.domain();
    let dir = section
        .direction
        .build(domain, ctx.config.seed, 2, &ctx.base)?;
    let m = match ctx.kind {
        CertificateKind::Minimal => 1.0,
        CertificateKind::Second => 2.0,
    };
    let size = dir.sobolev_norm(m);
    if size == 0.0 {
        return Err(Error::Config("perturbation direction has zero norm".into()));
    }
    let unit: SpectralVelocityField = dir.scale(1.0 / size);
    let evaluate = |mag: f64| -> Result<VerificationReport> {
        if !(mag >= 0.0 && mag.is_finite()) {
            return Err(Error::input(
                "perturbation magnitudes must be finite and nonnegative",
            ));
        }
        let pert = ProblemData {
            u0: base.u0.axpy(mag, &unit)?,
            ..base.clone()
        };
        match ctx.kind {
            CertificateKind::Minimal => {
                robustness_minimal(&traj, &base, &pert, &constants, ctx.mode)
            }
            CertificateKind::Second => robustness_second(&traj, &base, &pert, &constants, ctx.mode),
        }
    };
    let mags = magnitudes.unwrap_or(&section.magnitudes);
    let rows = mags
        .iter()
        .map(|&mag| {
            let r = evaluate(mag)?;
            Ok(FrontierRow {
                magnitude: mag,
                lhs: r.lhs,
                rhs: r.rhs,
                margin: r.margin,
                verdict: r.verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ctx.write_text(
        "frontier.csv",
        &csv_string(&rows, &["magnitude", "lhs", "rhs", "margin", "verdict"])?,
    )?;

    if let Some(b) = section.bisect {
        let (mut lo, mut hi) = (b.lo, b.hi);
        if !(0.0 <= lo && lo < hi) {
            return Err(Error::Config("bisection needs 0 <= lo < hi".into()));
        }
        let at_lo = evaluate(lo)?;
        if !at_lo.is_verified() || evaluate(hi)?.is_verified() {
            return Err(Error::input(
                "bisection bracket must be verified at lo and not verified at hi",
            ));
        }
        for _ in 0..b.steps {
            let mid = 0.5 * (lo + hi);
            if evaluate(mid)?.is_verified() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ctx.write_json(
            "frontier.json",
            &Bracket {
                kind: ctx.kind,
                quadrature_mode: ctx.mode,
                lo,
                hi,
                steps: b.steps,
                rhs: at_lo.rhs,
            },
        )?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepLhsRow {
    cutoff: f64,
    lhs: f64,
    rhs: f64,
    margin: f64,
}

fn csv_string<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let err = |e: csv::Error| Error::parse("csv output", e.to_string());
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::parse("csv output", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

fn cmd_sweep(ctx: &Context, cutoffs: Option<&[f64]>) -> Result<i32> {
    let data = ctx.problem()?;
    let constants = ctx.constants()?;
    let cutoffs = cutoffs.unwrap_or(&ctx.config.sweep.cutoffs);
    let (runs, rows) = sweep(&data, cutoffs, &ctx.config.solver()?)?;
    ctx.write_text(
        "convergence.csv",
        &csv_string(&rows, &["cutoff_lo", "cutoff_hi", "sup_h1", "sup_h2"])?,
    )?;
    let lhs_rows: Vec<SweepLhsRow> = runs
        .iter()
        .zip(cutoffs)
        .map(|(t, &cutoff)| {
            let r = match ctx.kind {
                CertificateKind::Minimal => verify_minimal(t, &data, &constants, ctx.mode)?,
                CertificateKind::Second => verify_second(t, &data, &constants, ctx.mode)?,
            };
            Ok(SweepLhsRow {
                cutoff,
                lhs: r.lhs,
                rhs: r.rhs,
                margin: r.margin,
            })
        })
        .collect::<Result<_>>()?;
    ctx.write_text(
        "sweep_lhs.csv",
        &csv_string(&lhs_rows, &["cutoff", "lhs", "rhs", "margin"])?,
    )?;
    Ok(EXIT_OK)
}

fn cmd_ode(ctx: &Context, problem: Option<&Path>) -> Result<i32> {
    let section = match problem {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| Error::parse(p.display().to_string(), e.to_string()))?
        }
        None => ctx.config.ode.clone().ok_or_else(|| {
            Error::Config("no ODE problem: pass --problem or add an [ode] section".into())
        })?,
    };
    let report = ode_bounds::report(&section.problem()?, ctx.mode)?;
    ctx.write_json("ode_report.json", &report)?;
    Ok(EXIT_OK)
}

fn cmd_lab(ctx: &Context, samples: Option<usize>) -> Result<i32> {
    let lab = &ctx.config.lab;
    if lab.grid < 2 {
        return Err(Error::Config("lab grid must be at least 2".into()));
    }
    let spec = RandomFieldSpec::grid(lab.grid).with_decay(lab.decay);
    let est = estimate_constants(
        ctx.config.domain()?,
        samples.unwrap_or(lab.samples),
        &spec,
        ctx.config.seed,
        &ctx.constants()?,
    )?;
    ctx.write_json("lab.json", &est)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DivergenceExample {
    name: &'static str,
    oracle: f64,
    verbatim: f64,
}

#[derive(Serialize)]
struct ForcingRow {
    k2: i32,
    coefficient: f64,
    expected: f64,
}

fn cmd_channel(ctx: &Context, action: ChannelAction) -> Result<i32> {
    let sec = &ctx.config.channel;
    let domain = ChannelDomain::new(sec.lx, sec.lz)?;
    if sec.n < 1 {
        return Err(Error::Config(
            "channel truncation n must be at least 1".into(),
        ));
    }
    let seed = ctx.config.seed;
    let all = action == ChannelAction::All;
    let sample = |i: usize| {
        random_channel(
            sec.n,
            &domain,
            sec.amplitude,
            sec.decay,
            &mut substream(seed, i as u64),
        )
    };

    if all || action == ChannelAction::Divergence {
        let shear = ChannelCoefficients::from_real_modes(
            1,
            [(
                [0, 1, 0],
                [1.0, 0.0, 1.0].map(|x| num_complex::Complex64::new(x, 0.0)),
            )],
        )?;
        let wall_normal = ChannelCoefficients::from_real_modes(
            1,
            [(
                [0, 1, 0],
                [0.0, 1.0, 0.0].map(|x| num_complex::Complex64::new(x, 0.0)),
            )],
        )?;
        let examples = [
            ("shear", shear),
            ("wall-normal", wall_normal),
            ("random-0", sample(0)),
        ];
        let rows: Vec<DivergenceExample> = examples
            .iter()
            .map(|(name, c)| {
                let r = divergence_residual(c, &domain);
                DivergenceExample {
                    name,
                    oracle: r.oracle,
                    verbatim: r.verbatim,
                }
            })
            .collect();
        ctx.write_json("channel_divergence.json", &rows)?;
    }
    if all || action == ChannelAction::Norms {
        let rows: Vec<NormDiscrepancyRow> = (0..sec.samples)
            .map(|i| {
                let n = channel_norms(&sample(i), &domain);
                NormDiscrepancyRow {
                    sample: i,
                    oracle_du: n.oracle_du,
                    verbatim_du: n.verbatim_du,
                    oracle_au: n.oracle_au,
                    verbatim_au: n.verbatim_au,
                }
            })
            .collect();
        ctx.write_text(
            "channel_norms.csv",
            &csv_string(
                &rows,
                &[
                    "sample",
                    "oracle_du",
                    "verbatim_du",
                    "oracle_au",
                    "verbatim_au",
                ],
            )?,
        )?;
    }
    if all || action == ChannelAction::Nonlinear {
        let coeffs = match &sec.coefficients {
            Some(p) => {
                let (d, c) =
                    channel::read_channel_str(&std::fs::read_to_string(ctx.base.join(p))?)?;
                if d != domain {
                    return Err(Error::DomainMismatch(
                        "channel file periods differ from the config".into(),
                    ));
                }
                c
            }
            None => sample(0),
        };
        let cmp = nonlinear_channel(&coeffs, &domain)?;
        ctx.write_text("channel_nonlinear.csv", &cmp.to_csv()?)?;
    }
    if all || action == ChannelAction::Forcing {
        let n = 2 * sec.n;
        let f = channel_forcing(n);
        let rows: Vec<ForcingRow> = (1..=n)
            .map(|k2| ForcingRow {
                k2,
                coefficient: f.get([0, k2, 0])[0].re,
                expected: if k2 % 2 == 1 {
                    4.0 / (std::f64::consts::PI * k2 as f64)
                } else {
                    0.0
                },
            })
            .collect();
        ctx.write_text(
            "channel_forcing.csv",
            &csv_string(&rows, &["k2", "coefficient", "expected"])?,
        )?;
    }
    Ok(EXIT_OK)
}
