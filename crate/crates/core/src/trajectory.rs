//! Time-sampled norm functionals of a Galerkin run, and their CSV format.
//!
//! CSV columns, in order:
//!
//! | column    | quantity                 |
//! |-----------|--------------------------|
//! | `t`       | sample time              |
//! | `abs_u`   | `\|u\|`                  |
//! | `abs_Du`  | `\|Du\|`                 |
//! | `abs_Au`  | `\|Au\|`                 |
//! | `norm3_u` | `‖u‖₃`                   |
//! | `norm1_r` | `‖r‖₁` of the residual   |
//! | `norm2_r` | `‖r‖₂` of the residual   |
//!
//! The last three columns may be left empty (or omitted) for trajectories that
//! come from elsewhere; the checks that need them then fail with an input
//! error. Floats are written in shortest round-trip form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;

pub const CSV_COLUMNS: [&str; 7] = [
    "t", "abs_u", "abs_Du", "abs_Au", "norm3_u", "norm1_r", "norm2_r",
];

/// Norm functionals of one stored state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: Option<f64>,
    pub res_h1: Option<f64>,
    pub res_h2: Option<f64>,
}

impl NormSample {
    pub fn zero(t: f64) -> Self {
        Self {
            t,
            l2: 0.0,
            h1: 0.0,
            h2: 0.0,
            h3: Some(0.0),
            res_h1: Some(0.0),
            res_h2: Some(0.0),
        }
    }
}

/// A sampled run: norm functionals, optionally the sampled states, and the
/// initial state `v(0)` needed by the a-posteriori checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<NormSample>,
    /// One state per sample, or empty when loaded from CSV.
    pub states: Vec<SpectralVelocityField>,
    pub initial_state: SpectralVelocityField,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn column(&self, f: impl Fn(&NormSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    /// Column of an optional functional; input error naming `what` if missing.
    pub fn optional_column(
        &self,
        what: &str,
        f: impl Fn(&NormSample) -> Option<f64>,
    ) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| {
                f(s).ok_or_else(|| Error::input(format!("trajectory lacks the {what} column")))
            })
            .collect()
    }

    pub fn cutoff(&self) -> f64 {
        self.initial_state.cutoff()
    }

    /// Checks that samples start at 0 and end at `horizon`.
    pub fn check_span(&self, horizon: f64) -> Result<()> {
        check_span(&self.samples, horizon)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for s in &self.samples {
            w.write_record([
                s.t.to_string(),
                s.l2.to_string(),
                s.h1.to_string(),
                s.h2.to_string(),
                opt(s.h3),
                opt(s.res_h1),
                opt(s.res_h2),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::parse("trajectory csv", e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    /// Parses samples from CSV; columns are matched by header name.
    pub fn samples_from_csv_str(text: &str) -> Result<Vec<NormSample>> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(csv_err)?.clone();
        let pos = |name: &str| headers.iter().position(|h| h.trim() == name);
        for h in headers.iter() {
            if !CSV_COLUMNS.contains(&h.trim()) {
                return Err(Error::parse(
                    "trajectory csv",
                    format!("unknown column '{h}'"),
                ));
            }
        }
        let required = |name: &str| {
            pos(name)
                .ok_or_else(|| Error::parse("trajectory csv", format!("missing column '{name}'")))
        };
        let (it, il2, ih1, ih2) = (
            required("t")?,
            required("abs_u")?,
            required("abs_Du")?,
            required("abs_Au")?,
        );
        let (ih3, ir1, ir2) = (pos("norm3_u"), pos("norm1_r"), pos("norm2_r"));
        let mut out = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let line = row + 2;
            let get = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("").trim();
                s.parse().map_err(|_| {
                    Error::parse("trajectory csv", format!("line {line}: bad number '{s}'"))
                })
            };
            let get_opt = |i: Option<usize>| -> Result<Option<f64>> {
                match i.map(|i| rec.get(i).unwrap_or("").trim()) {
                    None | Some("") => Ok(None),
                    Some(s) => s.parse().map(Some).map_err(|_| {
                        Error::parse("trajectory csv", format!("line {line}: bad number '{s}'"))
                    }),
                }
            };
            let s = NormSample {
                t: get(it)?,
                l2: get(il2)?,
                h1: get(ih1)?,
                h2: get(ih2)?,
                h3: get_opt(ih3)?,
                res_h1: get_opt(ir1)?,
                res_h2: get_opt(ir2)?,
            };
            let vals = [Some(s.l2), Some(s.h1), Some(s.h2), s.h3, s.res_h1, s.res_h2];
            if !s.t.is_finite() || vals.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::parse(
                    "trajectory csv",
                    format!("line {line}: norms must be finite and nonnegative"),
                ));
            }
            out.push(s);
        }
        Ok(out)
    }

    pub fn from_csv_str(text: &str, initial_state: SpectralVelocityField) -> Result<Self> {
        Ok(Self {
            samples: Self::samples_from_csv_str(text)?,
            states: Vec::new(),
            initial_state,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::output::write_atomic(path, self.to_csv_string()?.as_bytes())
    }

    pub fn read_csv(path: &Path, initial_state: SpectralVelocityField) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, initial_state)
    }
}

/// Samples must start at 0, end at `horizon` and increase strictly.
pub fn check_span(samples: &[NormSample], horizon: f64) -> Result<()> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::input("empty trajectory"));
    };
    let tol = 1e-9 * horizon.max(1.0);
    if first.t.abs() > tol || (last.t - horizon).abs() > tol {
        return Err(Error::input(format!(
            "trajectory covers [{}, {}], not [0, {horizon}]",
            first.t, last.t
        )));
    }
    if samples.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::input("trajectory times are not increasing"));
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse("trajectory csv", e.to_string())
}
