//! Plain-text spectral field files.
//!
//! Layout, version 1 (one item per line, fields separated by single spaces,
//! floats in Rust's shortest round-trip scientific notation):
//!
//! ```text
//! ns-certify-field 1
//! periods <L1> <L2> <L3>
//! cutoff <Λ>
//! modes <count>
//! <k1> <k2> <k3> <Re u1> <Im u1> <Re u2> <Im u2> <Re u3> <Im u3>
//! ...
//! ```
//!
//! Only the canonical member of every `±k` pair is written, in ascending
//! lexicographic order of `k`. Lines starting with `#` are ignored on read.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{DomainSpec, SpectralVelocityField, Vec3c, WaveVector};

pub const FIELD_MAGIC: &str = "ns-certify-field";
pub const FIELD_VERSION: u32 = 1;

pub fn write_field_string(u: &SpectralVelocityField) -> String {
    let mut s = String::new();
    let p = u.domain().periods;
    writeln!(s, "{FIELD_MAGIC} {FIELD_VERSION}").unwrap();
    writeln!(s, "periods {:e} {:e} {:e}", p[0], p[1], p[2]).unwrap();
    writeln!(s, "cutoff {:e}", u.cutoff()).unwrap();
    writeln!(s, "modes {}", u.len()).unwrap();
    for (k, v) in u.modes() {
        write!(s, "{} {} {}", k.0[0], k.0[1], k.0[2]).unwrap();
        for c in v {
            write!(s, " {:e} {:e}", c.re, c.im).unwrap();
        }
        s.push('\n');
    }
    s
}

fn keyed<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, Vec<&'a str>)> {
    let (no, line) =
        line.ok_or_else(|| Error::parse("field file", format!("missing '{key}' line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::parse(
            "field file",
            format!("line {}: expected '{key}'", no + 1),
        ));
    }
    Ok((no, parts.collect()))
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse("field file", format!("line {}: bad number '{s}'", line + 1)))
}

pub fn read_field_str(text: &str) -> Result<SpectralVelocityField> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (no, head) = keyed(lines.next(), FIELD_MAGIC)?;
    if head.len() != 1 || num::<u32>(head[0], no)? != FIELD_VERSION {
        return Err(Error::parse("field file", "unsupported format version"));
    }
    let (no, p) = keyed(lines.next(), "periods")?;
    if p.len() != 3 {
        return Err(Error::parse("field file", "periods needs three values"));
    }
    let domain = DomainSpec::new([num(p[0], no)?, num(p[1], no)?, num(p[2], no)?])?;
    let (no, c) = keyed(lines.next(), "cutoff")?;
    let cutoff: f64 = num(c.first().copied().unwrap_or(""), no)?;
    let (no, m) = keyed(lines.next(), "modes")?;
    let count: usize = num(m.first().copied().unwrap_or(""), no)?;

    let mut modes: Vec<(WaveVector, Vec3c)> = Vec::with_capacity(count);
    for (no, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 9 {
            return Err(Error::parse(
                "field file",
                format!("line {}: expected 9 columns, found {}", no + 1, f.len()),
            ));
        }
        let k = WaveVector([num(f[0], no)?, num(f[1], no)?, num(f[2], no)?]);
        if !k.is_canonical() {
            return Err(Error::parse(
                "field file",
                format!("line {}: mode {:?} is not canonical", no + 1, k.0),
            ));
        }
        let mut v = [Complex64::new(0.0, 0.0); 3];
        for (i, z) in v.iter_mut().enumerate() {
            *z = Complex64::new(num(f[3 + 2 * i], no)?, num(f[4 + 2 * i], no)?);
        }
        modes.push((k, v));
    }
    if modes.len() != count {
        return Err(Error::parse(
            "field file",
            format!("header announces {count} modes, found {}", modes.len()),
        ));
    }
    let u = SpectralVelocityField::from_modes(domain, cutoff, modes.iter().copied())?;
    // Projection must be a no-op on a valid file; a mismatch means the stored
    // data was not divergence-free.
    for (k, v) in &modes {
        let w = u.coefficient(*k);
        let err: f64 = (0..3).map(|i| (v[i] - w[i]).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if err > 1e-10 * scale {
            return Err(Error::parse(
                "field file",
                format!("mode {:?} is not divergence-free", k.0),
            ));
        }
    }
    // Keep the stored values bit-exact rather than their re-projection.
    let exact =
        SpectralVelocityField::from_parts_unchecked(domain, cutoff, modes.into_iter().collect());
    exact.check_invariants()?;
    Ok(exact)
}

pub fn write_field(path: &Path, u: &SpectralVelocityField) -> Result<()> {
    crate::output::write_atomic(path, write_field_string(u).as_bytes())
}

pub fn read_field(path: &Path) -> Result<SpectralVelocityField> {
    read_field_str(&std::fs::read_to_string(path)?)
}
