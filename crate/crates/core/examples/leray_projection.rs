//! Build a divergence-free field from arbitrary mode data and inspect its
//! Sobolev norms and the dealiased nonlinear term.

use ns_certify::field::{leray_project, DomainSpec, RawField, WaveVector};
use ns_certify::transform::{nonlinear_full, trilinear_form};
use num_complex::Complex64;

fn main() -> ns_certify::Result<()> {
    let d = DomainSpec::new([2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 4.0])?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut raw = RawField::new();
    raw.insert_pair(
        WaveVector::new(1, 0, 0),
        [c(1.0, 0.0), c(0.5, 0.0), c(0.0, 1.0)],
    );
    raw.insert_pair(
        WaveVector::new(0, 1, 1),
        [c(0.2, 0.1), c(1.0, 0.0), c(-1.0, 0.0)],
    );
    raw.insert_pair(
        WaveVector::new(1, 1, 0),
        [c(0.0, 0.3), c(0.0, 0.0), c(0.4, 0.0)],
    );
    let u = leray_project(&raw, &d)?;

    println!(
        "modes {}  cutoff {:.4}  divergence defect {:.1e}",
        u.len(),
        u.cutoff(),
        u.divergence_defect()
    );
    for m in 0..=3 {
        println!("  ||u||_{m} = {:.6}", u.sobolev_norm(m as f64));
    }
    let b = nonlinear_full(&u);
    println!(
        "B(u,u): {} modes, |B| = {:.6}",
        b.len(),
        b.sobolev_norm(0.0)
    );
    println!("(B(u,u), u) = {:.1e}", trilinear_form(&u, &u, &u)?);
    Ok(())
}
