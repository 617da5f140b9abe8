//! How far may the initial data move away from a certified reference run?
//!
//! With the reference `u ≡ 0` the threshold does not depend on the
//! perturbation, so the frontier sits exactly at `(1/27)^{1/4}/k`.

use ns_certify::field::{DomainSpec, SpectralVelocityField, WaveVector};
use ns_certify::galerkin::{integrate, ProblemData, SolverConfig};
use ns_certify::inequality::ConstantTable;
use ns_certify::quadrature::QuadratureMode;
use ns_certify::verifier::robustness_minimal;
use num_complex::Complex64;

fn main() -> ns_certify::Result<()> {
    let d = DomainSpec::default();
    let base = ProblemData::unforced(SpectralVelocityField::zero(d, 3.0), 1.0, 1.0);
    let traj = integrate(&base, &SolverConfig::new(3.0, 1e-2))?;
    let z = Complex64::new(0.0, 0.0);
    let dir = SpectralVelocityField::single_mode(
        d,
        WaveVector::new(1, 0, 0),
        [z, Complex64::new(1.0, 0.0), z],
    )?;
    let dir = dir.scale(1.0 / dir.sobolev_norm(1.0)).with_cutoff(3.0)?;
    let constants = ConstantTable::default();

    let verified = |m: f64| -> ns_certify::Result<bool> {
        let pert = ProblemData {
            u0: base.u0.axpy(m, &dir)?,
            ..base.clone()
        };
        Ok(
            robustness_minimal(&traj, &base, &pert, &constants, QuadratureMode::Trapezoid)?
                .is_verified(),
        )
    };

    for m in [1e-3, 2e-3, 3e-3, 4e-3, 5e-3] {
        println!(
            "|Dv0| = {m:.1e}: {}",
            if verified(m)? {
                "verified"
            } else {
                "not verified"
            }
        );
    }
    let (mut lo, mut hi) = (1.8e-3, 1e-2);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if verified(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("frontier in [{lo:.9e}, {hi:.9e}]");
    Ok(())
}
