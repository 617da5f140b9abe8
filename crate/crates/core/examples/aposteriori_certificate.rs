//! Certify a strong solution from a computed Galerkin trajectory.
//!
//! The initial datum is a single Fourier mode with `|Du₀| = 10⁻⁴`, well
//! inside the region where the minimal-regularity test can succeed. The
//! report is printed as JSON.

use ns_certify::field::{DomainSpec, SpectralVelocityField, WaveVector};
use ns_certify::galerkin::{integrate, ProblemData, SolverConfig};
use ns_certify::inequality::ConstantTable;
use ns_certify::quadrature::QuadratureMode;
use ns_certify::verifier::verify_minimal;
use num_complex::Complex64;

fn main() -> ns_certify::Result<()> {
    let z = Complex64::new(0.0, 0.0);
    let mode = SpectralVelocityField::single_mode(
        DomainSpec::default(),
        WaveVector::new(0, 1, 0),
        [Complex64::new(1.0, 0.0), z, z],
    )?;
    let u0 = mode.scale(1e-4 / mode.sobolev_norm(1.0));
    let data = ProblemData::unforced(u0, 1.0, 1.0);
    let traj = integrate(&data, &SolverConfig::new(4.0, 1e-3))?;

    let constants = ConstantTable::default();
    for qm in [QuadratureMode::Trapezoid, QuadratureMode::Conservative] {
        let r = verify_minimal(&traj, &data, &constants, qm)?;
        println!(
            "{:>12}: lhs {:.3e}  rhs {:.6e}  -> {:?}",
            qm.as_str(),
            r.lhs,
            r.rhs,
            r.verdict
        );
    }
    print!(
        "{}",
        verify_minimal(&traj, &data, &constants, QuadratureMode::Trapezoid)?.to_json()
    );
    Ok(())
}
