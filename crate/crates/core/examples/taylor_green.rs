//! The 2D Taylor-Green vortex is an exact solution: its nonlinear term is a
//! pure gradient, so the Galerkin run must decay like `e^{−2νt}`.

use ns_certify::field::{DomainSpec, SpectralVelocityField};
use ns_certify::galerkin::{integrate, ProblemData, SolverConfig};

fn main() -> ns_certify::Result<()> {
    let nu = 1.0;
    let u0 = SpectralVelocityField::taylor_green(DomainSpec::default(), 1.0).with_cutoff(9.0)?;
    let data = ProblemData::unforced(u0, nu, 0.1);
    let mut config = SolverConfig::new(9.0, 1e-3);
    config.sample_stride = 20;
    let traj = integrate(&data, &config)?;

    let l0 = traj.samples[0].l2;
    println!("{:>6} {:>14} {:>14} {:>10}", "t", "|u|", "exact", "|r|_1");
    for s in &traj.samples {
        let exact = l0 * (-2.0 * nu * s.t).exp();
        println!(
            "{:>6.3} {:>14.10} {:>14.10} {:>10.2e}",
            s.t,
            s.l2,
            exact,
            s.res_h1.unwrap_or(0.0)
        );
    }
    Ok(())
}
