//! Galerkin approximations of smooth data converge as the cutoff grows, and
//! the a-posteriori residual shrinks with them.

use ns_certify::field::DomainSpec;
use ns_certify::galerkin::{sweep, ProblemData, SolverConfig};
use ns_certify::inequality::ConstantTable;
use ns_certify::quadrature::QuadratureMode;
use ns_certify::random::{random_field, substream, RandomFieldSpec};
use ns_certify::verifier::verify_minimal;

fn main() -> ns_certify::Result<()> {
    let spec = RandomFieldSpec {
        max_wavenumber: 1,
        decay: 4.0,
        amplitude: 1.0,
        cutoff: None,
    };
    let u0 = random_field(DomainSpec::default(), &spec, &mut substream(11, 0));
    let u0 = u0.scale(1.0 / u0.sobolev_norm(1.0));
    let data = ProblemData::unforced(u0, 1.0, 0.5);
    let cutoffs = [3.0, 6.0, 12.0];
    let (runs, rows) = sweep(&data, &cutoffs, &SolverConfig::new(3.0, 1e-3))?;

    println!(
        "{:>5} {:>5} {:>12} {:>12}",
        "lo", "hi", "sup |D.|", "sup |A.|"
    );
    for r in &rows {
        println!(
            "{:>5} {:>5} {:>12.3e} {:>12.3e}",
            r.cutoff_lo, r.cutoff_hi, r.sup_h1, r.sup_h2
        );
    }
    for (t, c) in runs.iter().zip(cutoffs) {
        let r = verify_minimal(
            t,
            &data,
            &ConstantTable::default(),
            QuadratureMode::Trapezoid,
        )?;
        println!("cutoff {c:>4}: lhs {:.3e}", r.lhs);
    }
    Ok(())
}
