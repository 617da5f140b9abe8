//! Boundedness of `dy/dt ≤ δ(t) + α yⁿ` from the size of the data alone.
//!
//! Run with `cargo run --example ode_envelope`.

use ns_certify::ode_bounds::{boundedness_threshold, check, envelope_bound, OdeBoundProblem};
use ns_certify::quadrature::QuadratureMode;

fn main() -> ns_certify::Result<()> {
    let (alpha, n, horizon) = (1.0, 2.0, 1.0);
    let threshold = boundedness_threshold(alpha, n, horizon)?;
    println!("threshold for alpha = {alpha}, n = {n}, T = {horizon}: {threshold}");

    for eta in [0.0, 0.25, 0.5, 0.9, 1.0] {
        println!(
            "  eta = {eta:<5} envelope {:?}",
            envelope_bound(eta, alpha, n, horizon)?
        );
    }

    // δ sampled on a grid; the conservative rule over-estimates η.
    let delta: Vec<(f64, f64)> = (0..=10)
        .map(|i| {
            let t = i as f64 / 10.0;
            (t, 0.3 * (1.0 + (6.0 * t).sin()))
        })
        .collect();
    let problem = OdeBoundProblem {
        y0: 0.2,
        alpha,
        n_exp: n,
        horizon,
        delta,
    };
    for mode in [QuadratureMode::Trapezoid, QuadratureMode::Conservative] {
        println!("{:>12}: {:?}", mode.as_str(), check(&problem, mode)?);
    }
    Ok(())
}
