//! Sample the trilinear ratios over random divergence-free fields and
//! compare with the analytic constants.

use ns_certify::field::DomainSpec;
use ns_certify::inequality::{estimate_constants, ConstantTable};
use ns_certify::random::RandomFieldSpec;

fn main() -> ns_certify::Result<()> {
    let samples = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let table = ConstantTable::default();
    let est = estimate_constants(
        DomainSpec::default(),
        samples,
        &RandomFieldSpec::grid(8),
        42,
        &table,
    )?;
    println!("k = {:.6}", table.k_tri);
    println!(
        "{}",
        serde_json::to_string_pretty(&est).expect("estimate serializes")
    );
    Ok(())
}
