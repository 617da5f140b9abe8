mod common;

use common::{check_every_step, field, zero_data_margin};
use ns_certify::field::{DomainSpec, SpectralVelocityField, WaveVector};
use ns_certify::galerkin::{integrate, sweep, ProblemData, SolverConfig};
use ns_certify::inequality::ConstantTable;
use ns_certify::quadrature::QuadratureMode;
use ns_certify::trajectory::NormSample;
use ns_certify::verifier::{
    minimal_threshold, second_threshold, verify_minimal, verify_minimal_samples, verify_second,
    Verdict,
};
use num_complex::Complex64;
use proptest::prelude::*;

const TRAP: QuadratureMode = QuadratureMode::Trapezoid;
const CONS: QuadratureMode = QuadratureMode::Conservative;

fn single_mode_with_h1(target: f64) -> SpectralVelocityField {
    let d = DomainSpec::default();
    let z = Complex64::new(0.0, 0.0);
    let u = SpectralVelocityField::single_mode(
        d,
        WaveVector::new(0, 1, 0),
        [Complex64::new(1.0, 0.0), z, z],
    )
    .unwrap();
    u.scale(target / u.sobolev_norm(1.0))
}

#[test]
fn zero_data_margin_matches_closed_form() {
    let d = DomainSpec::default();
    let data = ProblemData::unforced(SpectralVelocityField::zero(d, 3.0), 1.0, 1.0);
    let traj = integrate(&data, &SolverConfig::new(3.0, 1e-2)).unwrap();
    for mode in [TRAP, CONS] {
        let r = verify_minimal(&traj, &data, &ConstantTable::default(), mode).unwrap();
        assert_eq!(r.verdict, Verdict::Verified);
        assert!((r.margin - zero_data_margin()).abs() <= 1e-9);
    }
}

#[test]
fn small_single_mode_is_verified_in_both_modes() {
    let u0 = single_mode_with_h1(1e-4);
    let data = ProblemData::unforced(u0, 1.0, 1.0);
    let traj = integrate(&data, &SolverConfig::new(4.0, 1e-3)).unwrap();
    check_every_step(&traj, &data, 4.0).unwrap();
    for mode in [TRAP, CONS] {
        let r = verify_minimal(&traj, &data, &ConstantTable::default(), mode).unwrap();
        assert!(r.is_verified(), "{mode:?}: {r:?}");
    }
}

#[test]
fn second_order_report_needs_constants() {
    let data = ProblemData::unforced(single_mode_with_h1(1e-3), 1.0, 1.0);
    let traj = integrate(&data, &SolverConfig::new(4.0, 1e-2)).unwrap();
    assert!(verify_second(&traj, &data, &ConstantTable::default(), TRAP).is_err());
    let table = ConstantTable::default().with_second_order(1.0, 1.0);
    let r = verify_second(&traj, &data, &table, TRAP).unwrap();
    assert!(r.is_verified());
}

#[test]
fn reports_are_deterministic() {
    let u0 = field(5, 0, 2, 1.0).scale(1e-3);
    let data = ProblemData::unforced(u0, 1.0, 0.2);
    let cfg = SolverConfig::new(3.0, 1e-2);
    let a = verify_minimal(
        &integrate(&data, &cfg).unwrap(),
        &data,
        &ConstantTable::default(),
        TRAP,
    )
    .unwrap();
    let b = verify_minimal(
        &integrate(&data, &cfg).unwrap(),
        &data,
        &ConstantTable::default(),
        TRAP,
    )
    .unwrap();
    assert_eq!(a.inputs_digest, b.inputs_digest);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn trapezoid_refinement_is_second_order() {
    let u0 = field(2, 0, 2, 2.0).galerkin_project(6.0);
    let data = ProblemData::unforced(u0, 1.0, 0.5);
    let run = |stride: usize| {
        let mut cfg = SolverConfig::new(3.0, 1e-3);
        cfg.sample_stride = stride;
        let traj = integrate(&data, &cfg).unwrap();
        let r = verify_minimal(&traj, &data, &ConstantTable::default(), TRAP).unwrap();
        (r.lhs, r.exponent_integral)
    };
    let v: Vec<(f64, f64)> = [20, 10, 5].into_iter().map(run).collect();
    let order = |a: f64, b: f64, c: f64| ((a - b).abs() / (b - c).abs()).log2();
    let lhs_order = order(v[0].0, v[1].0, v[2].0);
    let exp_order = order(v[0].1, v[1].1, v[2].1);
    assert!(lhs_order >= 1.8, "lhs order {lhs_order}");
    assert!(exp_order >= 1.8, "exponent order {exp_order}");
}

#[test]
fn lhs_does_not_grow_with_the_cutoff() {
    let d = DomainSpec::default();
    let spec = ns_certify::random::RandomFieldSpec {
        max_wavenumber: 1,
        decay: 4.0,
        amplitude: 1.0,
        cutoff: None,
    };
    let u0 = ns_certify::random::random_field(d, &spec, &mut ns_certify::random::substream(11, 0));
    let u0 = u0.scale(1.0 / u0.sobolev_norm(1.0));
    let data = ProblemData::unforced(u0, 1.0, 0.5);
    let cutoffs = [3.0, 6.0, 12.0];
    let (runs, rows) = sweep(&data, &cutoffs, &SolverConfig::new(3.0, 1e-3)).unwrap();
    assert!(rows[1].sup_h1 < rows[0].sup_h1);
    let lhs: Vec<f64> = runs
        .iter()
        .map(|t| {
            verify_minimal(t, &data, &ConstantTable::default(), TRAP)
                .unwrap()
                .lhs
        })
        .collect();
    for w in lhs.windows(2) {
        assert!(w[1] <= w[0] + 1e-8, "{lhs:?}");
    }
}

fn series(values: &[(f64, f64, f64)], horizon: f64) -> Vec<NormSample> {
    let n = values.len() - 1;
    values
        .iter()
        .enumerate()
        .map(|(i, &(h1, h2, r))| NormSample {
            t: horizon * i as f64 / n as f64,
            l2: h1,
            h1,
            h2,
            h3: Some(h2),
            res_h1: Some(r),
            res_h2: Some(r),
        })
        .collect()
}

proptest! {
    #[test]
    fn enlarging_inputs_never_verifies(
        i in 0.0f64..1e-3, di in 0.0f64..1e-3,
        lhs in 0.0f64..5e-3, dl in 0.0f64..5e-3,
        nu in 0.1f64..10.0, t in 0.1f64..5.0,
    ) {
        let k = ConstantTable::default().k_tri;
        let before = Verdict::from_margin(minimal_threshold(i, nu, t, k) - lhs);
        let after = Verdict::from_margin(minimal_threshold(i + di, nu, t, k) - (lhs + dl));
        prop_assert!(!(before == Verdict::NotVerified && after == Verdict::Verified));
        let before = Verdict::from_margin(second_threshold(i, nu, t, 2.0) - lhs);
        let after = Verdict::from_margin(second_threshold(i + di, nu, t, 2.0) - (lhs + dl));
        prop_assert!(!(before == Verdict::NotVerified && after == Verdict::Verified));
    }

    #[test]
    fn conservative_verdict_implies_trapezoid_verdict(
        values in prop::collection::vec((0.0f64..2e-3, 0.0f64..2e-2, 0.0f64..3e-3), 2..20),
        dev in 0.0f64..3e-3,
    ) {
        let samples = series(&values, 1.0);
        let table = ConstantTable::default();
        let c = verify_minimal_samples(&samples, dev, 1.0, 1.0, 1.0, &table, CONS).unwrap();
        let t = verify_minimal_samples(&samples, dev, 1.0, 1.0, 1.0, &table, TRAP).unwrap();
        prop_assert!(c.margin <= t.margin);
        if c.is_verified() {
            prop_assert!(t.is_verified());
        }
    }
}
