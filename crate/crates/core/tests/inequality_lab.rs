mod common;

use common::{field, trilinear_direct};
use ns_certify::field::DomainSpec;
use ns_certify::inequality::{
    estimate_constants, ratio_b_v2, ratio_triform1, ratio_triform2, ConstantTable, Order,
};
use ns_certify::random::RandomFieldSpec;
use proptest::prelude::*;

#[test]
fn ratio_numerator_matches_physical_sum() {
    let u = field(1, 0, 2, 1.0);
    let v = field(1, 1, 2, 1.0);
    let w = field(1, 2, 2, 1.0);
    let den = u.sobolev_norm(1.0)
        * (v.sobolev_norm(1.0) * v.sobolev_norm(2.0)).sqrt()
        * w.sobolev_norm(2.0);
    let direct = trilinear_direct(&u, &v, &w.stokes_apply(), 8).abs() / den;
    let fast = ratio_triform1(&u, &v, &w).unwrap();
    assert!((fast - direct).abs() <= 1e-11 * direct);
}

#[test]
fn sampled_ratios_respect_the_trilinear_constant() {
    let table = ConstantTable::default();
    let est = estimate_constants(
        DomainSpec::default(),
        200,
        &RandomFieldSpec::grid(8),
        3,
        &table,
    )
    .unwrap();
    assert!(est.violations.is_empty(), "{:?}", est.violations);
    assert!(est.max_triform1.unwrap() <= table.k_tri);
    assert!(est.max_skew_defect.unwrap() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratios_are_homogeneous(seed in 0u64..1000, a in 0.01f64..100.0, b in 0.01f64..100.0, c in 0.01f64..100.0) {
        let u = field(seed, 0, 2, 1.0);
        let v = field(seed, 1, 2, 1.0);
        let w = field(seed, 2, 2, 1.0);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(1e-300);
        let r = ratio_triform1(&u, &v, &w).unwrap();
        prop_assert!(close(r, ratio_triform1(&u.scale(a), &v.scale(b), &w.scale(c)).unwrap()));
        for which in [Order::Wu, Order::Uw] {
            let r = ratio_triform2(&u, &w, which).unwrap();
            prop_assert!(close(r, ratio_triform2(&u.scale(a), &w.scale(b), which).unwrap()));
        }
        let r = ratio_b_v2(&u).unwrap();
        prop_assert!(close(r, ratio_b_v2(&u.scale(a)).unwrap()));
    }
}
