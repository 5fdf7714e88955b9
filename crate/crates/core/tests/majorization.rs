use std::f64::consts::PI;

use nalgebra::Vector3;
use orbavg::j2problem::oracles::{majorization_sample, AuxOracles};
use orbavg::j2problem::CapFunctions;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bounds_dominate_oracle_left_hand_sides(
        p0 in 1.5f64..4.0,
        e0 in 0.1f64..0.9,
        y in -PI..PI,
        fp in -0.9f64..0.9,
        fe in -0.9f64..0.9,
        dy in -PI..PI,
        theta in 0.0f64..(2.0 * PI),
    ) {
        let caps = CapFunctions::new(p0, e0);
        let j = Vector3::new(p0, e0, y);
        let dj = Vector3::new(fp * caps.rho_p, fe * caps.rho_e, dy);
        let s = majorization_sample(&AuxOracles::default(), p0, e0, &j, &dj, theta).unwrap();
        for (k, r) in s.ratios().into_iter().enumerate() {
            prop_assert!(r <= 1.0, "inequality {} ratio {}", k, r);
        }
    }
}

#[test]
fn zero_displacement_reduces_to_pointwise_values() {
    let oracles = AuxOracles::default();
    let j = Vector3::new(3.0, 0.664, 0.4);
    let s = majorization_sample(&oracles, 3.0, 0.664, &j, &Vector3::zeros(), 1.1).unwrap();
    let direct = oracles.ds_di(&j, 1.1);
    assert!((s.s_lhs - direct).amax() < 1e-12);
    assert!((s.h_lhs + 18.0 * PI / 81.0).abs() < 1e-12);
}
