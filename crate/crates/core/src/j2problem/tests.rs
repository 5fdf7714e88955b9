use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::{DVector, Matrix3, Vector3};

use super::oracles::AuxOracles;
use super::*;
use crate::averaging::{build_flow, FlowSource, PeriodicSystem};
use crate::kepler::j2_field;
use crate::numerics::ode::IntegratorConfig;

fn grid_points() -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    for &(p, e) in &[(3.0, 0.664), (1.973, 0.8817), (2.4, 0.3)] {
        for k in 0..5 {
            out.push(Vector3::new(p, e, -1.3 + 0.9 * k as f64));
        }
    }
    out
}

#[test]
fn config_presets_and_validation() {
    let polar = J2Config::polar();
    assert_eq!(polar.initial(), Vector3::new(3.0, 0.664, 0.0));
    assert_relative_eq!(polar.with_orbits(60000.0).horizon(), 32.742, epsilon = 1e-9);
    assert!(polar.validate().is_ok());
    assert!(J2Config { e0: 1.0, ..polar }.validate().is_err());
    assert!(J2Config { p0: -1.0, ..polar }.validate().is_err());
    assert!(J2Config { orbits: 0.0, ..polar }.validate().is_err());
    assert!(J2Config { tau_grid: 1, ..polar }.validate().is_err());
    assert!(J2System::new(J2Config { epsilon: f64::NAN, ..polar }).is_err());
}

#[test]
fn bounds_are_monotone_in_r() {
    let (p0, e0) = (3.0, 0.664);
    let caps = CapFunctions::new(p0, e0);
    let n = 20;
    let at = |i: usize, j: usize| {
        let r = Vector3::new(caps.rho_p * 0.95 * i as f64 / n as f64, caps.rho_e * 0.95 * j as f64 / n as f64, 0.0);
        bounds(p0, e0, &r).unwrap()
    };
    for i in 0..n {
        for j in 0..n {
            let base = at(i, j);
            for next in [at(i + 1, j), at(i, j + 1)] {
                assert!(next.a.iter().zip(base.a.iter()).all(|(x, y)| x >= y));
                assert!(next.b.iter().zip(base.b.iter()).all(|(x, y)| x >= y));
                assert!(next.c.iter().zip(base.c.iter()).all(|(x, y)| x >= y));
                assert!(next.d.abs().iter().zip(base.d.abs().iter()).all(|(x, y)| x >= y));
                assert!(next.e_ypp >= base.e_ypp);
            }
        }
    }
}

#[test]
fn second_order_term_is_z_plus_m_squared() {
    for &(p0, e0) in &[(3.0, 0.664), (1.973, 0.8817)] {
        let inv = InverseMatrices::new(p0, e0);
        let z = b_partials(p0, e0, &Vector3::zeros());
        let expected = z + inv.m * inv.m;
        assert!((inv.q - expected).abs().max() < 1e-9, "{} vs {}", inv.q, expected);
    }
}

#[test]
fn approximate_inverse_is_third_order() {
    let (p0, e0) = (3.0, 0.664);
    let inv = InverseMatrices::new(p0, e0);
    let residual = |eps: f64| {
        let r = Vector3::repeat(eps);
        let exact = (Matrix3::identity() - eps * alpha_partials(p0, e0, eps, &r).unwrap()).try_inverse().unwrap();
        (exact - inv.approx_inverse(eps, &r)).abs().max()
    };
    let eps = [1e-3, 5e-4, 2.5e-4];
    let res: Vec<f64> = eps.iter().map(|&e| residual(e)).collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((6.0..=10.0).contains(&ratio), "ratio {ratio}, residuals {res:?}");
    }
}

#[test]
fn alpha_partials_match_finite_differences() {
    let (p0, e0, eps) = (1.973, 0.8817, 5.457e-4);
    let sys = J2System::new(J2Config::cosb()).unwrap();
    let r = Vector3::new(0.02, 0.01, 0.05);
    let exact = alpha_partials(p0, e0, eps, &r).unwrap();
    let rest = |r: &Vector3<f64>| {
        let t = bounds(p0, e0, r).unwrap();
        t.a * r + eps * t.b
    };
    let h = 1e-7;
    for j in 0..3 {
        let mut up = r;
        up[j] += h;
        let mut dn = r;
        dn[j] -= h;
        let col = (rest(&up) - rest(&dn)) / (2.0 * h);
        for i in 0..3 {
            assert_relative_eq!(exact[(i, j)], col[i], epsilon = 1e-6, max_relative = 1e-6);
        }
    }
    let via_trait = sys.alpha_r_partials(0.0, &DVector::from_column_slice(r.as_slice()), eps).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(via_trait[(i, j)], exact[(i, j)]);
        }
    }
}

#[test]
fn s_has_zero_mean_and_solves_the_homological_equation() {
    let n = 64;
    for i in grid_points() {
        let mean: Vector3<f64> = (0..n).map(|k| s_closed(&i, 2.0 * PI * k as f64 / n as f64)).sum::<Vector3<f64>>() / n as f64;
        assert!(mean.abs().max() < 1e-13, "mean {mean}");
        let fbar = averaged_field(&i);
        for k in 0..7 {
            let th = 0.37 + 0.9 * k as f64;
            let h = 1e-5;
            let ds = (s_closed(&i, th + h) - s_closed(&i, th - h)) / (2.0 * h);
            let lhs = 2.0 * PI * ds;
            let rhs = j2_field(i[0], i[1], i[2], th) - fbar;
            assert!((lhs - rhs).abs().max() < 1e-7 * (1.0 + rhs.abs().max()), "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn averaged_field_matches_quadrature_average() {
    let n = 64;
    for i in grid_points() {
        let avg: Vector3<f64> =
            (0..n).map(|k| j2_field(i[0], i[1], i[2], 2.0 * PI * k as f64 / n as f64)).sum::<Vector3<f64>>() / n as f64;
        assert!((avg - averaged_field(&i)).abs().max() < 1e-13);
    }
}

#[test]
fn hessian_matches_finite_differences_of_the_average() {
    let i = Vector3::new(2.5, 0.5, 0.3);
    let h = 1e-3;
    let f = |p: f64| averaged_field(&Vector3::new(p, i[1], i[2]))[2];
    let fd = (f(i[0] + h) - 2.0 * f(i[0]) + f(i[0] - h)) / (h * h);
    assert_relative_eq!(pbar_jac_hess(&i).2, fd, max_relative = 1e-5);
    let jac_fd = (f(i[0] + h) - f(i[0] - h)) / (2.0 * h);
    assert_relative_eq!(pbar_jac_hess(&i).1[(2, 0)], jac_fd, max_relative = 1e-5);
}

#[test]
fn closed_forms_agree_with_oracles() {
    let oracles = AuxOracles::default();
    for i in grid_points().into_iter().step_by(2) {
        for k in 0..4 {
            let th = 0.21 + 1.6 * k as f64;
            let s_o = oracles.s(&i, th);
            assert!((s_o - s_closed(&i, th)).abs().max() < 1e-10, "s {s_o} vs {}", s_closed(&i, th));
            let vp = oracles.v(&i, th)[0];
            assert_relative_eq!(vp, v_p_closed(&i, th), epsilon = 1e-10);
            let up = oracles.u(&i, th)[0];
            assert!((up - u_p_closed(&i, th)).abs() < 1e-5 * (1.0 + up.abs()), "u^P {up} vs {}", u_p_closed(&i, th));
        }
        let pb = oracles.pbar(&i);
        assert!((pb - pbar_jac_hess(&i).0).abs().max() < 1e-7, "pbar {pb} vs {}", pbar_jac_hess(&i).0);
    }
}

#[test]
fn closed_flow_matches_integration() {
    for cfg in [J2Config::polar(), J2Config::cosb()] {
        let sys = Arc::new(J2System::new(cfg).unwrap());
        let u = 32.742;
        let icfg = IntegratorConfig::new(1e-12, 1e-12).unwrap();
        let integrated = build_flow(&sys, u, FlowSource::Integrate, &icfg).unwrap();
        let closed = build_flow(&sys, u, FlowSource::PreferClosed, &icfg).unwrap();
        for k in 0..=16 {
            let tau = u * k as f64 / 16.0;
            let dj = (integrated.j.eval(tau).unwrap() - closed.j.eval(tau).unwrap()).abs().max();
            let dr = (integrated.r.eval(tau).unwrap() - closed.r.eval(tau).unwrap()).abs().max();
            let dri = (integrated.r_inv.eval(tau).unwrap() - closed.r_inv.eval(tau).unwrap()).abs().max();
            let dk = (integrated.k.eval(tau).unwrap() - closed.k.eval(tau).unwrap()).abs().max();
            assert!(dj < 1e-8 && dr < 1e-8 && dri < 1e-8, "tau {tau}: {dj} {dr} {dri}");
            assert!(dk < 1e-6, "tau {tau}: K differs by {dk}");
        }
    }
}

#[test]
fn k_p_vanishes_at_three_and_tau_zero() {
    let (_, _, k) = closed_r_k(3.0, 0.664, 0.0, 0.0);
    assert_eq!(k, Vector3::zeros());
    let y_period = PI * 9.0 / (3.0 * PI);
    let (_, _, k) = closed_r_k(3.0, 0.664, 0.0, y_period);
    assert!(k[0].abs() < 1e-14 && k[1].abs() < 1e-14);
}

#[test]
fn averaged_perigee_drift() {
    let u = J2Config::polar().with_orbits(60000.0).horizon();
    let polar = averaged_solution(3.0, 0.664, 0.0, 1.0);
    assert_relative_eq!(polar[2], -1.047, epsilon = 5e-4);
    let cosb = averaged_solution(1.973, 0.8817, 0.96, 1.0);
    assert_relative_eq!(cosb[2] - 0.96, -2.421, epsilon = 5e-4);
    assert_relative_eq!(averaged_solution(3.0, 0.664, 0.0, u)[2], -34.29, epsilon = 5e-3);
    assert_relative_eq!(averaged_solution(1.973, 0.8817, 0.96, u)[2], -78.31, epsilon = 5e-3);
}

#[test]
fn system_reports_shear_bounds_and_caps() {
    let sys = J2System::new(J2Config::polar()).unwrap();
    let rb = sys.r_bound(2.0);
    assert_relative_eq!(rb[(2, 0)], 12.0 * PI / 27.0, epsilon = 1e-15);
    let (r, ri) = sys.closed_fundamental(2.0).unwrap();
    assert!(((&r * &ri) - nalgebra::DMatrix::identity(3, 3)).abs().max() < 1e-15);
    assert_eq!(r.abs(), rb);
    assert_eq!(ri.abs(), sys.p_bound(2.0));
    let caps = sys.caps(0.0);
    assert_eq!(caps[0].as_f64(), 3.0);
    assert_relative_eq!(caps[1].as_f64(), 0.336, epsilon = 1e-15);
    assert!(caps[2].admits(1e300));
    let bv = sys.bounds(0.0, &DVector::zeros(3)).unwrap();
    assert_relative_eq!(bv.e[2][(0, 0)], 18.0 * PI / 81.0, max_relative = 1e-12);
    assert!(sys.bounds(0.0, &DVector::from_vec(vec![3.5, 0.0, 0.0])).is_err());
}
