use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::*;
use crate::error::Error;
use crate::numerics::interp::InterpMode;
use crate::numerics::ode::IntegratorConfig;

/// `dI/d𝔱 = ε (A I + oscillation)` with `A = [[-1, 0], [1, -1]]`.
struct Toy {
    oscillating: bool,
    a_coeff: f64,
}

impl Toy {
    fn new(oscillating: bool, a_coeff: f64) -> Self {
        Self { oscillating, a_coeff }
    }

    fn mat() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, -1.0])
    }

    fn exact_j(tau: f64) -> DVector<f64> {
        let i0 = DVector::from_vec(vec![1.0, 2.0]);
        (-tau).exp() * DVector::from_vec(vec![i0[0], i0[1] + tau * i0[0]])
    }

    fn exact_r(tau: f64) -> DMatrix<f64> {
        (-tau).exp() * DMatrix::from_row_slice(2, 2, &[1.0, 0.0, tau, 1.0])
    }
}

impl PeriodicSystem for Toy {
    fn dim(&self) -> usize {
        2
    }

    fn initial(&self) -> DVector<f64> {
        DVector::from_vec(vec![1.0, 2.0])
    }

    fn field(&self, i: &DVector<f64>, theta: f64) -> DVector<f64> {
        let mut f = Self::mat() * i;
        if self.oscillating {
            f[0] += theta.cos();
            f[1] += theta.sin();
        }
        f
    }

    fn averaged_field(&self, i: &DVector<f64>) -> DVector<f64> {
        Self::mat() * i
    }

    fn s(&self, _i: &DVector<f64>, theta: f64) -> DVector<f64> {
        if self.oscillating {
            DVector::from_vec(vec![theta.sin() / (2.0 * PI), -theta.cos() / (2.0 * PI)])
        } else {
            DVector::zeros(2)
        }
    }

    fn pbar(&self, _i: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(2)
    }

    fn jac_fbar(&self, _i: &DVector<f64>) -> DMatrix<f64> {
        Self::mat()
    }

    fn in_domain(&self, i: &DVector<f64>) -> bool {
        i.iter().all(|x| x.is_finite())
    }

    fn caps(&self, _tau: f64) -> Vec<CapRadius> {
        vec![CapRadius::Finite(10.0), CapRadius::Unbounded]
    }

    fn bounds(&self, tau: f64, r: &DVector<f64>) -> crate::Result<BoundValues> {
        check_caps(self, tau, r)?;
        Ok(BoundValues {
            a: DMatrix::from_element(2, 2, self.a_coeff) * (1.0 + r[0]),
            b: DVector::from_vec(vec![0.5, 0.25]),
            c: DVector::from_vec(vec![1.0, 2.0]),
            d: DMatrix::identity(2, 2) * 0.1,
            e: vec![DMatrix::zeros(2, 2), DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 0.0])],
        })
    }

    fn r_bound(&self, tau: f64) -> DMatrix<f64> {
        Self::exact_r(tau).abs()
    }

    fn p_bound(&self, tau: f64) -> DMatrix<f64> {
        tau.exp() * DMatrix::from_row_slice(2, 2, &[1.0, 0.0, tau, 1.0])
    }
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::new(1e-12, 1e-12).unwrap()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn integrated_flow_matches_exact_solution() {
    let sys = Arc::new(Toy::new(true, 0.1));
    let flow = build_flow(&sys, 3.0, FlowSource::Integrate, &cfg()).unwrap();
    for k in 0..=30 {
        let tau = 0.1 * k as f64;
        assert!((flow.j.eval(tau).unwrap() - Toy::exact_j(tau)).amax() < 1e-9);
        let r = flow.r.eval(tau).unwrap();
        let ri = flow.r_inv.eval(tau).unwrap();
        assert!(max_abs(&(&r - Toy::exact_r(tau))) < 1e-9);
        assert!(max_abs(&(&r * &ri - DMatrix::identity(2, 2))) < 1e-10);
        assert!(flow.k.eval(tau).unwrap().amax() < 1e-14);
    }
    assert_eq!(flow.r.eval(0.0).unwrap(), DMatrix::identity(2, 2));
    assert!(matches!(flow.j.eval(3.5), Err(Error::OutOfRange { .. })));
}

#[test]
fn invalid_horizon_is_rejected() {
    let sys = Arc::new(Toy::new(true, 0.1));
    assert!(build_flow(&sys, 0.0, FlowSource::Integrate, &cfg()).is_err());
    assert!(build_flow(&sys, f64::INFINITY, FlowSource::Integrate, &cfg()).is_err());
}

#[test]
fn a0_vanishes_without_oscillation() {
    let sys = Arc::new(Toy::new(false, 0.1));
    let flow = build_flow(&sys, 1.0, FlowSource::Integrate, &cfg()).unwrap();
    for refine in [false, true] {
        let a0 = a0_build(&*sys, &flow, 16, 10, refine, InterpMode::Lagrange).unwrap();
        for k in 0..=20 {
            assert_eq!(a0.eval(0.05 * k as f64).unwrap(), DVector::zeros(2));
        }
    }
}

#[test]
fn a0_reproduces_node_values() {
    let sys = Arc::new(Toy::new(true, 0.1));
    let flow = build_flow(&sys, 1.0, FlowSource::Integrate, &cfg()).unwrap();
    for mode in [InterpMode::Lagrange, InterpMode::Cubic] {
        let a0 = a0_build(&*sys, &flow, 30, 12, false, mode).unwrap();
        assert_eq!(a0.nodes().len(), 13);
        assert_eq!(*a0.nodes().last().unwrap(), 1.0);
        for (n, &tau) in a0.nodes().iter().enumerate() {
            let v = a0.eval(tau).unwrap();
            assert_eq!(v[0], a0.node_values(0)[n]);
            assert_eq!(v[1], a0.node_values(1)[n]);
        }
        assert!(a0.eval(1.01).is_err());
    }
}

#[test]
fn a0_at_zero_matches_direct_grid_maximum() {
    let sys = Arc::new(Toy::new(true, 0.1));
    let flow = build_flow(&sys, 1.0, FlowSource::Integrate, &cfg()).unwrap();
    let a0 = a0_build(&*sys, &flow, 30, 4, false, InterpMode::Cubic).unwrap();
    let s0 = sys.s(&sys.initial(), 0.0);
    let direct = (1..=30)
        .map(|q| (sys.s(&sys.initial(), 2.0 * PI * q as f64 / 30.0)[1] - s0[1]).abs())
        .fold(0.0, f64::max);
    assert_eq!(a0.node_values(1)[0], direct);
    let refined = a0_build(&*sys, &flow, 30, 4, true, InterpMode::Cubic).unwrap();
    assert!(refined.node_values(1)[0] >= direct);
    assert!((refined.node_values(1)[0] - 2.0 / (2.0 * PI)).abs() < 1e-12);
}

#[test]
fn a0_rejects_small_grids() {
    let sys = Arc::new(Toy::new(true, 0.1));
    let flow = build_flow(&sys, 1.0, FlowSource::Integrate, &cfg()).unwrap();
    assert!(a0_build(&*sys, &flow, 1, 10, false, InterpMode::Cubic).is_err());
    assert!(a0_build(&*sys, &flow, 10, 1, false, InterpMode::Cubic).is_err());
}

fn table(vals: [f64; 2], mode: InterpMode) -> A0Table {
    A0Table::from_values(vec![0.0, 0.5, 1.0], vec![vec![vals[0]; 3], vec![vals[1]; 3]], mode).unwrap()
}

#[test]
fn alpha_and_gamma_trivial_cases() {
    let sys = Toy::new(true, 0.1);
    let a0 = table([0.3, 0.7], InterpMode::Cubic);
    let zero = DVector::zeros(2);
    let al = alpha_eval(&sys, &a0, 0.01, 0.2, &zero).unwrap();
    assert_eq!(al, DVector::from_vec(vec![0.3 + 0.005, 0.7 + 0.0025]));
    assert_eq!(alpha_eval(&sys, &a0, 0.0, 0.2, &zero).unwrap(), a0.eval(0.2).unwrap());
    assert_eq!(gamma_eval(&sys, 0.0, &zero, &zero).unwrap(), DVector::from_vec(vec![1.0, 2.0]));
    let l = DVector::from_vec(vec![2.0, 3.0]);
    let g = gamma_eval(&sys, 0.0, &zero, &l).unwrap();
    assert!((g[0] - 1.2).abs() < 1e-15);
    assert!((g[1] - (2.0 + 0.3 + 0.5 * 0.2 * 4.0)).abs() < 1e-15);
}

#[test]
fn cap_violations_are_reported() {
    let sys = Toy::new(true, 0.1);
    let a0 = table([0.3, 0.7], InterpMode::Cubic);
    let out = DVector::from_vec(vec![10.0, 0.0]);
    assert!(matches!(alpha_eval(&sys, &a0, 0.01, 0.0, &out), Err(Error::CapViolation { .. })));
    let neg = DVector::from_vec(vec![-1e-3, 0.0]);
    assert!(matches!(gamma_eval(&sys, 0.0, &neg, &neg), Err(Error::CapViolation { .. })));
    let far = DVector::from_vec(vec![0.0, 1e300]);
    assert!(gamma_eval(&sys, 0.0, &far, &far).is_ok());
}

#[test]
fn default_jacobian_matches_structure() {
    let sys = Toy::new(true, 0.1);
    let r = DVector::from_vec(vec![0.5, 0.2]);
    let jac = alpha_r_jacobian(&sys, 0.01, 0.0, &r).unwrap();
    // ∂/∂r [0.1 (1 + r0) (r0 + r1)] per row
    let d0 = 0.1 * ((r[0] + r[1]) + (1.0 + r[0]));
    let d1 = 0.1 * (1.0 + r[0]);
    for i in 0..2 {
        assert!((jac[(i, 0)] - d0).abs() < 1e-7);
        assert!((jac[(i, 1)] - d1).abs() < 1e-7);
    }
}

#[test]
fn constant_alpha_converges_in_two_iterations() {
    let sys = Toy::new(true, 0.0);
    let a0 = table([0.3, 0.7], InterpMode::Cubic);
    let eps = 0.01;
    let sigma = default_sigma_box(&sys, &a0, eps).unwrap();
    let rep = fixed_point(&sys, &a0, eps, &sigma, 1e-14, 50).unwrap();
    assert_eq!(rep.iterations, 2);
    assert!((rep.l0[0] - 0.305).abs() < 1e-15 && (rep.l0[1] - 0.7025).abs() < 1e-15);
    assert_eq!(rep.residual, 0.0);
    assert!(rep.flags.all());
    assert_eq!(rep.contraction_bound, Some(0.0));
}

#[test]
fn contraction_iteration_and_hypotheses() {
    let sys = Toy::new(true, 0.3);
    let a0 = table([0.3, 0.7], InterpMode::Cubic);
    let eps = 0.2;
    let sigma = default_sigma_box(&sys, &a0, eps).unwrap();
    let rep = fixed_point(&sys, &a0, eps, &sigma, 1e-14, 200).unwrap();
    assert!(rep.flags.all(), "{:?}", rep.flags);
    let bound = rep.contraction_bound.unwrap();
    assert!(bound < 1.0);
    for ratio in &rep.observed_ratios {
        assert!(*ratio <= bound, "{ratio} > {bound}");
    }
    let again = alpha_eval(&sys, &a0, eps, 0.0, &(eps * &rep.l0)).unwrap() - &rep.l0;
    let resub = again.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert_eq!(resub, rep.residual);
    assert!(rep.residual < 1e-13);
}

#[test]
fn nonconvergence_is_an_error() {
    let sys = Toy::new(true, 0.3);
    let a0 = table([0.3, 0.7], InterpMode::Cubic);
    let sigma = default_sigma_box(&sys, &a0, 0.5).unwrap();
    assert!(matches!(
        fixed_point(&sys, &a0, 0.5, &sigma, 1e-14, 3),
        Err(Error::FixedPointNotConverged { iterations: 3, .. })
    ));
}

#[test]
fn box_outside_caps_is_flagged() {
    let sys = Toy::new(true, 0.1);
    let a0 = table([0.3, 0.7], InterpMode::Cubic);
    let sigma = SigmaBox {
        center: DVector::from_vec(vec![0.3, 0.7]),
        half_widths: DVector::from_vec(vec![0.4, 0.1]),
    };
    let rep = fixed_point(&sys, &a0, 0.01, &sigma, 1e-14, 50).unwrap();
    assert!(!rep.flags.box_in_caps);
    assert!(!rep.flags.all());
    assert!(rep.a_matrix.is_none());
}

#[test]
fn inverse_mode_parsing() {
    assert_eq!("approx".parse::<InverseMode>().unwrap(), InverseMode::Approx);
    assert_eq!("exact".parse::<InverseMode>().unwrap(), InverseMode::Exact);
    assert!("fast".parse::<InverseMode>().is_err());
    assert_eq!(InverseMode::default().as_str(), "approx");
}

#[test]
fn estimator_initial_values_and_monotone_m() {
    let sys = Arc::new(Toy::new(true, 0.1));
    let flow = build_flow(&sys, 1.0, FlowSource::Integrate, &cfg()).unwrap();
    let a0 = a0_build(&*sys, &flow, 30, 10, true, InterpMode::Cubic).unwrap();
    let eps = 0.01;
    let sigma = default_sigma_box(&*sys, &a0, eps).unwrap();
    let fp = fixed_point(&*sys, &a0, eps, &sigma, 1e-14, 100).unwrap();
    let icfg = IntegratorConfig::new(1e-10, 1e-10).unwrap();
    assert!(estimator_ode(&*sys, &a0, eps, &fp.l0, InverseMode::Approx, &icfg, 64).is_err());
    let est = estimator_ode(&*sys, &a0, eps, &fp.l0, InverseMode::Exact, &icfg, 64).unwrap();
    assert_eq!(est.samples.len(), 65);
    assert_eq!(est.samples[0].n, fp.l0.as_slice());
    assert_eq!(est.samples[0].m, vec![0.0, 0.0]);
    assert_eq!(est.samples.last().unwrap().tau, 1.0);
    for w in est.samples.windows(2) {
        for i in 0..2 {
            assert!(w[1].m[i] >= w[0].m[i]);
            assert!(w[1].m[i] >= 0.0);
        }
    }
    assert!(est.cap_margin[0] > 0.0 && est.cap_margin[1].is_infinite());
    assert!(est.lower_margin.iter().all(|&x| x > 0.0));
    assert!(est.min_det > 0.0);
    assert!(est.n_at(1.5).is_err());
}

#[test]
fn estimator_reports_blow_up() {
    let sys = Arc::new(Toy::new(true, 0.1));
    let flow = build_flow(&sys, 1.0, FlowSource::Integrate, &cfg()).unwrap();
    let a0 = a0_build(&*sys, &flow, 30, 10, true, InterpMode::Cubic).unwrap();
    let eps = 3.0;
    let l0 = DVector::from_vec(vec![3.0, 1.0]);
    let icfg = IntegratorConfig::new(1e-10, 1e-10).unwrap();
    let err = estimator_ode(&*sys, &a0, eps, &l0, InverseMode::Exact, &icfg, 16).unwrap_err();
    assert!(matches!(err, Error::EstimatorBlowUp { .. }), "{err:?}");
}
