use orbavg::averaging::InverseMode;
use orbavg::j2problem::J2Config;
use orbavg::numerics::InterpMode;
use orbavg::runner::{run_compare, run_n_operation, RunConfig};
use proptest::prelude::*;

fn short(problem: J2Config, orbits: f64) -> RunConfig {
    RunConfig {
        sample_count: 128,
        compare_points: 256,
        ..RunConfig::new(problem.with_orbits(orbits))
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let cfg = short(J2Config::cosb(), 1000.0);
    let a = run_n_operation(&cfg).unwrap();
    let b = run_n_operation(&cfg).unwrap();
    assert_eq!(a.curves.samples, b.curves.samples);
    assert_eq!(a.fixed_point, b.fixed_point);
}

#[test]
fn exact_and_approximate_inverse_agree_to_second_order() {
    let approx = run_n_operation(&short(J2Config::polar(), 3000.0)).unwrap();
    let exact = run_n_operation(&RunConfig {
        inverse_mode: InverseMode::Exact,
        ..short(J2Config::polar(), 3000.0)
    })
    .unwrap();
    let eps = J2Config::polar().epsilon;
    for (a, b) in approx.curves.samples.iter().zip(&exact.curves.samples) {
        for i in 0..3 {
            assert!((a.n[i] - b.n[i]).abs() <= 10.0 * eps * eps * b.n[i].abs().max(1.0), "{a:?} {b:?}");
        }
    }
}

#[test]
fn lagrange_interpolation_works_on_a_coarse_table() {
    let base = short(J2Config::polar(), 1000.0);
    let coarse = J2Config {
        tau_grid: 8,
        ..base.problem
    };
    let lagrange = run_n_operation(&RunConfig {
        interp_mode: InterpMode::Lagrange,
        problem: coarse,
        ..base
    })
    .unwrap();
    let cubic = run_n_operation(&RunConfig { problem: coarse, ..base }).unwrap();
    assert!(lagrange.hypotheses_hold());
    let tau = base.problem.horizon() / 2.0;
    let (a, b) = (lagrange.curves.n_at(tau).unwrap(), cubic.curves.n_at(tau).unwrap());
    assert!((&a - &b).amax() < 0.05 * b.amax(), "{a} {b}");
}

#[test]
fn exact_inverse_also_dominates() {
    let run = run_compare(&RunConfig {
        inverse_mode: InverseMode::Exact,
        ..short(J2Config::cosb(), 500.0)
    })
    .unwrap();
    assert!(run.report.all_dominated(), "{:?}", run.report.max_ratio);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn envelopes_are_positive_and_m_is_nondecreasing(
        p0 in 1.8f64..3.5,
        e0 in 0.2f64..0.85,
        y0 in -3.0f64..3.0,
    ) {
        let problem = J2Config { p0, e0, y0, ..J2Config::polar() };
        let n = run_n_operation(&short(problem, 500.0)).unwrap();
        prop_assert!(n.hypotheses_hold());
        prop_assert!(n.fixed_point.residual < 1e-10);
        let first = &n.curves.samples[0];
        prop_assert_eq!(&first.n, &n.fixed_point.l0.iter().copied().collect::<Vec<_>>());
        for w in n.curves.samples.windows(2) {
            for i in 0..3 {
                prop_assert!(w[1].n[i] > 0.0);
                prop_assert!(w[1].m[i] >= w[0].m[i]);
            }
        }
    }

    #[test]
    fn short_runs_dominate_for_random_elements(
        p0 in 2.0f64..3.5,
        e0 in 0.3f64..0.8,
        y0 in -3.0f64..3.0,
    ) {
        let problem = J2Config { p0, e0, y0, ..J2Config::polar() };
        let run = run_compare(&short(problem, 200.0)).unwrap();
        prop_assert!(run.report.all_dominated(), "{:?}", run.report.max_ratio);
    }
}
