//! End-to-end operations on the J2 problem: the envelope pipeline, the
//! direct integration of the rescaled error, and their comparison.

use std::f64::consts::PI;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::averaging::{
    a0_build, a0_grid_deficit, build_flow, default_sigma_box, estimator_ode, fixed_point, A0Table, EstimatorCurves, FixedPointReport,
    FlowSource, InverseMode, PeriodicSystem, VectorPath,
};
use crate::error::{Error, Result};
use crate::j2problem::{J2Config, J2System};
use crate::numerics::{integrate_ivp, InterpMode, IntegratorConfig, SampledCurve};

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub problem: J2Config,
    pub rk_abs_tol: f64,
    pub rk_rel_tol: f64,
    pub inverse_mode: InverseMode,
    pub interp_mode: InterpMode,
    /// Refine the grid maximum over the angle.
    pub theta_refine: bool,
    /// Number of output intervals of the estimator curves.
    pub sample_count: usize,
    /// Number of equally spaced comparison points.
    pub compare_points: usize,
    /// Relative slack of the dominance check, `|L| ≤ (1 + slack) 𝔫`.
    pub slack: f64,
    /// Largest horizon in orbits the L-operation will attempt.
    pub l_orbit_budget: f64,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
}

impl RunConfig {
    pub fn new(problem: J2Config) -> Self {
        Self {
            problem,
            rk_abs_tol: 1e-10,
            rk_rel_tol: 1e-10,
            inverse_mode: InverseMode::Approx,
            interp_mode: InterpMode::Cubic,
            theta_refine: true,
            sample_count: 2048,
            compare_points: 2048,
            slack: 0.0,
            l_orbit_budget: 10000.0,
            fixed_point_tol: 1e-12,
            fixed_point_max_iter: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.integrator()?;
        if self.sample_count < 1 || self.compare_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "need sample_count >= 1 and compare_points >= 2, got {} and {}",
                self.sample_count, self.compare_points
            )));
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(Error::InvalidArgument(format!("slack must be nonnegative, got {}", self.slack)));
        }
        if !(self.l_orbit_budget > 0.0) {
            return Err(Error::InvalidArgument(format!("l_orbit_budget must be positive, got {}", self.l_orbit_budget)));
        }
        if !(self.fixed_point_tol > 0.0) || self.fixed_point_max_iter == 0 {
            return Err(Error::InvalidArgument("fixed-point tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        Ok(IntegratorConfig::new(self.rk_abs_tol, self.rk_rel_tol)?.with_max_steps(50_000_000))
    }
}

/// Output of the N-operation.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub a0: A0Table,
    pub fixed_point: FixedPointReport,
    pub curves: EstimatorCurves,
    pub elapsed: Duration,
    /// Largest shortfall of the `a₍₀₎` node values below a bare
    /// [`FINE_THETA_GRID`]-point angle grid, per component. Not timed.
    pub a0_deficit: Vec<f64>,
}

pub const FINE_THETA_GRID: usize = 3000;

impl RunArtifacts {
    pub fn hypotheses_hold(&self) -> bool {
        self.fixed_point.flags.all()
    }
}

/// Output of the L-operation, with `𝔱` in orbits as the independent
/// variable.
#[derive(Debug, Clone)]
pub struct LCurve {
    pub curve: SampledCurve,
    pub elapsed: Duration,
}

/// Envelope pipeline: `a₍₀₎` table, fixed point `ℓ₀`, envelope ODE.
pub fn run_n_operation(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let start = Instant::now();
    let sys = Arc::new(J2System::new(config.problem)?);
    let eps = config.problem.epsilon;
    let cfg = config.integrator()?;
    let flow = build_flow(&sys, config.problem.horizon(), FlowSource::PreferClosed, &cfg)?;
    let a0 = a0_build(
        sys.as_ref(),
        &flow,
        config.problem.theta_grid,
        config.problem.tau_grid,
        config.theta_refine,
        config.interp_mode,
    )?;
    let sigma = default_sigma_box(sys.as_ref(), &a0, eps)?;
    let report = fixed_point(sys.as_ref(), &a0, eps, &sigma, config.fixed_point_tol, config.fixed_point_max_iter)?;
    let curves = estimator_ode(sys.as_ref(), &a0, eps, &report.l0, config.inverse_mode, &cfg, config.sample_count)?;
    let elapsed = start.elapsed();
    let a0_deficit = a0_grid_deficit(sys.as_ref(), &flow, &a0, FINE_THETA_GRID)?;
    Ok(RunArtifacts {
        config: *config,
        a0,
        fixed_point: report,
        curves,
        elapsed,
        a0_deficit,
    })
}

/// Integrate `dL/d𝔱 = f(J(ε𝔱) + εL, 2π𝔱) − f̄(J(ε𝔱))`, `L(0) = 0`, on
/// `[0, orbits]`.
pub fn error_system<S>(sys: &S, j: &VectorPath, eps: f64, orbits: f64, cfg: &IntegratorConfig) -> Result<SampledCurve>
where
    S: PeriodicSystem + ?Sized,
{
    if orbits * eps > j.horizon() * (1.0 + 1e-12) {
        return Err(Error::MismatchedHorizons(format!(
            "averaged solution covers tau <= {}, need {}",
            j.horizon(),
            orbits * eps
        )));
    }
    let d = sys.dim();
    let mut failure = None;
    let mut shifted = DVector::zeros(d);
    let field = |t: f64, l: &[f64], dl: &mut [f64]| {
        let tau = (eps * t).min(j.horizon());
        let jt = match j.eval(tau) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                dl.fill(f64::NAN);
                return;
            }
        };
        for i in 0..d {
            shifted[i] = jt[i] + eps * l[i];
        }
        let f = sys.field(&shifted, 2.0 * PI * t);
        let fbar = sys.averaged_field(&jt);
        for i in 0..d {
            dl[i] = f[i] - fbar[i];
        }
    };
    let curve = integrate_ivp(field, &vec![0.0; d], (0.0, orbits), cfg, None);
    match (failure, curve) {
        (Some(e), _) => Err(e),
        (None, c) => c,
    }
}

/// Rescaled error `L = (I − J)/ε` of the J2 problem over the configured
/// horizon.
pub fn run_l_operation(config: &RunConfig) -> Result<LCurve> {
    config.validate()?;
    let orbits = config.problem.orbits;
    if orbits > config.l_orbit_budget {
        return Err(Error::BudgetExceeded(format!(
            "L-operation over {orbits} orbits exceeds the budget of {} orbits",
            config.l_orbit_budget
        )));
    }
    let start = Instant::now();
    let sys = J2System::new(config.problem)?;
    let p = config.problem;
    let j = VectorPath::from_fn(p.horizon(), move |tau| {
        DVector::from_column_slice(crate::j2problem::averaged_solution(p.p0, p.e0, p.y0, tau).as_slice())
    });
    let curve = error_system(&sys, &j, p.epsilon, orbits, &config.integrator()?)?;
    Ok(LCurve {
        curve,
        elapsed: start.elapsed(),
    })
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub t_orbits: f64,
    pub abs_l: Vec<f64>,
    pub envelope: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Rows on the equally spaced grid.
    pub rows: Vec<ComparisonRow>,
    /// Per component: `|Lⁱ| ≤ (1 + slack) 𝔫ⁱ` at every checked point.
    pub dominance: Vec<bool>,
    /// Per component: largest `|Lⁱ(𝔱)| / 𝔫ⁱ(ε𝔱)`.
    pub max_ratio: Vec<f64>,
    /// Per component: first `𝔱` where the check fails.
    pub first_violation: Vec<Option<f64>>,
    /// Grid points plus every integrator node of `L`.
    pub checked_points: usize,
    pub slack: f64,
}

impl ComparisonReport {
    pub fn all_dominated(&self) -> bool {
        self.dominance.iter().all(|&b| b)
    }
}

/// Check `|Lⁱ(𝔱)| ≤ 𝔫ⁱ(ε𝔱)` on a grid of `points` equally spaced values of
/// `𝔱 ∈ [0, U/ε)` and at every node of `l`.
pub fn compare(
    estimator: &EstimatorCurves,
    l: &SampledCurve,
    orbits: f64,
    points: usize,
    slack: f64,
) -> Result<ComparisonReport> {
    let eps = estimator.epsilon;
    let d = estimator.dim();
    let t_end = estimator.horizon / eps;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    if !close(t_end, orbits) || !close(l.t_end(), orbits) || l.t_start() != 0.0 || l.dim() != d {
        return Err(Error::MismatchedHorizons(format!(
            "envelope covers {t_end} orbits, L covers [{}, {}] orbits in dimension {}, requested {orbits} in dimension {d}",
            l.t_start(),
            l.t_end(),
            l.dim()
        )));
    }
    if points < 1 {
        return Err(Error::InvalidArgument("need at least one comparison point".into()));
    }
    let mut dominance = vec![true; d];
    let mut max_ratio = vec![0.0f64; d];
    let mut first_violation: Vec<Option<f64>> = vec![None; d];
    let mut check = |t: f64, lv: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let tau = (eps * t).min(estimator.horizon);
        let n = estimator.n_at(tau)?;
        let abs_l: Vec<f64> = lv.iter().map(|x| x.abs()).collect();
        for i in 0..d {
            let ratio = if n[i] > 0.0 {
                abs_l[i] / n[i]
            } else if abs_l[i] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_ratio[i] = max_ratio[i].max(ratio);
            if !(abs_l[i] <= (1.0 + slack) * n[i]) {
                dominance[i] = false;
                if first_violation[i].map_or(true, |t0| t < t0) {
                    first_violation[i] = Some(t);
                }
            }
        }
        Ok((abs_l, n.iter().copied().collect()))
    };
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let t = orbits * k as f64 / points as f64;
        let lv = l.eval(t)?;
        let (abs_l, envelope) = check(t, &lv)?;
        rows.push(ComparisonRow {
            t_orbits: t,
            abs_l,
            envelope,
        });
    }
    let mut checked = points;
    for (k, &t) in l.nodes().iter().enumerate() {
        if t < orbits {
            check(t, l.value_at_node(k))?;
            checked += 1;
        }
    }
    Ok(ComparisonReport {
        rows,
        dominance,
        max_ratio,
        first_violation,
        checked_points: checked,
        slack,
    })
}

/// Result of running both operations and comparing them.
#[derive(Debug, Clone)]
pub struct CompareRun {
    pub n: RunArtifacts,
    pub l: LCurve,
    pub report: ComparisonReport,
}

/// Run the N- and L-operations on separate threads, then compare.
pub fn run_compare(config: &RunConfig) -> Result<CompareRun> {
    config.validate()?;
    let (n, l) = thread::scope(|s| {
        let l = s.spawn(|| run_l_operation(config));
        let n = run_n_operation(config);
        (n, l.join().unwrap_or_else(|_| Err(Error::InvalidArgument("L-operation thread panicked".into()))))
    });
    let (n, l) = (n?, l?);
    let report = compare(&n.curves, &l.curve, config.problem.orbits, config.compare_points, config.slack)?;
    Ok(CompareRun { n, l, report })
}
