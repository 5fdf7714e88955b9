//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! The driver works on flat `f64` slices so that the same code serves the
//! three-component element equations, the six-component estimator system
//! and the nine-component fundamental-matrix system without allocation in
//! the right-hand side.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th-order weights and the embedded 4th-order ones.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (Shampine's continuous extension).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Tolerances and budget for [`integrate_ivp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Upper bound on the step length, if any.
    pub max_step: Option<f64>,
}

impl IntegratorConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            initial_step: None,
            max_steps: 10_000_000,
            max_step: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_initial_step(mut self, h: f64) -> Self {
        self.initial_step = Some(h);
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "absolute tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "relative tolerance must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max step count must be positive".into()));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("initial step must be positive, got {h}")));
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::InvalidArgument(format!("max step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            initial_step: None,
            max_steps: 10_000_000,
            max_step: None,
        }
    }
}

/// One accepted step, handed to step observers.
pub struct StepView<'a> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64],
    pub y1: &'a [f64],
    dense: &'a [f64],
}

impl StepView<'_> {
    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    /// Continuous extension inside the step; `t` must lie in `[t0, t1]`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        dense_eval(self.t0, self.t1, self.dense, self.y0.len(), t, out);
    }
}

/// Observer verdict after each accepted step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepControl {
    Continue,
    Stop(String),
}

/// Summary of a streamed integration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub t_final: f64,
    /// Set when the observer asked to stop early.
    pub stopped: Option<GuardStop>,
}

/// Where and why a guard halted an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardStop {
    pub t: f64,
    pub reason: String,
}

fn dense_eval(t0: f64, t1: f64, dense: &[f64], n: usize, t: f64, out: &mut [f64]) {
    let h = t1 - t0;
    let theta = (t - t0) / h;
    let theta1 = 1.0 - theta;
    for i in 0..n {
        let r1 = dense[i];
        let r2 = dense[n + i];
        let r3 = dense[2 * n + i];
        let r4 = dense[3 * n + i];
        let r5 = dense[4 * n + i];
        out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = y0.len();
    let mut acc = 0.0;
    for i in 0..n {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let q = err[i] / sc;
        acc += q * q;
    }
    (acc / n as f64).sqrt()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Starting step from the Hairer–Nørsett–Wanner heuristic.
fn initial_step<F>(field: &mut F, t0: f64, y0: &[f64], f0: &[f64], cfg: &IntegratorConfig, span: f64) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let sc: Vec<f64> = y0.iter().map(|y| cfg.abs_tol + cfg.rel_tol * y.abs()).collect();
    let rms = |v: &[f64]| -> f64 { (v.iter().zip(&sc).map(|(x, s)| (x / s) * (x / s)).sum::<f64>() / n as f64).sqrt() };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    field(t0 + h0, &y1, &mut f1);
    if !all_finite(&f1) {
        return Ok(h0 * 1e-3);
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    let mut h = (100.0 * h0).min(h1).min(span);
    if let Some(hm) = cfg.max_step {
        h = h.min(hm);
    }
    Ok(h)
}

/// Integrate `y' = field(t, y)` over `span`, handing every accepted step to
/// `observer`. The observer may stop the run; the partial result is then
/// reported through [`IntegrationStats::stopped`].
pub fn integrate_with<F, O>(
    mut field: F,
    y0: &[f64],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<IntegrationStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(&StepView<'_>) -> StepControl,
{
    cfg.validate()?;
    let (t_start, t_end) = span;
    if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("empty integration span [{t_start}, {t_end}]")));
    }
    if y0.is_empty() {
        return Err(Error::InvalidArgument("empty initial state".into()));
    }
    if !all_finite(y0) {
        return Err(Error::InvalidArgument("non-finite initial state".into()));
    }

    let n = y0.len();
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut dense = vec![0.0; 5 * n];

    let mut t = t_start;
    field(t, &y, &mut k1);
    let mut evaluations = 1;
    if !all_finite(&k1) {
        return Err(Error::NonFiniteField { t });
    }

    let span_len = t_end - t_start;
    let mut h = match cfg.initial_step {
        Some(h) => h.min(span_len),
        None => {
            evaluations += 1;
            initial_step(&mut field, t, &y, &k1, cfg, span_len)?
        }
    };
    if let Some(hm) = cfg.max_step {
        h = h.min(hm);
    }

    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut last_rejected = false;

    loop {
        if accepted + rejected >= cfg.max_steps {
            return Err(Error::StepBudgetExhausted { max_steps: cfg.max_steps, t });
        }
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h <= f64::EPSILON * t.abs().max(1.0) * 4.0 {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        field(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        field(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        field(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        field(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_next = if last { t_end } else { t + h };
        field(t_next, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        field(t_next, &y_new, &mut k7);
        evaluations += 6;

        let stages_finite = all_finite(&k2)
            && all_finite(&k3)
            && all_finite(&k4)
            && all_finite(&k5)
            && all_finite(&k6)
            && all_finite(&k7)
            && all_finite(&y_new);

        let err_norm = if stages_finite {
            for i in 0..n {
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            error_norm(&y, &y_new, &err, cfg)
        } else {
            f64::INFINITY
        };

        if err_norm <= 1.0 {
            accepted += 1;
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = h * k1[i] - dy;
                dense[i] = y[i];
                dense[n + i] = dy;
                dense[2 * n + i] = bspl;
                dense[3 * n + i] = dy - h * k7[i] - bspl;
                dense[4 * n + i] =
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let view = StepView {
                t0: t,
                t1: t_next,
                y0: &y,
                y1: &y_new,
                dense: &dense,
            };
            let control = observer(&view);
            t = t_next;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);

            if let StepControl::Stop(reason) = control {
                return Ok(IntegrationStats {
                    accepted,
                    rejected,
                    evaluations,
                    t_final: t,
                    stopped: Some(GuardStop { t, reason }),
                });
            }
            if last {
                return Ok(IntegrationStats {
                    accepted,
                    rejected,
                    evaluations,
                    t_final: t,
                    stopped: None,
                });
            }
            let mut fac = if err_norm == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            if let Some(hm) = cfg.max_step {
                h = h.min(hm);
            }
            last_rejected = false;
        } else {
            if !stages_finite && !all_finite(&k1) {
                return Err(Error::NonFiniteField { t });
            }
            rejected += 1;
            last_rejected = true;
            let fac = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                0.1
            };
            h *= fac;
            if !stages_finite && h <= 1e-14 * span_len {
                return Err(Error::NonFiniteField { t });
            }
        }
    }
}

/// Dense-output trajectory returned by [`integrate_ivp`].
#[derive(Debug, Clone)]
pub struct SampledCurve {
    dim: usize,
    nodes: Vec<f64>,
    values: Vec<f64>,
    dense: Vec<f64>,
    guard_stop: Option<GuardStop>,
}

impl SampledCurve {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Step boundaries, strictly increasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn value_at_node(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().expect("curve has at least one node")
    }

    pub fn guard_stop(&self) -> Option<&GuardStop> {
        self.guard_stop.as_ref()
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let lo = self.t_start();
        let hi = self.t_end();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { x: t, lo, hi });
        }
        // index of the first node strictly greater than t
        let k = self.nodes.partition_point(|&x| x <= t);
        if k > 0 && self.nodes[k - 1] == t {
            out.copy_from_slice(self.value_at_node(k - 1));
            return Ok(());
        }
        let seg = k - 1;
        let n = self.dim;
        dense_eval(
            self.nodes[seg],
            self.nodes[seg + 1],
            &self.dense[seg * 5 * n..(seg + 1) * 5 * n],
            n,
            t,
            out,
        );
        Ok(())
    }
}

/// Integrate an initial-value problem and keep the full dense output.
///
/// When `guard` returns `Some(reason)` after an accepted step, integration
/// stops there and the partial trajectory is returned with
/// [`SampledCurve::guard_stop`] set.
pub fn integrate_ivp<F>(
    field: F,
    y0: &[f64],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    mut guard: Option<&mut dyn FnMut(f64, &[f64]) -> Option<String>>,
) -> Result<SampledCurve>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut nodes = vec![span.0];
    let mut values = y0.to_vec();
    let mut dense = Vec::new();
    let stats = integrate_with(field, y0, span, cfg, |step| {
        nodes.push(step.t1);
        values.extend_from_slice(step.y1);
        dense.extend_from_slice(step.dense);
        match guard.as_mut() {
            Some(g) => match g(step.t1, step.y1) {
                Some(reason) => StepControl::Stop(reason),
                None => StepControl::Continue,
            },
            None => StepControl::Continue,
        }
    })?;
    Ok(SampledCurve {
        dim: n,
        nodes,
        values,
        dense,
        guard_stop: stats.stopped,
    })
}
