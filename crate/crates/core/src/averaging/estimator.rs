use std::cell::RefCell;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::{check_caps, AveragedFlow, CapRadius, PeriodicSystem};
use crate::error::{Error, Result};
use crate::numerics::interp::{equispaced_nodes, InterpMode, Interpolant, TableInterpolant};
use crate::numerics::ode::{integrate_ivp, IntegratorConfig, SampledCurve};
use crate::numerics::quadrature::{grid_max_on_torus_refined, torus_grid};

/// Interpolated zeroth-order bound `a₍₀₎(τ)`, one table per component.
#[derive(Debug, Clone)]
pub struct A0Table {
    nodes: Vec<f64>,
    values: Vec<Vec<f64>>,
    interps: Vec<TableInterpolant>,
    mode: InterpMode,
}

impl A0Table {
    /// `values[i][n]` is component `i` at `nodes[n]`.
    pub fn from_values(nodes: Vec<f64>, values: Vec<Vec<f64>>, mode: InterpMode) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("a0 table needs at least one component".into()));
        }
        let interps = values
            .iter()
            .map(|v| {
                if v.len() != nodes.len() {
                    return Err(Error::InvalidArgument(format!(
                        "component has {} values for {} nodes",
                        v.len(),
                        nodes.len()
                    )));
                }
                TableInterpolant::new(mode, &nodes, v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes,
            values,
            interps,
            mode,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_values(&self, component: usize) -> &[f64] {
        &self.values[component]
    }

    pub fn mode(&self) -> InterpMode {
        self.mode
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("at least two nodes")
    }

    fn check(&self, tau: f64) -> Result<()> {
        let hi = self.horizon();
        if tau >= self.nodes[0] && tau <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                x: tau,
                lo: self.nodes[0],
                hi,
            })
        }
    }

    pub fn eval(&self, tau: f64) -> Result<DVector<f64>> {
        self.check(tau)?;
        Ok(DVector::from_iterator(self.dim(), self.interps.iter().map(|p| p.eval(tau))))
    }

    pub fn derivative(&self, tau: f64) -> Result<DVector<f64>> {
        self.check(tau)?;
        Ok(DVector::from_iterator(self.dim(), self.interps.iter().map(|p| p.derivative(tau))))
    }
}

/// `max_ϑ |sⁱ(J(τ), ϑ) − (R(τ) s(I₀, 0) + K(τ))ⁱ|` for each component,
/// over a `q`-point grid, optionally refined.
fn a0_node_max<S>(sys: &S, flow: &AveragedFlow, s0: &DVector<f64>, tau: f64, q: usize, refine: bool) -> Result<Vec<f64>>
where
    S: PeriodicSystem + ?Sized,
{
    let d = sys.dim();
    let j = flow.j.eval(tau)?;
    let shift = flow.r.eval(tau)? * s0 + flow.k.eval(tau)?;
    if refine {
        return (0..d)
            .map(|i| grid_max_on_torus_refined(|th| (sys.s(&j, th)[i] - shift[i]).abs(), q))
            .collect();
    }
    let mut best = vec![f64::NEG_INFINITY; d];
    for th in torus_grid(q) {
        let v = sys.s(&j, th) - &shift;
        for i in 0..d {
            if !v[i].is_finite() {
                return Err(Error::NonFiniteValue { x: th });
            }
            best[i] = best[i].max(v[i].abs());
        }
    }
    Ok(best)
}

/// Tabulate `a₍₀₎ⁱ(τₙ) = maxϑ |(s(J(τₙ), ϑ) − R(τₙ) s(I₀, 0) − K(τₙ))ⁱ|` at
/// `τₙ = U n / N`, `n = 0..=N`, with the maximum taken over the `Q`-point
/// grid (optionally refined by golden-section search), then interpolate.
pub fn a0_build<S>(sys: &S, flow: &AveragedFlow, q: usize, n: usize, refine: bool, mode: InterpMode) -> Result<A0Table>
where
    S: PeriodicSystem + ?Sized,
{
    if q < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("need Q >= 2 and N >= 2, got Q = {q}, N = {n}")));
    }
    let d = sys.dim();
    let nodes = equispaced_nodes(0.0, flow.horizon, n + 1);
    let s0 = sys.s(&sys.initial(), 0.0);
    let mut values = vec![Vec::with_capacity(nodes.len()); d];
    for &tau in &nodes {
        for (col, m) in values.iter_mut().zip(a0_node_max(sys, flow, &s0, tau, q, refine)?) {
            col.push(m);
        }
    }
    A0Table::from_values(nodes, values, mode)
}

/// Diagnostic for the angle maximization: per component, the largest
/// shortfall of the table's node values below a bare `fine_q`-point grid
/// maximum. Zero or negative means the table never undershoots the fine
/// grid.
pub fn a0_grid_deficit<S>(sys: &S, flow: &AveragedFlow, a0: &A0Table, fine_q: usize) -> Result<Vec<f64>>
where
    S: PeriodicSystem + ?Sized,
{
    let d = sys.dim();
    let s0 = sys.s(&sys.initial(), 0.0);
    let mut deficit = vec![f64::NEG_INFINITY; d];
    for (k, &tau) in a0.nodes().iter().enumerate() {
        let fine = a0_node_max(sys, flow, &s0, tau, fine_q, false)?;
        for i in 0..d {
            deficit[i] = deficit[i].max(fine[i] - a0.node_values(i)[k]);
        }
    }
    Ok(deficit)
}

/// `α(τ, r) = a₍₀₎(τ) + a(τ, r)·r + ε b(τ, r)`.
pub fn alpha_eval<S>(sys: &S, a0: &A0Table, eps: f64, tau: f64, r: &DVector<f64>) -> Result<DVector<f64>>
where
    S: PeriodicSystem + ?Sized,
{
    check_caps(sys, tau, r)?;
    let bv = sys.bounds(tau, r)?;
    Ok(a0.eval(tau)? + &bv.a * r + eps * &bv.b)
}

/// `γⁱ(τ, r, ℓ) = cⁱ + dⁱⱼ ℓʲ + ½ eⁱⱼₖ ℓʲ ℓᵏ`.
pub fn gamma_eval<S>(sys: &S, tau: f64, r: &DVector<f64>, l: &DVector<f64>) -> Result<DVector<f64>>
where
    S: PeriodicSystem + ?Sized,
{
    check_caps(sys, tau, r)?;
    let bv = sys.bounds(tau, r)?;
    let mut g = &bv.c + &bv.d * l;
    for (i, e) in bv.e.iter().enumerate() {
        g[i] += 0.5 * l.dot(&(e * l));
    }
    Ok(g)
}

/// `∂α/∂r` at `(τ, r)`.
pub fn alpha_r_jacobian<S>(sys: &S, eps: f64, tau: f64, r: &DVector<f64>) -> Result<DMatrix<f64>>
where
    S: PeriodicSystem + ?Sized,
{
    check_caps(sys, tau, r)?;
    sys.alpha_r_partials(tau, r, eps)
}

/// Box `Π [ℓ*ⁱ − σⁱ, ℓ*ⁱ + σⁱ]` searched for the fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaBox {
    pub center: DVector<f64>,
    pub half_widths: DVector<f64>,
}

impl SigmaBox {
    pub fn contains(&self, l: &DVector<f64>) -> bool {
        l.iter()
            .zip(self.center.iter().zip(self.half_widths.iter()))
            .all(|(&x, (&c, &s))| x >= c - s && x <= c + s)
    }
}

/// `ℓ* = a₍₀₎(0) + ε b(0)` and `σⁱ = min(ℓ*ⁱ (1 − 10⁻⁹), 0.99 ρⁱ(0)/ε − ℓ*ⁱ)`.
pub fn default_sigma_box<S>(sys: &S, a0: &A0Table, eps: f64) -> Result<SigmaBox>
where
    S: PeriodicSystem + ?Sized,
{
    let d = sys.dim();
    let zero = DVector::zeros(d);
    let center = alpha_eval(sys, a0, eps, 0.0, &zero)?;
    let caps = sys.caps(0.0);
    let half_widths = DVector::from_iterator(
        d,
        center.iter().zip(&caps).map(|(&c, cap)| {
            let lower = c * (1.0 - 1e-9);
            match cap {
                CapRadius::Finite(rho) => lower.min(0.99 * rho / eps - c),
                CapRadius::Unbounded => lower,
            }
        }),
    );
    Ok(SigmaBox { center, half_widths })
}

/// Which hypotheses of the fixed-point statement were verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisFlags {
    /// The box lies inside `Π (0, ρⁱ(0)/ε)`.
    pub box_in_caps: bool,
    /// `ε 𝒜 < 1`.
    pub contraction: bool,
    /// `|α(0, εℓ*) − ℓ*|ⁱ + ε Aⁱⱼ σʲ < σⁱ`.
    pub self_map: bool,
    pub fixed_point_in_box: bool,
}

impl HypothesisFlags {
    pub fn all(&self) -> bool {
        self.box_in_caps && self.contraction && self.self_map && self.fixed_point_in_box
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub l0: DVector<f64>,
    pub iterations: usize,
    /// `‖α(0, εℓ₀) − ℓ₀‖∞`.
    pub residual: f64,
    pub sigma: SigmaBox,
    /// Sampled majorant `Aⁱⱼ` of `|∂αⁱ/∂rʲ(0, εℓ)|` over the box, inflated by 5%.
    pub a_matrix: Option<DMatrix<f64>>,
    /// `ε 𝒜`.
    pub contraction_bound: Option<f64>,
    /// `‖lₙ₊₁ − lₙ‖ / ‖lₙ − lₙ₋₁‖` along the iteration.
    pub observed_ratios: Vec<f64>,
    pub flags: HypothesisFlags,
}

const SIGMA_SAMPLES: usize = 9;
const A_INFLATION: f64 = 1.05;

fn sample_a_matrix<S>(sys: &S, eps: f64, sigma: &SigmaBox) -> Result<DMatrix<f64>>
where
    S: PeriodicSystem + ?Sized,
{
    let d = sys.dim();
    let mut a = DMatrix::<f64>::zeros(d, d);
    let total = SIGMA_SAMPLES.pow(d as u32);
    let mut l = DVector::zeros(d);
    for idx in 0..total {
        let mut rest = idx;
        for i in 0..d {
            let k = rest % SIGMA_SAMPLES;
            rest /= SIGMA_SAMPLES;
            let lo = sigma.center[i] - sigma.half_widths[i];
            l[i] = lo + 2.0 * sigma.half_widths[i] * k as f64 / (SIGMA_SAMPLES - 1) as f64;
        }
        let jac = alpha_r_jacobian(sys, eps, 0.0, &(eps * &l))?;
        a.zip_apply(&jac, |x, y| *x = x.max(y.abs()));
    }
    Ok(a * A_INFLATION)
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Contraction iteration `lₙ = α(0, ε lₙ₋₁)` from `l₁ = a₍₀₎(0)`, with the
/// hypotheses on `sigma` checked and recorded.
pub fn fixed_point<S>(
    sys: &S,
    a0: &A0Table,
    eps: f64,
    sigma: &SigmaBox,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointReport>
where
    S: PeriodicSystem + ?Sized,
{
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument(format!("need tol > 0 and max_iter > 0, got {tol}, {max_iter}")));
    }
    let d = sys.dim();
    let caps = sys.caps(0.0);
    let box_in_caps = (0..d).all(|i| {
        let lo = sigma.center[i] - sigma.half_widths[i];
        let hi = sigma.center[i] + sigma.half_widths[i];
        sigma.half_widths[i] > 0.0 && lo > 0.0 && hi < caps[i].as_f64() / eps
    });

    let (a_matrix, contraction_bound, self_map) = if box_in_caps {
        let a = sample_a_matrix(sys, eps, sigma)?;
        let cal_a = a.row_iter().map(|row| row.sum()).fold(0.0, f64::max);
        let at_center = alpha_eval(sys, a0, eps, 0.0, &(eps * &sigma.center))?;
        let spread = &a * &sigma.half_widths;
        let self_map = (0..d).all(|i| (at_center[i] - sigma.center[i]).abs() + eps * spread[i] < sigma.half_widths[i]);
        (Some(a), Some(eps * cal_a), self_map)
    } else {
        (None, None, false)
    };

    let mut l = a0.eval(0.0)?;
    let mut prev_delta: Option<f64> = None;
    let mut observed_ratios = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;
    while iterations < max_iter {
        let next = alpha_eval(sys, a0, eps, 0.0, &(eps * &l))?;
        iterations += 1;
        let delta = sup_norm(&(&next - &l));
        if let Some(p) = prev_delta {
            if p > 0.0 && delta > 0.0 {
                observed_ratios.push(delta / p);
            }
        }
        prev_delta = Some(delta);
        last_delta = delta;
        l = next;
        if delta < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FixedPointNotConverged {
            iterations,
            residual: last_delta,
        });
    }
    let residual = sup_norm(&(alpha_eval(sys, a0, eps, 0.0, &(eps * &l))? - &l));
    let flags = HypothesisFlags {
        box_in_caps,
        contraction: contraction_bound.is_some_and(|c| c < 1.0),
        self_map,
        fixed_point_in_box: sigma.contains(&l),
    };
    Ok(FixedPointReport {
        l0: l,
        iterations,
        residual,
        sigma: sigma.clone(),
        a_matrix,
        contraction_bound,
        observed_ratios,
        flags,
    })
}

/// How `(1 − ε ∂α/∂r)⁻¹` is obtained in the envelope ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseMode {
    /// The system's truncated series, when it provides one.
    #[default]
    Approx,
    Exact,
}

impl InverseMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InverseMode::Approx => "approx",
            InverseMode::Exact => "exact",
        }
    }
}

impl FromStr for InverseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approx" => Ok(InverseMode::Approx),
            "exact" => Ok(InverseMode::Exact),
            other => Err(Error::InvalidArgument(format!("unknown inverse mode '{other}' (expected approx|exact)"))),
        }
    }
}

/// One output sample of the envelope curves.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSample {
    pub tau: f64,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
}

/// Solution `(𝔪, 𝔫)` of the envelope ODE on `[0, U]`.
#[derive(Debug, Clone)]
pub struct EstimatorCurves {
    pub epsilon: f64,
    pub horizon: f64,
    pub l0: DVector<f64>,
    pub inverse_mode: InverseMode,
    pub samples: Vec<EstimatorSample>,
    /// Minimum over samples and steps of `ρⁱ(τ) − ε𝔫ⁱ(τ)`; infinite for
    /// unbounded caps.
    pub cap_margin: Vec<f64>,
    /// Minimum over samples and steps of `ε𝔫ⁱ(τ)`.
    pub lower_margin: Vec<f64>,
    /// Minimum of `det(1 − ε ∂α/∂r)`.
    pub min_det: f64,
    pub steps: usize,
    curve: SampledCurve,
}

impl EstimatorCurves {
    pub fn dim(&self) -> usize {
        self.l0.len()
    }

    /// `(𝔪(τ), 𝔫(τ))`.
    pub fn eval(&self, tau: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.dim();
        let y = self.curve.eval(tau)?;
        Ok((DVector::from_column_slice(&y[..d]), DVector::from_column_slice(&y[d..])))
    }

    pub fn n_at(&self, tau: f64) -> Result<DVector<f64>> {
        Ok(self.eval(tau)?.1)
    }

    pub fn m_at(&self, tau: f64) -> Result<DVector<f64>> {
        Ok(self.eval(tau)?.0)
    }

    pub fn curve(&self) -> &SampledCurve {
        &self.curve
    }
}

struct Margins {
    cap: Vec<f64>,
    lower: Vec<f64>,
    min_det: f64,
}

impl Margins {
    fn new(d: usize) -> Self {
        Self {
            cap: vec![f64::INFINITY; d],
            lower: vec![f64::INFINITY; d],
            min_det: f64::INFINITY,
        }
    }

    /// Updates the margins and reports the first violated condition.
    fn observe<S: PeriodicSystem + ?Sized>(&mut self, sys: &S, eps: f64, tau: f64, n: &[f64]) -> Option<String> {
        let caps = sys.caps(tau);
        for (i, cap) in caps.iter().enumerate() {
            let en = eps * n[i];
            self.lower[i] = self.lower[i].min(en);
            self.cap[i] = self.cap[i].min(cap.as_f64() - en);
            if !(en > 0.0) {
                return Some(format!("component {i}: eps*n = {en} is not positive"));
            }
            if !cap.admits(en) {
                return Some(format!("component {i}: eps*n = {en} reached the cap {}", cap.as_f64()));
            }
        }
        let r = eps * DVector::from_column_slice(n);
        match sys.alpha_r_partials(tau, &r, eps) {
            Ok(jac) => {
                let det = (DMatrix::identity(n.len(), n.len()) - eps * jac).determinant();
                self.min_det = self.min_det.min(det);
                if !(det > 0.0) {
                    return Some(format!("det(1 - eps dalpha/dr) = {det}"));
                }
                None
            }
            Err(e) => Some(e.to_string()),
        }
    }
}

/// Integrate the envelope ODE
/// `d𝔪/dτ = P γ(ε𝔫, 𝔫)`,
/// `d𝔫/dτ = (1 − ε ∂α/∂r)⁻¹ (∂α/∂τ + ε R P γ + ε (dR/dτ) 𝔪)`
/// from `𝔪(0) = 0`, `𝔫(0) = ℓ₀` to the horizon of `a0`, with
/// `samples + 1` equally spaced output samples.
pub fn estimator_ode<S>(
    sys: &S,
    a0: &A0Table,
    eps: f64,
    l0: &DVector<f64>,
    inverse: InverseMode,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<EstimatorCurves>
where
    S: PeriodicSystem + ?Sized,
{
    let d = sys.dim();
    if l0.len() != d || a0.dim() != d {
        return Err(Error::InvalidArgument("dimension mismatch between system, a0 and l0".into()));
    }
    if samples < 1 {
        return Err(Error::InvalidArgument("need at least one output sample".into()));
    }
    if inverse == InverseMode::Approx && sys.approx_inverse(eps, &DVector::zeros(d)).is_none() {
        return Err(Error::InvalidArgument("system provides no approximate inverse".into()));
    }
    let u = a0.horizon();
    let eye = DMatrix::<f64>::identity(d, d);
    let failure: RefCell<Option<(f64, String)>> = RefCell::new(None);

    let rhs = |tau: f64, y: &[f64]| -> Result<DVector<f64>> {
        let m = DVector::from_column_slice(&y[..d]);
        let n = DVector::from_column_slice(&y[d..]);
        let r = eps * &n;
        let g = gamma_eval(sys, tau, &r, &n)?;
        let p = sys.p_bound(tau);
        let rb = sys.r_bound(tau);
        let drb = sys.r_bound_derivative(tau);
        let pg = &p * &g;
        let jac = sys.alpha_r_partials(tau, &r, eps)?;
        let lhs = &eye - eps * &jac;
        let det = lhs.determinant();
        if !(det > 0.0) {
            return Err(Error::EstimatorBlowUp {
                tau,
                reason: format!("det(1 - eps dalpha/dr) = {det}"),
            });
        }
        let inv = match inverse {
            InverseMode::Approx => sys.approx_inverse(eps, &r).expect("checked above"),
            InverseMode::Exact => lhs.try_inverse().ok_or_else(|| Error::EstimatorBlowUp {
                tau,
                reason: "singular matrix".into(),
            })?,
        };
        let source = a0.derivative(tau.min(u))? + sys.alpha_rest_tau_derivative(tau, &r, eps)? + eps * (&rb * &pg) + eps * (&drb * &m);
        let dn = inv * source;
        let mut out = pg;
        out.extend(dn.iter().copied());
        Ok(out)
    };

    let field = |tau: f64, y: &[f64], dy: &mut [f64]| match rhs(tau, y) {
        Ok(v) => dy.copy_from_slice(v.as_slice()),
        Err(e) => {
            let mut slot = failure.borrow_mut();
            if slot.is_none() {
                *slot = Some((tau, e.to_string()));
            }
            dy.fill(f64::NAN);
        }
    };

    let mut margins = Margins::new(d);
    let mut y0 = vec![0.0; d];
    y0.extend(l0.iter().copied());
    if let Some(reason) = margins.observe(sys, eps, 0.0, l0.as_slice()) {
        return Err(Error::EstimatorBlowUp { tau: 0.0, reason });
    }
    let mut guard = |tau: f64, y: &[f64]| margins.observe(sys, eps, tau, &y[d..]);
    let result = integrate_ivp(field, &y0, (0.0, u), cfg, Some(&mut guard));
    let curve = match result {
        Ok(c) => c,
        Err(Error::NonFiniteField { t }) => {
            let (tau, reason) = failure.borrow_mut().take().unwrap_or((t, "non-finite right-hand side".into()));
            return Err(Error::EstimatorBlowUp { tau, reason });
        }
        Err(e) => return Err(e),
    };
    if let Some(stop) = curve.guard_stop() {
        return Err(Error::EstimatorBlowUp {
            tau: stop.t,
            reason: stop.reason.clone(),
        });
    }

    let mut out = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let tau = if k == samples { u } else { u * k as f64 / samples as f64 };
        let y = curve.eval(tau)?;
        if let Some(reason) = margins.observe(sys, eps, tau, &y[d..]) {
            return Err(Error::EstimatorBlowUp { tau, reason });
        }
        out.push(EstimatorSample {
            tau,
            m: y[..d].to_vec(),
            n: y[d..].to_vec(),
        });
    }
    Ok(EstimatorCurves {
        epsilon: eps,
        horizon: u,
        l0: l0.clone(),
        inverse_mode: inverse,
        samples: out,
        cap_margin: margins.cap,
        lower_margin: margins.lower,
        min_det: margins.min_det,
        steps: curve.nodes().len() - 1,
        curve,
    })
}
