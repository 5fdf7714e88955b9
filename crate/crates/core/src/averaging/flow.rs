use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::PeriodicSystem;
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate_ivp, IntegratorConfig, SampledCurve};

const DET_FLOOR: f64 = 1e-12;

type VecFn = dyn Fn(f64) -> DVector<f64> + Send + Sync;
type MatFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;

/// A vector-valued function of slow time on `[0, horizon]`.
#[derive(Clone)]
pub struct VectorPath {
    horizon: f64,
    f: Arc<VecFn>,
}

impl VectorPath {
    pub fn from_fn<F>(horizon: f64, f: F) -> Self
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            horizon,
            f: Arc::new(f),
        }
    }

    pub fn from_curve(curve: SampledCurve) -> Self {
        let horizon = curve.t_end();
        Self::from_fn(horizon, move |t| {
            DVector::from_vec(curve.eval(t).expect("evaluation range checked by VectorPath"))
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eval(&self, tau: f64) -> Result<DVector<f64>> {
        if !(tau >= 0.0 && tau <= self.horizon) {
            return Err(Error::OutOfRange {
                x: tau,
                lo: 0.0,
                hi: self.horizon,
            });
        }
        Ok((self.f)(tau))
    }
}

impl std::fmt::Debug for VectorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorPath").field("horizon", &self.horizon).finish()
    }
}

/// A square-matrix-valued function of slow time on `[0, horizon]`.
#[derive(Clone)]
pub struct MatrixPath {
    horizon: f64,
    f: Arc<MatFn>,
}

impl MatrixPath {
    pub fn from_fn<F>(horizon: f64, f: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            horizon,
            f: Arc::new(f),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eval(&self, tau: f64) -> Result<DMatrix<f64>> {
        if !(tau >= 0.0 && tau <= self.horizon) {
            return Err(Error::OutOfRange {
                x: tau,
                lo: 0.0,
                hi: self.horizon,
            });
        }
        Ok((self.f)(tau))
    }
}

impl std::fmt::Debug for MatrixPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixPath").field("horizon", &self.horizon).finish()
    }
}

/// Whether closed forms supplied by the system are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowSource {
    #[default]
    PreferClosed,
    Integrate,
}

/// Averaged solution `J` with its fundamental matrix `R`, the inverse and
/// the particular solution `K`.
#[derive(Debug, Clone)]
pub struct AveragedFlow {
    pub horizon: f64,
    pub j: VectorPath,
    pub r: MatrixPath,
    pub r_inv: MatrixPath,
    pub k: VectorPath,
}

fn check_horizon(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("horizon must be positive and finite, got {u}")))
    }
}

/// Solve `dJ/dτ = f̄(J)`, `J(0) = I₀` on `[0, u]`.
pub fn averaged_solution<S>(sys: &Arc<S>, u: f64, source: FlowSource, cfg: &IntegratorConfig) -> Result<VectorPath>
where
    S: PeriodicSystem + Send + Sync + 'static,
{
    check_horizon(u)?;
    let i0 = sys.initial();
    if !sys.in_domain(&i0) {
        return Err(Error::AveragedFlowLeftDomain { tau: 0.0 });
    }
    if source == FlowSource::PreferClosed && sys.closed_averaged(0.0).is_some() {
        let s = Arc::clone(sys);
        let path = VectorPath::from_fn(u, move |t| s.closed_averaged(t).expect("closed form available"));
        return Ok(path);
    }
    let d = sys.dim();
    let field = |_: f64, y: &[f64], dy: &mut [f64]| {
        let fb = sys.averaged_field(&DVector::from_column_slice(y));
        dy.copy_from_slice(fb.as_slice());
    };
    let mut guard = |_: f64, y: &[f64]| {
        if sys.in_domain(&DVector::from_column_slice(y)) {
            None
        } else {
            Some("averaged solution left the domain".to_string())
        }
    };
    let curve = integrate_ivp(field, i0.as_slice(), (0.0, u), cfg, Some(&mut guard))?;
    debug_assert_eq!(curve.dim(), d);
    if let Some(stop) = curve.guard_stop() {
        return Err(Error::AveragedFlowLeftDomain { tau: stop.t });
    }
    Ok(VectorPath::from_curve(curve))
}

/// `R` and `R⁻¹` from `dR/dτ = (∂f̄/∂I)(J) R` and `dR⁻¹/dτ = −R⁻¹ (∂f̄/∂I)(J)`.
pub fn fundamental_matrices<S>(
    sys: &Arc<S>,
    j: &VectorPath,
    source: FlowSource,
    cfg: &IntegratorConfig,
) -> Result<(MatrixPath, MatrixPath)>
where
    S: PeriodicSystem + Send + Sync + 'static,
{
    let u = j.horizon();
    check_horizon(u)?;
    if source == FlowSource::PreferClosed && sys.closed_fundamental(0.0).is_some() {
        let s1 = Arc::clone(sys);
        let s2 = Arc::clone(sys);
        return Ok((
            MatrixPath::from_fn(u, move |t| s1.closed_fundamental(t).expect("closed form available").0),
            MatrixPath::from_fn(u, move |t| s2.closed_fundamental(t).expect("closed form available").1),
        ));
    }
    let d = sys.dim();
    let jj = j.clone();
    let field = |t: f64, y: &[f64], dy: &mut [f64]| {
        let a = sys.jac_fbar(&jj.eval(t.min(u)).expect("inside horizon"));
        let r = DMatrix::from_column_slice(d, d, &y[..d * d]);
        let ri = DMatrix::from_column_slice(d, d, &y[d * d..]);
        let dr = &a * r;
        let dri = -(ri * &a);
        dy[..d * d].copy_from_slice(dr.as_slice());
        dy[d * d..].copy_from_slice(dri.as_slice());
    };
    let eye = DMatrix::<f64>::identity(d, d);
    let mut y0 = eye.as_slice().to_vec();
    y0.extend_from_slice(eye.as_slice());
    let curve = integrate_ivp(field, &y0, (0.0, u), cfg, None)?;
    for k in 0..curve.nodes().len() {
        let r = DMatrix::from_column_slice(d, d, &curve.value_at_node(k)[..d * d]);
        let det = r.determinant();
        if !(det.abs() >= DET_FLOOR) {
            return Err(Error::SingularFundamentalMatrix {
                tau: curve.nodes()[k],
                det,
            });
        }
    }
    let curve = Arc::new(curve);
    let c1 = Arc::clone(&curve);
    let c2 = curve;
    Ok((
        MatrixPath::from_fn(u, move |t| {
            let v = c1.eval(t).expect("evaluation range checked by MatrixPath");
            DMatrix::from_column_slice(d, d, &v[..d * d])
        }),
        MatrixPath::from_fn(u, move |t| {
            let v = c2.eval(t).expect("evaluation range checked by MatrixPath");
            DMatrix::from_column_slice(d, d, &v[d * d..])
        }),
    ))
}

/// `K` from `dK/dτ = (∂f̄/∂I)(J) K + p̄(J)`, `K(0) = 0`.
pub fn particular_k<S>(sys: &Arc<S>, j: &VectorPath, source: FlowSource, cfg: &IntegratorConfig) -> Result<VectorPath>
where
    S: PeriodicSystem + Send + Sync + 'static,
{
    let u = j.horizon();
    check_horizon(u)?;
    if source == FlowSource::PreferClosed && sys.closed_k(0.0).is_some() {
        let s = Arc::clone(sys);
        return Ok(VectorPath::from_fn(u, move |t| s.closed_k(t).expect("closed form available")));
    }
    let d = sys.dim();
    let field = |t: f64, y: &[f64], dy: &mut [f64]| {
        let jt = j.eval(t.min(u)).expect("inside horizon");
        let k = DVector::from_column_slice(y);
        let dk = sys.jac_fbar(&jt) * k + sys.pbar(&jt);
        dy.copy_from_slice(dk.as_slice());
    };
    let curve = integrate_ivp(field, &vec![0.0; d], (0.0, u), cfg, None)?;
    Ok(VectorPath::from_curve(curve))
}

/// Averaged solution and variational data on `[0, u]`.
pub fn build_flow<S>(sys: &Arc<S>, u: f64, source: FlowSource, cfg: &IntegratorConfig) -> Result<AveragedFlow>
where
    S: PeriodicSystem + Send + Sync + 'static,
{
    let j = averaged_solution(sys, u, source, cfg)?;
    let (r, r_inv) = fundamental_matrices(sys, &j, source, cfg)?;
    let k = particular_k(sys, &j, source, cfg)?;
    Ok(AveragedFlow {
        horizon: u,
        j,
        r,
        r_inv,
        k,
    })
}
