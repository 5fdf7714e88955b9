//! First-order averaging machinery for `dI/d𝔱 = ε f(I, 2π𝔱)`.
//!
//! Given a [`PeriodicSystem`], this module computes the averaged flow and
//! its variational data, tabulates the zeroth-order bound `a₍₀₎`, finds the
//! starting value of the envelope by contraction and integrates the
//! envelope ODE whose solution `𝔫` bounds `|I − J| / ε`.

mod estimator;
mod flow;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use estimator::{
    a0_build, a0_grid_deficit, alpha_eval, alpha_r_jacobian, default_sigma_box, estimator_ode, fixed_point, gamma_eval, A0Table,
    EstimatorCurves, FixedPointReport, HypothesisFlags, InverseMode, SigmaBox,
};
pub use flow::{averaged_solution, build_flow, fundamental_matrices, particular_k, AveragedFlow, FlowSource, MatrixPath, VectorPath};

/// Radius of the admissible ball around the averaged solution in one
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapRadius {
    Finite(f64),
    Unbounded,
}

impl CapRadius {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            CapRadius::Finite(c) => x < c,
            CapRadius::Unbounded => true,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            CapRadius::Finite(c) => c,
            CapRadius::Unbounded => f64::INFINITY,
        }
    }
}

/// Values of the majorizing functions at one `(τ, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundValues {
    /// `a[(i, j)]`, coefficient of `rʲ` in the bound for component `i`.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: DMatrix<f64>,
    /// `e[i][(j, k)]`, symmetric in `(j, k)`.
    pub e: Vec<DMatrix<f64>>,
}

/// A one-frequency periodic system together with everything the envelope
/// construction needs. The angle is `ϑ = 2π𝔱`, with `ϑ₀ = 0`.
pub trait PeriodicSystem {
    fn dim(&self) -> usize;

    /// Initial slow variables `I₀`.
    fn initial(&self) -> DVector<f64>;

    fn field(&self, i: &DVector<f64>, theta: f64) -> DVector<f64>;

    fn averaged_field(&self, i: &DVector<f64>) -> DVector<f64>;

    /// Zero-mean solution of `2π ∂s/∂ϑ = f − f̄`.
    fn s(&self, i: &DVector<f64>, theta: f64) -> DVector<f64>;

    /// Average over `ϑ` of `(∂s/∂I) f`.
    fn pbar(&self, i: &DVector<f64>) -> DVector<f64>;

    fn jac_fbar(&self, i: &DVector<f64>) -> DMatrix<f64>;

    fn in_domain(&self, i: &DVector<f64>) -> bool;

    fn caps(&self, tau: f64) -> Vec<CapRadius>;

    /// Majorizing functions; `r` must lie in the cap region.
    fn bounds(&self, tau: f64, r: &DVector<f64>) -> Result<BoundValues>;

    /// Entrywise majorants of `R(τ)` and `R(τ)⁻¹`.
    fn r_bound(&self, tau: f64) -> DMatrix<f64>;
    fn p_bound(&self, tau: f64) -> DMatrix<f64>;

    fn r_bound_derivative(&self, tau: f64) -> DMatrix<f64> {
        let h = 1e-6 * tau.abs().max(1.0);
        let lo = (tau - h).max(0.0);
        (self.r_bound(tau + h) - self.r_bound(lo)) / (tau + h - lo)
    }

    /// `∂/∂r (a(τ, r)·r + ε b(τ, r))`, the `r`-Jacobian of `α` without the
    /// `a₍₀₎` part. Defaults to central differences of [`Self::bounds`].
    fn alpha_r_partials(&self, tau: f64, r: &DVector<f64>, eps: f64) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let rest = |rr: &DVector<f64>| -> Result<DVector<f64>> {
            let bv = self.bounds(tau, rr)?;
            Ok(&bv.a * rr + eps * &bv.b)
        };
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let h = 1e-7 * r[j].abs().max(1e-3);
            let mut up = r.clone();
            up[j] += h;
            let mut dn = r.clone();
            let lo = (r[j] - h).max(0.0);
            dn[j] = lo;
            let col = (rest(&up)? - rest(&dn)?) / (r[j] + h - lo);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }

    /// `∂/∂τ (a(τ, r)·r + ε b(τ, r))`. Defaults to one-sided differences.
    fn alpha_rest_tau_derivative(&self, tau: f64, r: &DVector<f64>, eps: f64) -> Result<DVector<f64>> {
        let h = 1e-6 * tau.abs().max(1.0);
        let at = |t: f64| -> Result<DVector<f64>> {
            let bv = self.bounds(t, r)?;
            Ok(&bv.a * r + eps * &bv.b)
        };
        Ok((at(tau + h)? - at(tau)?) / h)
    }

    /// Approximation of `(1 − ε ∂α/∂r)⁻¹`, if the system has one.
    fn approx_inverse(&self, _eps: f64, _r: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    fn closed_averaged(&self, _tau: f64) -> Option<DVector<f64>> {
        None
    }

    /// `(R(τ), R(τ)⁻¹)` in closed form.
    fn closed_fundamental(&self, _tau: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        None
    }

    fn closed_k(&self, _tau: f64) -> Option<DVector<f64>> {
        None
    }
}

/// Check `0 ≤ rⁱ < ρⁱ(τ)` for every component.
pub fn check_caps<S: PeriodicSystem + ?Sized>(sys: &S, tau: f64, r: &DVector<f64>) -> Result<()> {
    let caps = sys.caps(tau);
    let ok = r.len() == caps.len() && r.iter().zip(&caps).all(|(&x, c)| x >= 0.0 && c.admits(x));
    if ok {
        Ok(())
    } else {
        Err(Error::CapViolation {
            r: r.iter().copied().collect(),
            cap: caps.iter().map(CapRadius::as_f64).collect(),
        })
    }
}

#[cfg(test)]
mod tests;
