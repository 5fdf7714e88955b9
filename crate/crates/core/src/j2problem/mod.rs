//! The polar J2 satellite as a [`PeriodicSystem`].

mod bounds;
mod closed;
pub mod oracles;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::averaging::{BoundValues, CapRadius, PeriodicSystem};
use crate::error::{Error, Result};
use crate::kepler::{j2_field, PlanetModel};

pub use bounds::{a_partials, alpha_partials, b_partials, bounds, BoundTable, CapFunctions, InverseMatrices};
pub use closed::{averaged_field, averaged_solution, closed_r_k, pbar_jac_hess, s_closed, u_p_closed, v_p_closed};

/// Initial elements, perturbation strength, horizon and grid sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct J2Config {
    pub p0: f64,
    pub e0: f64,
    pub y0: f64,
    pub epsilon: f64,
    /// Horizon in orbits, `U/ε`.
    pub orbits: f64,
    /// Angle grid size `Q` for the `a₍₀₎` maximization.
    pub theta_grid: usize,
    /// Number of slow-time intervals `N` for the `a₍₀₎` table.
    pub tau_grid: usize,
}

impl J2Config {
    /// Polar satellite (`ρ₋ = 11500 km`, `ρ₊ = 56950 km`) over 3000 orbits.
    pub fn polar() -> Self {
        Self {
            p0: 3.000,
            e0: 0.6640,
            y0: 0.0,
            epsilon: PlanetModel::EARTH.epsilon,
            orbits: 3000.0,
            theta_grid: 30,
            tau_grid: 100,
        }
    }

    /// Cos-B satellite launch elements over 3000 orbits.
    pub fn cosb() -> Self {
        Self {
            p0: 1.973,
            e0: 0.8817,
            y0: 0.9600,
            ..Self::polar()
        }
    }

    pub fn with_orbits(mut self, orbits: f64) -> Self {
        self.orbits = orbits;
        self
    }

    /// Slow-time horizon `U = ε · orbits`.
    pub fn horizon(&self) -> f64 {
        self.epsilon * self.orbits
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.p0 > 0.0 && self.p0.is_finite()) {
            return bad(format!("p0 must be positive, got {}", self.p0));
        }
        if !(self.e0 > 0.0 && self.e0 < 1.0) {
            return bad(format!("e0 must lie in (0, 1), got {}", self.e0));
        }
        if !self.y0.is_finite() {
            return bad(format!("y0 must be finite, got {}", self.y0));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.orbits > 0.0 && self.orbits.is_finite()) {
            return bad(format!("orbits must be positive, got {}", self.orbits));
        }
        if self.theta_grid < 2 || self.tau_grid < 2 {
            return bad(format!(
                "theta_grid and tau_grid must be at least 2, got {} and {}",
                self.theta_grid, self.tau_grid
            ));
        }
        Ok(())
    }

    pub fn initial(&self) -> Vector3<f64> {
        Vector3::new(self.p0, self.e0, self.y0)
    }
}

/// The J2 problem wired into the generic averaging interface.
#[derive(Debug, Clone)]
pub struct J2System {
    config: J2Config,
    caps: CapFunctions,
    inverse: InverseMatrices,
}

fn v3(v: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn dv(v: Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn dm(m: Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 3, m.as_slice())
}

/// `1` plus `6πτ/P₀³` in the `(Y, P)` entry: majorant of both `|R|` and
/// `|R⁻¹|`.
fn shear_bound(p0: f64, tau: f64) -> Matrix3<f64> {
    let mut m = Matrix3::identity();
    m[(2, 0)] = 6.0 * PI / p0.powi(3) * tau;
    m
}

impl J2System {
    pub fn new(config: J2Config) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            caps: CapFunctions::new(config.p0, config.e0),
            inverse: InverseMatrices::new(config.p0, config.e0),
            config,
        })
    }

    pub fn config(&self) -> &J2Config {
        &self.config
    }

    pub fn inverse_matrices(&self) -> &InverseMatrices {
        &self.inverse
    }

    pub fn cap_functions(&self) -> CapFunctions {
        self.caps
    }
}

impl PeriodicSystem for J2System {
    fn dim(&self) -> usize {
        3
    }

    fn initial(&self) -> DVector<f64> {
        dv(self.config.initial())
    }

    fn field(&self, i: &DVector<f64>, theta: f64) -> DVector<f64> {
        dv(j2_field(i[0], i[1], i[2], theta))
    }

    fn averaged_field(&self, i: &DVector<f64>) -> DVector<f64> {
        dv(averaged_field(&v3(i)))
    }

    fn s(&self, i: &DVector<f64>, theta: f64) -> DVector<f64> {
        dv(s_closed(&v3(i), theta))
    }

    fn pbar(&self, i: &DVector<f64>) -> DVector<f64> {
        dv(pbar_jac_hess(&v3(i)).0)
    }

    fn jac_fbar(&self, i: &DVector<f64>) -> DMatrix<f64> {
        dm(pbar_jac_hess(&v3(i)).1)
    }

    fn in_domain(&self, i: &DVector<f64>) -> bool {
        i.len() == 3 && i[0] > 0.0 && i[1] > 0.0 && i[1] < 1.0 && i[2].is_finite()
    }

    fn caps(&self, _tau: f64) -> Vec<CapRadius> {
        vec![
            CapRadius::Finite(self.caps.rho_p),
            CapRadius::Finite(self.caps.rho_e),
            CapRadius::Unbounded,
        ]
    }

    fn bounds(&self, _tau: f64, r: &DVector<f64>) -> Result<BoundValues> {
        let t = bounds(self.config.p0, self.config.e0, &v3(r))?;
        let mut e_y = DMatrix::zeros(3, 3);
        e_y[(0, 0)] = t.e_ypp;
        Ok(BoundValues {
            a: dm(t.a),
            b: dv(t.b),
            c: dv(t.c),
            d: dm(t.d),
            e: vec![DMatrix::zeros(3, 3), DMatrix::zeros(3, 3), e_y],
        })
    }

    fn r_bound(&self, tau: f64) -> DMatrix<f64> {
        dm(shear_bound(self.config.p0, tau))
    }

    fn p_bound(&self, tau: f64) -> DMatrix<f64> {
        dm(shear_bound(self.config.p0, tau))
    }

    fn r_bound_derivative(&self, _tau: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(3, 3);
        m[(2, 0)] = 6.0 * PI / self.config.p0.powi(3);
        m
    }

    fn alpha_r_partials(&self, _tau: f64, r: &DVector<f64>, eps: f64) -> Result<DMatrix<f64>> {
        Ok(dm(alpha_partials(self.config.p0, self.config.e0, eps, &v3(r))?))
    }

    fn alpha_rest_tau_derivative(&self, _tau: f64, _r: &DVector<f64>, _eps: f64) -> Result<DVector<f64>> {
        Ok(DVector::zeros(3))
    }

    fn approx_inverse(&self, eps: f64, r: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(dm(self.inverse.approx_inverse(eps, &v3(r))))
    }

    fn closed_averaged(&self, tau: f64) -> Option<DVector<f64>> {
        let c = &self.config;
        Some(dv(averaged_solution(c.p0, c.e0, c.y0, tau)))
    }

    fn closed_fundamental(&self, tau: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        let c = &self.config;
        let (r, ri, _) = closed_r_k(c.p0, c.e0, c.y0, tau);
        Some((dm(r), dm(ri)))
    }

    fn closed_k(&self, tau: f64) -> Option<DVector<f64>> {
        let c = &self.config;
        Some(dv(closed_r_k(c.p0, c.e0, c.y0, tau).2))
    }
}


#[cfg(test)]
mod tests;
