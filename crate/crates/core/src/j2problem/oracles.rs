//! Independent quadrature and finite-difference constructions of the
//! auxiliary functions, used to check the closed forms and the
//! majorizing functions. Nothing here is needed by the envelope pipeline.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::closed::{pbar_jac_hess, s_closed};
use crate::kepler::j2_field;
use crate::numerics::quadrature::{gauss_legendre, GaussRule};

const H_S: f64 = 1e-3;
const H_OUTER: f64 = 1e-3;
const AVERAGE_POINTS: usize = 64;

fn field(i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
    j2_field(i[0], i[1], i[2], theta)
}

/// Jacobian `(∂/∂I^j) g(I)` by the fourth-order central stencil, column `j`.
/// The step is relative for `P` and `E`, absolute for `Y`.
fn fd_jacobian<G>(g: G, i: &Vector3<f64>, h: f64) -> Matrix3<f64>
where
    G: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    let mut out = Matrix3::zeros();
    for j in 0..3 {
        let hj = if j < 2 { h * i[j].abs() } else { h };
        let at = |k: f64| {
            let mut x = *i;
            x[j] += k * hj;
            g(&x)
        };
        out.set_column(j, &((at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * hj)));
    }
    out
}

/// Oracles built on a fixed Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct AuxOracles {
    rule: GaussRule,
}

impl Default for AuxOracles {
    fn default() -> Self {
        Self::new(40)
    }
}

impl AuxOracles {
    pub fn new(order: usize) -> Self {
        Self {
            rule: gauss_legendre(order),
        }
    }

    /// `(1/2π) ∫₀^ϑ g(x) dx`.
    fn partial_integral<G>(&self, g: G, theta: f64) -> Vector3<f64>
    where
        G: Fn(f64) -> Vector3<f64>,
    {
        let mut acc = Vector3::zeros();
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            acc += *w * g(theta * x);
        }
        acc * theta / (2.0 * PI)
    }

    /// `s = z − z̄` with `z(ϑ) = (1/2π) ∫₀^ϑ (f − f̄)`.
    pub fn s(&self, i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        let fbar = average(|t| field(i, t));
        let z = |th: f64| self.partial_integral(|x| field(i, x) - fbar, th);
        let zbar = average(z);
        z(theta) - zbar
    }

    /// `∂s/∂I` from the closed form by central differences.
    pub fn ds_di(&self, i: &Vector3<f64>, theta: f64) -> Matrix3<f64> {
        fd_jacobian(|x| s_closed(x, theta), i, H_S)
    }

    /// `p = (∂s/∂I) f`.
    pub fn p(&self, i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        self.ds_di(i, theta) * field(i, theta)
    }

    pub fn pbar(&self, i: &Vector3<f64>) -> Vector3<f64> {
        average(|t| self.p(i, t))
    }

    /// `v = (1/2π) ∫₀^ϑ s`.
    pub fn v(&self, i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        self.partial_integral(|x| s_closed(i, x), theta)
    }

    /// `w = (1/2π) ∫₀^ϑ (p − p̄)`.
    pub fn w(&self, i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        let pbar = self.pbar(i);
        self.partial_integral(|x| self.p(i, x) - pbar, theta)
    }

    /// `q = (∂v/∂I) f`.
    pub fn q(&self, i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        fd_jacobian(|x| self.v(x, theta), i, H_OUTER) * field(i, theta)
    }

    /// `u = (∂w/∂I) f`.
    pub fn u(&self, i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        fd_jacobian(|x| self.w(x, theta), i, H_OUTER) * field(i, theta)
    }

    /// `𝓢(I, δI, ϑ) = ∫₀¹ ∂s/∂I(I + x δI, ϑ) dx`.
    pub fn s_mean_jacobian(&self, i: &Vector3<f64>, di: &Vector3<f64>, theta: f64) -> Matrix3<f64> {
        let mut acc = Matrix3::zeros();
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            acc += *w * self.ds_di(&(i + *x * di), theta);
        }
        acc
    }

    /// `𝓖(I, δI) = ∫₀¹ ∂p̄/∂I(I + x δI) dx`, with `∂p̄/∂I` by central
    /// differences of the closed-form `p̄`.
    pub fn g_mean_jacobian(&self, i: &Vector3<f64>, di: &Vector3<f64>) -> Matrix3<f64> {
        let mut acc = Matrix3::zeros();
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            acc += *w * fd_jacobian(|y| pbar_jac_hess(y).0, &(i + *x * di), H_S);
        }
        acc
    }

    /// `𝓗^Y_PP(I, δI) = 2 ∫₀¹ (1 − x) ∂²f̄^Y/∂P²(I + x δI) dx`.
    pub fn h_ypp(&self, i: &Vector3<f64>, di: &Vector3<f64>) -> f64 {
        let mut acc = 0.0;
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            acc += w * 2.0 * (1.0 - x) * pbar_jac_hess(&(i + *x * di)).2;
        }
        acc
    }
}

/// Average over the torus by the `64`-point trapezoid rule (exact for the
/// trigonometric polynomials involved).
fn average<G>(g: G) -> Vector3<f64>
where
    G: Fn(f64) -> Vector3<f64>,
{
    let mut acc = Vector3::zeros();
    for k in 0..AVERAGE_POINTS {
        acc += g(2.0 * PI * k as f64 / AVERAGE_POINTS as f64);
    }
    acc / AVERAGE_POINTS as f64
}

/// Left-hand sides of the five majorization inequalities at one sample,
/// next to the corresponding bounds. `j` is a point of the averaged
/// solution and `dj` the displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationSample {
    pub s_lhs: Matrix3<f64>,
    pub a: Matrix3<f64>,
    pub b_lhs: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c_lhs: Vector3<f64>,
    pub c: Vector3<f64>,
    pub g_lhs: Matrix3<f64>,
    pub d: Matrix3<f64>,
    pub h_lhs: f64,
    pub e: f64,
}

impl MajorizationSample {
    /// Largest ratio of left-hand side to bound per inequality, in the
    /// order `a, b, c, d, e`.
    pub fn ratios(&self) -> [f64; 5] {
        let mat = |l: &Matrix3<f64>, r: &Matrix3<f64>| {
            let mut m = 0.0f64;
            for (x, y) in l.iter().zip(r.iter()) {
                let q = if *y == 0.0 {
                    if x.abs() < 1e-12 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    x.abs() / y
                };
                m = m.max(q);
            }
            m
        };
        let vec = |l: &Vector3<f64>, r: &Vector3<f64>| l.iter().zip(r.iter()).map(|(x, y)| x.abs() / y).fold(0.0, f64::max);
        [
            mat(&self.s_lhs, &self.a),
            vec(&self.b_lhs, &self.b),
            vec(&self.c_lhs, &self.c),
            mat(&self.g_lhs, &self.d),
            self.h_lhs.abs() / self.e,
        ]
    }
}

/// Evaluate every inequality at `(J, δJ, ϑ)` for the problem with
/// `(P₀, E₀)`.
pub fn majorization_sample(
    oracles: &AuxOracles,
    p0: f64,
    e0: f64,
    j: &Vector3<f64>,
    dj: &Vector3<f64>,
    theta: f64,
) -> crate::Result<MajorizationSample> {
    let r = dj.abs();
    let bt = super::bounds::bounds(p0, e0, &Vector3::new(r[0], r[1], 0.0))?;
    let shifted = j + dj;
    let jac = pbar_jac_hess(j).1;
    let v = oracles.v(&shifted, theta);
    let w = oracles.w(&shifted, theta);
    let q = oracles.q(&shifted, theta);
    let u = oracles.u(&shifted, theta);
    let g_lhs = oracles.g_mean_jacobian(j, dj);
    let mut d = bt.d;
    d.iter_mut().for_each(|x| *x = x.abs());
    Ok(MajorizationSample {
        s_lhs: oracles.s_mean_jacobian(j, dj, theta),
        a: bt.a,
        b_lhs: w - jac * v,
        b: bt.b,
        c_lhs: u - jac * (w + q),
        c: bt.c,
        g_lhs,
        d,
        h_lhs: oracles.h_ypp(j, dj),
        e: bt.e_ypp,
    })
}
