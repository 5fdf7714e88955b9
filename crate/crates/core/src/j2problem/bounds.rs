//! Majorizing functions of the J2 problem and the series inverse of
//! `1 − ε ∂α/∂r`.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Value with its gradient in `(r^P, r^E)`; the bounds never depend on `r^Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Grad2 {
    pub v: f64,
    pub g: [f64; 2],
}

impl Add for Grad2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Grad2 {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1]],
        }
    }
}

impl Sub for Grad2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Grad2 {
            v: self.v - o.v,
            g: [self.g[0] - o.g[0], self.g[1] - o.g[1]],
        }
    }
}

impl Mul for Grad2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Grad2 {
            v: self.v * o.v,
            g: [self.g[0] * o.v + self.v * o.g[0], self.g[1] * o.v + self.v * o.g[1]],
        }
    }
}

impl Div for Grad2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        Grad2 {
            v: q,
            g: [(self.g[0] - q * o.g[0]) / o.v, (self.g[1] - q * o.g[1]) / o.v],
        }
    }
}

pub(crate) trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn cst(x: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(x: f64) -> Self {
        x
    }
}

impl Scalar for Grad2 {
    fn cst(x: f64) -> Self {
        Grad2 { v: x, g: [0.0, 0.0] }
    }
}

fn poly<T: Scalar>(x: T, coeffs: &[f64]) -> T {
    coeffs.iter().rev().fold(T::cst(0.0), |acc, &c| acc * x + T::cst(c))
}

fn pw<T: Scalar>(x: T, n: u32) -> T {
    (1..n).fold(x, |acc, _| acc * x)
}

/// `P± = P₀ ± r^P`, `E± = E₀ ± r^E`.
struct Shifted<T> {
    pm: T,
    pp: T,
    ep: T,
    em: T,
}

impl<T: Scalar> Shifted<T> {
    fn new(p0: f64, e0: f64, rp: T, re: T) -> Self {
        Self {
            pm: T::cst(p0) - rp,
            pp: T::cst(p0) + rp,
            ep: T::cst(e0) + re,
            em: T::cst(e0) - re,
        }
    }
}

fn a_generic<T: Scalar>(p0: f64, e0: f64, rp: T, re: T) -> [[T; 3]; 3] {
    let Shifted { pm, ep, em, .. } = Shifted::new(p0, e0, rp, re);
    let c = T::cst;
    [
        [poly(ep, &[3.0, 4.0]) / (pm * pm), c(4.0) / pm, c(4.0) * ep / pm],
        [
            poly(ep, &[32.0, 45.0, 32.0]) / (c(4.0) * pw(pm, 3)),
            poly(ep, &[45.0, 64.0]) / (c(8.0) * pm * pm),
            poly(ep, &[16.0, 15.0, 20.0]) / (c(4.0) * pm * pm),
        ],
        [
            poly(ep, &[32.0, 33.0, 29.0]) / (c(4.0) * pw(pm, 3) * em),
            poly(ep, &[32.0, 0.0, 29.0]) / (c(8.0) * pm * pm * em * em),
            poly(ep, &[32.0, 30.0, 37.0]) / (c(8.0) * pm * pm * em),
        ],
    ]
}

fn b_generic<T: Scalar>(p0: f64, e0: f64, rp: T, re: T) -> [T; 3] {
    let Shifted { pm, pp, ep, em } = Shifted::new(p0, e0, rp, re);
    let c = T::cst;
    let p03 = c(p0 * p0 * p0);
    [
        poly(ep, &[54.0, 112.0, 33.0]) / (c(8.0) * pw(pm, 3)),
        poly(ep, &[6112.0, 10832.0, 6940.0, 11372.0, 1441.0]) / (c(512.0) * pw(pm, 4) * em),
        (p03 * poly(ep, &[3520.0, 16384.0, 9340.0, 8940.0, 1861.0])
            + pw(pp, 3) * ep * ep * poly(ep, &[1152.0, 4608.0]))
            / (c(256.0) * p03 * em * em * pw(pm, 4)),
    ]
}

fn c_values(p0: f64, e0: f64, rp: f64, re: f64) -> [f64; 3] {
    let Shifted { pm, pp, ep, em } = Shifted::new(p0, e0, rp, re);
    let p03 = p0.powi(3);
    [
        3.0 * PI * poly(ep, &[504.0, 1024.0, 713.0, 124.0]) / (8.0 * pm.powi(5)),
        3.0 * PI / (2048.0 * pm.powi(6) * em * em)
            * poly(ep, &[148736.0, 738384.0, 1062656.0, 1220344.0, 675146.0, 336591.0, 26855.0]),
        PI / (1024.0 * p03 * em.powi(3) * pm.powi(6))
            * (p03 * poly(ep, &[370944.0, 2214336.0, 5434752.0, 4927104.0, 2945040.0, 1225668.0, 147777.0])
                + pp.powi(3) * ep.powi(3) * poly(ep, &[231936.0, 442368.0, 196608.0])),
    ]
}

fn d_values(p0: f64, e0: f64, rp: f64, re: f64) -> Matrix3<f64> {
    let pm = p0 - rp;
    let ep = e0 + re;
    let e2 = ep * ep;
    Matrix3::new(
        9.0 * PI * e2 / (2.0 * pm.powi(4)),
        3.0 * PI * ep / pm.powi(3),
        3.0 * PI * e2 / pm.powi(3),
        3.0 * PI * ep * (10.0 + e2) / pm.powi(5),
        3.0 * PI * (10.0 + 3.0 * e2) / (4.0 * pm.powi(4)),
        3.0 * PI * ep * (10.0 + e2) / (2.0 * pm.powi(4)),
        3.0 * PI * (74.0 + 35.0 * e2) / (4.0 * pm.powi(5)),
        105.0 * PI * ep / (8.0 * pm.powi(4)),
        15.0 * PI * (4.0 + e2) / (4.0 * pm.powi(4)),
    )
}

/// The majorizing functions `a, b, c, d, e` at one `r`; all of them are
/// independent of `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
    pub d: Matrix3<f64>,
    /// The only nonzero `e` entry, `e^Y_PP`.
    pub e_ypp: f64,
}

/// Cap radii `(ρ^P, ρ^E)`; `ρ^Y` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapFunctions {
    pub rho_p: f64,
    pub rho_e: f64,
}

impl CapFunctions {
    pub fn new(p0: f64, e0: f64) -> Self {
        Self {
            rho_p: p0,
            rho_e: e0.min(1.0 - e0),
        }
    }

    pub fn admits(&self, r: &Vector3<f64>) -> bool {
        r[0] >= 0.0 && r[1] >= 0.0 && r[2] >= 0.0 && r[0] < self.rho_p && r[1] < self.rho_e && r[2].is_finite()
    }

    fn check(&self, r: &Vector3<f64>) -> Result<()> {
        if self.admits(r) {
            Ok(())
        } else {
            Err(Error::CapViolation {
                r: r.iter().copied().collect(),
                cap: vec![self.rho_p, self.rho_e, f64::INFINITY],
            })
        }
    }
}

/// Evaluate every majorizing function at `r`.
pub fn bounds(p0: f64, e0: f64, r: &Vector3<f64>) -> Result<BoundTable> {
    CapFunctions::new(p0, e0).check(r)?;
    let a = a_generic(p0, e0, r[0], r[1]);
    let b = b_generic(p0, e0, r[0], r[1]);
    Ok(BoundTable {
        a: Matrix3::from_fn(|i, j| a[i][j]),
        b: Vector3::from(b),
        c: Vector3::from(c_values(p0, e0, r[0], r[1])),
        d: d_values(p0, e0, r[0], r[1]),
        e_ypp: 18.0 * PI / (p0 - r[0]).powi(4),
    })
}

fn seeds(r: &Vector3<f64>) -> (Grad2, Grad2) {
    (Grad2 { v: r[0], g: [1.0, 0.0] }, Grad2 { v: r[1], g: [0.0, 1.0] })
}

/// `∂a^i_k/∂r^j`, returned as `[k]` matrices indexed `(i, j)`.
pub fn a_partials(p0: f64, e0: f64, r: &Vector3<f64>) -> [Matrix3<f64>; 3] {
    let (rp, re) = seeds(r);
    let a = a_generic(p0, e0, rp, re);
    std::array::from_fn(|k| Matrix3::from_fn(|i, j| if j < 2 { a[i][k].g[j] } else { 0.0 }))
}

/// `∂b^i/∂r^j`.
pub fn b_partials(p0: f64, e0: f64, r: &Vector3<f64>) -> Matrix3<f64> {
    let (rp, re) = seeds(r);
    let b = b_generic(p0, e0, rp, re);
    Matrix3::from_fn(|i, j| if j < 2 { b[i].g[j] } else { 0.0 })
}

/// `∂α^i/∂r^j = (∂a^i_k/∂r^j) r^k + a^i_j + ε ∂b^i/∂r^j`.
pub fn alpha_partials(p0: f64, e0: f64, eps: f64, r: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let table = bounds(p0, e0, r)?;
    let da = a_partials(p0, e0, r);
    let mut out = table.a + eps * b_partials(p0, e0, r);
    for (k, dak) in da.iter().enumerate() {
        out += dak * r[k];
    }
    Ok(out)
}

/// Constant matrices of the series `1 + εM + ε r^k N₍ₖ₎ + ε² Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseMatrices {
    pub m: Matrix3<f64>,
    pub n_p: Matrix3<f64>,
    pub n_e: Matrix3<f64>,
    pub n_y: Matrix3<f64>,
    pub q: Matrix3<f64>,
}

impl InverseMatrices {
    pub fn new(p0: f64, e0: f64) -> Self {
        let (p, e) = (p0, e0);
        let e2 = e * e;
        let (p2, p3, p4, p5) = (p * p, p.powi(3), p.powi(4), p.powi(5));
        let m = Matrix3::new(
            (3.0 + 4.0 * e) / p2,
            4.0 / p,
            4.0 * e / p,
            (32.0 + 45.0 * e + 32.0 * e2) / (4.0 * p3),
            (45.0 + 64.0 * e) / (8.0 * p2),
            (16.0 + 15.0 * e + 20.0 * e2) / (4.0 * p2),
            (32.0 + 33.0 * e + 29.0 * e2) / (4.0 * e * p3),
            (32.0 + 29.0 * e2) / (8.0 * e2 * p2),
            (32.0 + 30.0 * e + 37.0 * e2) / (8.0 * e * p2),
        );
        let n_p = Matrix3::new(
            4.0 * (3.0 + 4.0 * e) / p3,
            8.0 / p2,
            4.0 * e / p2,
            3.0 * (32.0 + 45.0 * e + 32.0 * e2) / (2.0 * p4),
            (45.0 + 64.0 * e) / (2.0 * p3),
            (16.0 + 15.0 * e + 20.0 * e2) / (2.0 * p3),
            3.0 * (32.0 + 33.0 * e + 29.0 * e2) / (2.0 * e * p4),
            (32.0 + 33.0 * e + 58.0 * e2) / (2.0 * e2 * p3),
            (32.0 + 30.0 * e + 37.0 * e2) / (4.0 * e * p3),
        );
        let n_e = Matrix3::new(
            8.0 / p2,
            0.0,
            4.0 / p,
            (45.0 + 64.0 * e) / (2.0 * p3),
            16.0 / p2,
            5.0 * (3.0 + 8.0 * e) / (4.0 * p2),
            (32.0 + 33.0 * e + 58.0 * e2) / (2.0 * e2 * p3),
            (16.0 + 29.0 * e2) / (e2 * e * p2),
            (32.0 + 60.0 * e + 111.0 * e2) / (8.0 * e2 * p2),
        );
        let n_y = Matrix3::new(
            4.0 * e / p2,
            4.0 / p,
            0.0,
            (16.0 + 15.0 * e + 20.0 * e2) / (2.0 * p3),
            5.0 * (3.0 + 8.0 * e) / (4.0 * p2),
            0.0,
            (32.0 + 30.0 * e + 37.0 * e2) / (4.0 * e * p3),
            (32.0 + 60.0 * e + 111.0 * e2) / (8.0 * e2 * p2),
            0.0,
        );
        let q_ep = poly(e, &[10208.0, 27728.0, 44440.0, 46244.0, 18369.0]);
        let q_ee = poly(e, &[14304.0, 29344.0, 71068.0, 121568.0, 65637.0]);
        let q_ey = poly(e, &[512.0, 1680.0, 4405.0, 4455.0, 3044.0]);
        let q_yp = poly(e, &[7616.0, 24832.0, 25096.0, 27300.0, 7719.0]);
        let q_ye = poly(e, &[5568.0, 29376.0, 33400.0, 42444.0, 15153.0]);
        let q_yy = poly(e, &[2048.0, 2880.0, 7524.0, 5202.0, 4385.0]);
        let q = Matrix3::new(
            (746.0 + 1152.0 * e + 715.0 * e2) / (8.0 * p4),
            (64.0 + 194.0 * e + 283.0 * e2) / (4.0 * e * p3),
            (64.0 + 84.0 * e + 109.0 * e2) / (2.0 * p3),
            q_ep / (128.0 * e * p5),
            q_ee / (512.0 * e2 * p4),
            q_ey / (32.0 * e * p4),
            q_yp / (64.0 * e2 * p5),
            q_ye / (128.0 * e2 * e * p4),
            q_yy / (64.0 * e2 * p4),
        );
        Self { m, n_p, n_e, n_y, q }
    }

    /// `1 + εM + ε r^k N₍ₖ₎ + ε² Q`.
    pub fn approx_inverse(&self, eps: f64, r: &Vector3<f64>) -> Matrix3<f64> {
        Matrix3::identity()
            + eps * self.m
            + eps * (r[0] * self.n_p + r[1] * self.n_e + r[2] * self.n_y)
            + eps * eps * self.q
    }
}
