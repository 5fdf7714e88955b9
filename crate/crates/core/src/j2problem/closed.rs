//! Closed forms for the J2 averaging data.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

/// Zero-mean solution `s` of `2π ∂s/∂ϑ = f − f̄`.
pub fn s_closed(i: &Vector3<f64>, theta: f64) -> Vector3<f64> {
    let (p, e, y) = (i[0], i[1], i[2]);
    let t = theta;
    let e2 = e * e;
    let (sin, cos) = (f64::sin, f64::cos);
    let s_p = -1.0 / p * (3.0 * e * cos(t + y) + 3.0 * cos(2.0 * t) + e * cos(3.0 * t - y));
    let s_e = -1.0 / (16.0 * p * p)
        * (3.0 * e2 * cos(t - 3.0 * y)
            + (24.0 + 6.0 * e2) * cos(t - y)
            + (12.0 + 33.0 * e2) * cos(t + y)
            + 12.0 * e * cos(2.0 * t - 2.0 * y)
            + 60.0 * e * cos(2.0 * t)
            + 2.0 * e2 * cos(3.0 * t - 3.0 * y)
            + (28.0 + 17.0 * e2) * cos(3.0 * t - y)
            + 18.0 * e * cos(4.0 * t - 2.0 * y)
            + 3.0 * e2 * cos(5.0 * t - 3.0 * y));
    let s_y = -1.0 / (16.0 * p * p * e)
        * (3.0 * e2 * sin(t - 3.0 * y) + (24.0 + 18.0 * e2) * sin(t - y) - (12.0 - 21.0 * e2) * sin(t + y)
            + 12.0 * e * sin(2.0 * t - 2.0 * y)
            + 36.0 * e * sin(2.0 * t)
            + 2.0 * e2 * sin(3.0 * t - 3.0 * y)
            + (28.0 + 11.0 * e2) * sin(3.0 * t - y)
            + 18.0 * e * sin(4.0 * t - 2.0 * y)
            + 3.0 * e2 * sin(5.0 * t - 3.0 * y));
    Vector3::new(s_p, s_e, s_y)
}

/// Averaged field `(0, 0, −3π/P²)`.
pub fn averaged_field(i: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -3.0 * PI / (i[0] * i[0]))
}

/// `p̄`, `∂f̄/∂I` and the only nonzero second derivative `∂²f̄^Y/∂P²`.
pub fn pbar_jac_hess(i: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>, f64) {
    let (p, e, y) = (i[0], i[1], i[2]);
    let e2 = e * e;
    let s2 = (2.0 * y).sin();
    let pbar = Vector3::new(
        -3.0 * PI * e2 / (2.0 * p.powi(3)) * s2,
        3.0 * PI / (4.0 * p.powi(4)) * (10.0 * e - e2 * e) * s2,
        3.0 * PI / (16.0 * p.powi(4)) * (34.0 + 25.0 * e2 + (40.0 + 10.0 * e2) * (2.0 * y).cos()),
    );
    let mut jac = Matrix3::zeros();
    jac[(2, 0)] = 6.0 * PI / p.powi(3);
    (pbar, jac, -18.0 * PI / p.powi(4))
}

/// Averaged solution `(P₀, E₀, Y₀ − 3πτ/P₀²)`.
pub fn averaged_solution(p0: f64, e0: f64, y0: f64, tau: f64) -> Vector3<f64> {
    Vector3::new(p0, e0, y0 - 3.0 * PI / (p0 * p0) * tau)
}

/// `(R(τ), R(τ)⁻¹, K(τ))`.
pub fn closed_r_k(p0: f64, e0: f64, y0: f64, tau: f64) -> (Matrix3<f64>, Matrix3<f64>, Vector3<f64>) {
    let shear = 6.0 * PI / p0.powi(3) * tau;
    let mut r = Matrix3::identity();
    r[(2, 0)] = shear;
    let mut r_inv = Matrix3::identity();
    r_inv[(2, 0)] = -shear;
    let phase = 2.0 * y0 - 6.0 * PI / (p0 * p0) * tau;
    let dc = (2.0 * y0).cos() - phase.cos();
    let ds = (2.0 * y0).sin() - phase.sin();
    let e2 = e0 * e0;
    let k = Vector3::new(
        e2 / (4.0 * p0) * dc,
        -(10.0 * e0 - e2 * e0) / (8.0 * p0 * p0) * dc,
        3.0 * PI / (16.0 * p0.powi(4)) * (34.0 + 25.0 * e2 + 8.0 * e2 * (2.0 * y0).cos()) * tau
            + (20.0 + e2) / (16.0 * p0 * p0) * ds,
    );
    (r, r_inv, k)
}

/// Printed closed form of `v^P = (1/2π) ∫₀^ϑ s^P`.
pub fn v_p_closed(i: &Vector3<f64>, theta: f64) -> f64 {
    let (p, e, y) = (i[0], i[1], i[2]);
    let t = theta;
    1.0 / (12.0 * PI * p)
        * (16.0 * e * y.sin() - 18.0 * e * (t + y).sin() - 9.0 * (2.0 * t).sin() - 2.0 * e * (3.0 * t - y).sin())
}

/// Printed closed form of `u^P`.
pub fn u_p_closed(i: &Vector3<f64>, theta: f64) -> f64 {
    let (p, e, y) = (i[0], i[1], i[2]);
    let t = theta;
    let s = f64::sin;
    let (e2, e3) = (e * e, e * e * e);
    3.0 * PI / (128.0 * p.powi(5))
        * (-512.0 * e * s(y) + 824.0 * e2 * s(2.0 * y) - 103.0 * e3 * s(t - 3.0 * y) + 64.0 * e2 * s(t - 2.0 * y)
            - (1296.0 * e - 36.0 * e3) * s(t - y)
            - (768.0 - 1152.0 * e2) * s(t)
            + (3524.0 * e + 567.0 * e3) * s(t + y)
            + 960.0 * e2 * s(t + 2.0 * y)
            - 24.0 * e3 * s(t + 3.0 * y)
            - 576.0 * e2 * s(2.0 * t - 2.0 * y)
            + 2048.0 * e * s(2.0 * t - y)
            + (4576.0 + 1992.0 * e2) * s(2.0 * t)
            + 1024.0 * e * s(2.0 * t + y)
            - 744.0 * e2 * s(2.0 * t + 2.0 * y)
            + 36.0 * e3 * s(3.0 * t - 3.0 * y)
            + 1216.0 * e2 * s(3.0 * t - 2.0 * y)
            + (3180.0 * e + 521.0 * e3) * s(3.0 * t - y)
            - (1792.0 - 640.0 * e2) * s(3.0 * t)
            - (1264.0 * e + 172.0 * e3) * s(3.0 * t + y)
            - 27.0 * e3 * s(3.0 * t + 3.0 * y)
            + 560.0 * e2 * s(4.0 * t - 2.0 * y)
            - 1536.0 * e * s(4.0 * t - y)
            + (256.0 - 912.0 * e2) * s(4.0 * t)
            - 336.0 * e2 * s(4.0 * t + 2.0 * y)
            + 57.0 * e3 * s(5.0 * t - 3.0 * y)
            - 320.0 * e2 * s(5.0 * t - 2.0 * y)
            + (288.0 * e - 144.0 * e3) * s(5.0 * t - y)
            - (900.0 * e + 115.0 * e3) * s(5.0 * t + y)
            + 88.0 * e2 * s(6.0 * t - 2.0 * y)
            - (672.0 + 696.0 * e2) * s(6.0 * t)
            + 4.0 * e3 * s(7.0 * t - 3.0 * y)
            - (812.0 * e + 133.0 * e3) * s(7.0 * t - y)
            - 328.0 * e2 * s(8.0 * t - 2.0 * y)
            - 45.0 * e3 * s(9.0 * t - 3.0 * y))
}
