//! Averages over the circle and the unit segment, and maxima over the
//! circle.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const PERIODIC_START: usize = 32;
const PERIODIC_MAX: usize = 1 << 16;
const GL_ORDERS: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];

fn converged(new: f64, old: f64, tol: f64) -> bool {
    (new - old).abs() <= tol * new.abs().max(1.0)
}

/// Mean of `g` over one turn, `(1/2π)∫g dϑ`, by the composite trapezoid rule
/// with repeated doubling until successive values agree to `tol`.
pub fn periodic_average<G>(mut g: G, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let v = periodic_average_vec(
        |t, out| {
            out[0] = g(t);
        },
        1,
        tol,
    )?;
    Ok(v[0])
}

/// Component-wise version of [`periodic_average`] for vector-valued `g`.
/// Convergence is required in every component.
pub fn periodic_average_vec<G>(mut g: G, dim: usize, tol: f64) -> Result<Vec<f64>>
where
    G: FnMut(f64, &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut buf = vec![0.0; dim];
    let mut sum = vec![0.0; dim];
    let mut m = PERIODIC_START;
    for q in 0..m {
        let t = TWO_PI * q as f64 / m as f64;
        g(t, &mut buf);
        accumulate(&mut sum, &buf, t)?;
    }
    let mut avg: Vec<f64> = sum.iter().map(|s| s / m as f64).collect();
    let mut last_change = f64::INFINITY;
    while m < PERIODIC_MAX {
        let mut mid = vec![0.0; dim];
        for q in 0..m {
            let t = TWO_PI * (q as f64 + 0.5) / m as f64;
            g(t, &mut buf);
            accumulate(&mut mid, &buf, t)?;
        }
        let next: Vec<f64> = avg.iter().zip(&mid).map(|(a, s)| 0.5 * a + 0.5 * s / m as f64).collect();
        m *= 2;
        let done = next.iter().zip(&avg).all(|(n, o)| converged(*n, *o, tol));
        last_change = next.iter().zip(&avg).map(|(n, o)| (n - o).abs()).fold(0.0, f64::max);
        avg = next;
        if done {
            return Ok(avg);
        }
    }
    Err(Error::QuadratureNotConverged { tol, last_change })
}

fn accumulate(sum: &mut [f64], vals: &[f64], x: f64) -> Result<()> {
    for (s, v) in sum.iter_mut().zip(vals) {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { x });
        }
        *s += v;
    }
    Ok(())
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn build_rule(n: usize) -> GaussRule {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    GaussRule { nodes: x, weights: w }
}

/// Cached Gauss–Legendre rule of order `GL_ORDERS[slot]`.
fn rule(slot: usize) -> &'static GaussRule {
    static RULES: [OnceLock<GaussRule>; GL_ORDERS.len()] = [const { OnceLock::new() }; GL_ORDERS.len()];
    RULES[slot].get_or_init(|| build_rule(GL_ORDERS[slot]))
}

/// Gauss–Legendre rule on `[0, 1]` with `n` points (any `n ≥ 1`).
pub fn gauss_legendre(n: usize) -> GaussRule {
    build_rule(n.max(1))
}

/// `∫₀¹ g(x) dx` by Gauss–Legendre rules of doubling order until successive
/// values agree to `tol`.
pub fn segment_average<G>(mut g: G, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let v = segment_average_vec(
        |x, out| {
            out[0] = g(x);
        },
        1,
        tol,
    )?;
    Ok(v[0])
}

/// Component-wise version of [`segment_average`].
pub fn segment_average_vec<G>(mut g: G, dim: usize, tol: f64) -> Result<Vec<f64>>
where
    G: FnMut(f64, &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut buf = vec![0.0; dim];
    let mut prev: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    for slot in 0..GL_ORDERS.len() {
        let r = rule(slot);
        let mut acc = vec![0.0; dim];
        for (&x, &w) in r.nodes.iter().zip(&r.weights) {
            g(x, &mut buf);
            for (a, v) in acc.iter_mut().zip(&buf) {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { x });
                }
                *a += w * v;
            }
        }
        if let Some(p) = &prev {
            last_change = acc.iter().zip(p).map(|(n, o)| (n - o).abs()).fold(0.0, f64::max);
            if acc.iter().zip(p).all(|(n, o)| converged(*n, *o, tol)) {
                return Ok(acc);
            }
        }
        prev = Some(acc);
    }
    Err(Error::QuadratureNotConverged { tol, last_change })
}

/// The grid angles `2πq/Q`, `q = 1..=Q` (the last one is `2π ≡ 0`).
pub fn torus_grid(q: usize) -> Vec<f64> {
    (1..=q).map(|k| TWO_PI * k as f64 / q as f64).collect()
}

fn grid_values<G>(g: &mut G, q: usize) -> Result<Vec<f64>>
where
    G: FnMut(f64) -> f64,
{
    if q < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {q}")));
    }
    torus_grid(q)
        .into_iter()
        .map(|t| {
            let v = g(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteValue { x: t })
            }
        })
        .collect()
}

/// Maximum of `g` over the grid `ϑ_q = 2πq/Q`, `q = 1..=Q`.
///
/// This is a lower bound for the true maximum; for smooth `g` the deficit
/// is `O(1/Q²)`.
pub fn grid_max_on_torus<G>(mut g: G, q: usize) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let vals = grid_values(&mut g, q)?;
    Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `g` on `[a, b]`.
fn golden_max<G>(g: &mut G, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let eval = |g: &mut G, t: f64| -> Result<f64> {
        let v = g(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue { x: t })
        }
    };
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(g, c)?;
    let mut fd = eval(g, d)?;
    let mut best = fc.max(fd);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(g, c)?;
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(g, d)?;
            best = best.max(fd);
        }
    }
    Ok(best)
}

/// Grid maximum followed by golden-section refinement around every
/// discrete local maximum of the grid (cyclically). Never smaller than
/// [`grid_max_on_torus`] on the same grid.
pub fn grid_max_on_torus_refined<G>(mut g: G, q: usize) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let vals = grid_values(&mut g, q)?;
    let grid = torus_grid(q);
    let h = TWO_PI / q as f64;
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for k in 0..q {
        let prev = vals[(k + q - 1) % q];
        let next = vals[(k + 1) % q];
        if vals[k] >= prev && vals[k] >= next {
            let local = golden_max(&mut g, grid[k] - h, grid[k] + h, 1e-7)?;
            best = best.max(local);
        }
    }
    Ok(best)
}
