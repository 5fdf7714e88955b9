//! One-dimensional interpolation: barycentric Lagrange and monotone
//! piecewise-cubic Hermite.

use crate::error::{Error, Result};

/// A scalar function of one variable known from tabulated data.
pub trait Interpolant {
    fn eval(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// First and last node.
    fn domain(&self) -> (f64, f64);
}

/// Which interpolant to put through tabulated node values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterpMode {
    /// Single global polynomial through all nodes.
    Lagrange,
    /// Monotone piecewise-cubic Hermite (PCHIP).
    #[default]
    Cubic,
}

impl InterpMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterpMode::Lagrange => "lagrange",
            InterpMode::Cubic => "cubic",
        }
    }
}

impl std::str::FromStr for InterpMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lagrange" => Ok(InterpMode::Lagrange),
            "cubic" => Ok(InterpMode::Cubic),
            other => Err(Error::InvalidArgument(format!(
                "unknown interpolation mode '{other}' (expected lagrange or cubic)"
            ))),
        }
    }
}

fn check_nodes(nodes: &[f64], values: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs at least 2 nodes, got {}",
            nodes.len()
        )));
    }
    if nodes.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    for (k, w) in nodes.windows(2).enumerate() {
        if w[1] == w[0] {
            return Err(Error::InvalidArgument(format!("duplicate node {} at index {}", w[0], k + 1)));
        }
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("nodes must be strictly increasing".into()));
        }
    }
    if let Some(x) = nodes.iter().chain(values).find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { x: *x });
    }
    Ok(())
}

/// Equally spaced nodes `lo + (hi - lo) k / (count - 1)`, `k = 0..count`.
pub fn equispaced_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { hi } else { lo + (hi - lo) * k as f64 / last })
        .collect()
}

/// Polynomial interpolant in the second (true) barycentric form.
#[derive(Debug, Clone)]
pub struct BarycentricLagrange {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl BarycentricLagrange {
    /// Interpolant of degree `nodes.len() - 1` through `(nodes[k], values[k])`.
    ///
    /// Weights are built in log-magnitude form so that a hundred or more
    /// nodes do not overflow.
    pub fn new(nodes: &[f64], values: &[f64]) -> Result<Self> {
        check_nodes(nodes, values)?;
        let n = nodes.len();
        let mut log_mag = vec![0.0; n];
        let mut sign = vec![1.0; n];
        for j in 0..n {
            let mut acc = 0.0;
            let mut sg = 1.0;
            for k in 0..n {
                if k != j {
                    let d = nodes[j] - nodes[k];
                    acc -= d.abs().ln();
                    if d < 0.0 {
                        sg = -sg;
                    }
                }
            }
            log_mag[j] = acc;
            sign[j] = sg;
        }
        let top = log_mag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = (0..n).map(|j| sign[j] * (log_mag[j] - top).exp()).collect();
        Ok(Self {
            nodes: nodes.to_vec(),
            values: values.to_vec(),
            weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn node_index(&self, x: f64) -> Option<usize> {
        self.nodes.iter().position(|&t| t == x)
    }
}

impl Interpolant for BarycentricLagrange {
    fn eval(&self, x: f64) -> f64 {
        if let Some(k) = self.node_index(x) {
            return self.values[k];
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&t, &y), &w) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let q = w / (x - t);
            num += q * y;
            den += q;
        }
        num / den
    }

    fn derivative(&self, x: f64) -> f64 {
        if let Some(i) = self.node_index(x) {
            let xi = self.nodes[i];
            let yi = self.values[i];
            let wi = self.weights[i];
            let mut acc = 0.0;
            for j in 0..self.nodes.len() {
                if j != i {
                    acc += (self.weights[j] / wi) * (self.values[j] - yi) / (xi - self.nodes[j]);
                }
            }
            return acc;
        }
        let p = self.eval(x);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&t, &y), &w) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let q = w / (x - t);
            num += q * (p - y) / (x - t);
            den += q;
        }
        num / den
    }

    fn domain(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}

/// Piecewise-cubic Hermite interpolant with shape-preserving slopes
/// (weighted harmonic means inside, one-sided three-point formula at the
/// ends). C¹, never overshoots monotone data.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicHermite {
    pub fn new(nodes: &[f64], values: &[f64]) -> Result<Self> {
        check_nodes(nodes, values)?;
        let n = nodes.len();
        let h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (values[k + 1] - values[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 == 0.0 || d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0) {
                    slopes[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            values: values.to_vec(),
            slopes,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&t| t <= x);
        k.clamp(1, self.nodes.len() - 1) - 1
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

impl Interpolant for CubicHermite {
    fn eval(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        if x == x0 {
            return self.values[k];
        }
        if x == x1 {
            return self.values[k + 1];
        }
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[k] + h * h10 * self.slopes[k] + h01 * self.values[k + 1] + h * h11 * self.slopes[k + 1]
    }

    fn derivative(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.values[k] + d10 * self.slopes[k] + d01 * self.values[k + 1] + d11 * self.slopes[k + 1]
    }

    fn domain(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}

/// Either interpolant behind one concrete type.
#[derive(Debug, Clone)]
pub enum TableInterpolant {
    Lagrange(BarycentricLagrange),
    Cubic(CubicHermite),
}

impl TableInterpolant {
    pub fn new(mode: InterpMode, nodes: &[f64], values: &[f64]) -> Result<Self> {
        Ok(match mode {
            InterpMode::Lagrange => TableInterpolant::Lagrange(BarycentricLagrange::new(nodes, values)?),
            InterpMode::Cubic => TableInterpolant::Cubic(CubicHermite::new(nodes, values)?),
        })
    }

    pub fn mode(&self) -> InterpMode {
        match self {
            TableInterpolant::Lagrange(_) => InterpMode::Lagrange,
            TableInterpolant::Cubic(_) => InterpMode::Cubic,
        }
    }
}

impl Interpolant for TableInterpolant {
    fn eval(&self, x: f64) -> f64 {
        match self {
            TableInterpolant::Lagrange(p) => p.eval(x),
            TableInterpolant::Cubic(p) => p.eval(x),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self {
            TableInterpolant::Lagrange(p) => p.derivative(x),
            TableInterpolant::Cubic(p) => p.derivative(x),
        }
    }

    fn domain(&self) -> (f64, f64) {
        match self {
            TableInterpolant::Lagrange(p) => p.domain(),
            TableInterpolant::Cubic(p) => p.domain(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn constant_is_reproduced() {
        let x = equispaced_nodes(0.0, 2.0, 7);
        let y = vec![3.25; 7];
        let p = BarycentricLagrange::new(&x, &y).unwrap();
        for t in [0.01, 0.77, 1.5, 1.999] {
            assert!((p.eval(t) - 3.25).abs() < 1e-14);
            assert!(p.derivative(t).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_polynomial_through_four_nodes() {
        let poly = |t: f64| t * t * t - 2.0 * t;
        let x = equispaced_nodes(0.0, 3.0, 4);
        let y: Vec<f64> = x.iter().map(|&t| poly(t)).collect();
        let p = BarycentricLagrange::new(&x, &y).unwrap();
        assert_eq!(p.degree(), 3);
        for k in 0..50 {
            let t = 0.03 + 2.94 * k as f64 / 49.0;
            assert!((p.eval(t) - poly(t)).abs() < 1e-10);
            assert!((p.derivative(t) - (3.0 * t * t - 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn node_values_are_exact() {
        let x = equispaced_nodes(0.0, 1.7, 101);
        let y: Vec<f64> = x.iter().map(|t| (3.0 * t).sin() + 0.1).collect();
        let p = BarycentricLagrange::new(&x, &y).unwrap();
        for (t, v) in x.iter().zip(&y) {
            assert!(ulps(p.eval(*t), *v) <= 4);
        }
        let c = CubicHermite::new(&x, &y).unwrap();
        for (t, v) in x.iter().zip(&y) {
            assert!(ulps(c.eval(*t), *v) <= 4);
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(BarycentricLagrange::new(&[1.0], &[2.0]).is_err());
        assert!(BarycentricLagrange::new(&[0.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(CubicHermite::new(&[0.0, 0.0], &[0.0, 1.0]).is_err());
        assert!(BarycentricLagrange::new(&[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn node_derivative_matches_interior_formula() {
        let x = equispaced_nodes(0.0, 1.0, 6);
        let y: Vec<f64> = x.iter().map(|t| t.powi(4) - t).collect();
        let p = BarycentricLagrange::new(&x, &y).unwrap();
        for &t in &x {
            let exact = 4.0 * t.powi(3) - 1.0;
            assert!((p.derivative(t) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn hermite_is_monotone_on_monotone_data() {
        let x = equispaced_nodes(0.0, 5.0, 11);
        let y = [0.0, 0.0, 0.1, 0.1, 2.0, 2.1, 2.1, 5.0, 5.0, 5.5, 9.0];
        let c = CubicHermite::new(&x, &y).unwrap();
        let mut prev = c.eval(0.0);
        for k in 1..=1000 {
            let v = c.eval(5.0 * k as f64 / 1000.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn hermite_derivative_matches_finite_difference() {
        let x = equispaced_nodes(0.0, 3.0, 13);
        let y: Vec<f64> = x.iter().map(|t| (t * 1.3).sin()).collect();
        let c = CubicHermite::new(&x, &y).unwrap();
        for k in 1..60 {
            let t = 3.0 * k as f64 / 60.0 + 1e-3;
            let h = 1e-6;
            let fd = (c.eval(t + h) - c.eval(t - h)) / (2.0 * h);
            assert!((fd - c.derivative(t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn mode_parses() {
        assert_eq!("cubic".parse::<InterpMode>().unwrap(), InterpMode::Cubic);
        assert_eq!("lagrange".parse::<InterpMode>().unwrap(), InterpMode::Lagrange);
        assert!("spline".parse::<InterpMode>().is_err());
    }

    proptest! {
        #[test]
        fn exact_on_polynomials_up_to_degree_twelve(
            coeffs in prop::collection::vec(-2.0f64..2.0, 1..=13),
            pts in prop::collection::vec(-1.0f64..1.0, 50),
        ) {
            let n = coeffs.len();
            let poly = |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
            let x = equispaced_nodes(-1.0, 1.0, n.max(2));
            let y: Vec<f64> = x.iter().map(|&t| poly(t)).collect();
            let p = BarycentricLagrange::new(&x, &y).unwrap();
            for t in pts {
                prop_assert!((p.eval(t) - poly(t)).abs() < 1e-9);
            }
        }
    }
}
