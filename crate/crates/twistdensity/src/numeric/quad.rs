//! Quadrature: adaptive Gauss–Kronrod (7/15) with a global error heap, and
//! fixed Gauss–Legendre rules for panel-wise parallel integration.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Relative and absolute error targets; the looser of the two wins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-14 }
    }
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    fn target(&self, total: f64) -> f64 {
        self.abs.max(self.rel * total)
    }
}

/// Integrand values: reals or complex numbers.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k = k + pair * WGK[j];
        if j % 2 == 1 {
            g = g + pair * WG[j / 2];
        }
    }
    Panel { a, b, value: k * h, err: (k - g).magnitude() * h.abs() }
}

/// Adaptive Gauss–Kronrod integration of `f` over the finite interval `[a, b]`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<T> {
    integrate_with_limit(&f, a, b, tol, 4000)
}

fn integrate_with_limit<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<T> {
    if a == b {
        return Ok(T::default());
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(f, a, b);
    let mut total = first.value;
    let mut err = first.err;
    heap.push(first);
    while err > tol.target(total.magnitude()) {
        if heap.len() >= max_panels {
            return Err(Error::Quadrature { achieved: err, wanted: tol.target(total.magnitude()) });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::Quadrature { achieved: err, wanted: tol.target(total.magnitude()) });
        }
        let left = kronrod(f, worst.a, mid);
        let right = kronrod(f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Refresh accumulated sums to stop drift from repeated add/subtract.
            total = heap.iter().fold(T::default(), |s, p| s + p.value);
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok(total)
}

/// Integral over `[a, ∞)` via the map `x = a + u/(1-u)`.
pub fn integrate_to_infinity<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, tol: Tolerance) -> Result<T> {
    let g = |u: f64| {
        if u >= 1.0 {
            return T::default();
        }
        let v = 1.0 - u;
        f(a + u / v) * (1.0 / (v * v))
    };
    integrate_with_limit(&g, 0.0, 1.0, tol, 8000)
}

/// Fixed n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (&x, &w)| acc + f(c + h * x) * w)
            * h
    }

    /// Nodes mapped to `[a, b]` with matching weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, w * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 1e-14)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let v = integrate_to_infinity(|x: f64| (-PI * x * x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complex_oscillation() {
        let v = integrate(|x: f64| Complex64::new(0.0, 3.0 * x).exp(), 0.0, PI, Tolerance::default()).unwrap();
        let exact = (Complex64::new(0.0, 3.0 * PI).exp() - 1.0) / Complex64::new(0.0, 3.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn gauss_legendre_degree() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(|x: f64| x.powi(18) + x.powi(3), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = gl.mapped(2.0, 5.0).map(|(_, w)| w).sum();
        assert!((total - 3.0).abs() < 1e-14);
    }
}
