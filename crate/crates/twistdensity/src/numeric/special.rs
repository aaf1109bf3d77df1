//! Special functions of a complex variable: log-gamma, digamma, the Riemann
//! zeta function with its derivative, and the upper incomplete gamma function.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// B_2, B_4, ..., B_28.
const BERNOULLI: [f64; 14] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
];

const SHIFT_TO: f64 = 14.0;

fn near_nonpositive_integer(z: Complex64) -> Option<f64> {
    if z.re > 0.5 {
        return None;
    }
    let d = (z - z.re.round()).norm();
    (d < 1e-12).then_some(d)
}

/// Principal-branch-continuous log Γ(z) for Re z > 0; defined by upward
/// recurrence elsewhere. Returns an infinite real part at the poles.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if near_nonpositive_integer(z).is_some() {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    let mut w = z;
    let mut prod = Complex64::new(1.0, 0.0);
    let mut arg = 0.0;
    while w.re < SHIFT_TO {
        prod *= w;
        arg += w.arg();
        w += 1.0;
    }
    // One logarithm for the modulus; the summed arguments keep the branch continuous.
    let shift = Complex64::new(prod.norm().ln(), arg);
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().take(10).enumerate() {
        let k = (k + 1) as f64;
        series += pow * (b / (2.0 * k * (2.0 * k - 1.0)));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

/// Γ(z); exact products at small positive integers and half-integers.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re > 0.0 && z.re <= 30.0 && (2.0 * z.re).fract() == 0.0 {
        let mut x = z.re;
        let mut acc = if x.fract() == 0.0 { 1.0 } else { PI.sqrt() };
        let base = if x.fract() == 0.0 { 1.0 } else { 0.5 };
        while x > base {
            x -= 1.0;
            acc *= x;
        }
        return Complex64::new(acc, 0.0);
    }
    ln_gamma(z).exp()
}

/// ψ(z) = Γ′(z)/Γ(z) by recurrence shift and the Stirling expansion.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if let Some(d) = near_nonpositive_integer(z) {
        return Err(Error::Pole { what: "digamma", distance: d });
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < SHIFT_TO {
        shift += w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (k, b) in BERNOULLI.iter().take(10).enumerate() {
        series += pow * (b / (2.0 * (k + 1) as f64));
        pow *= inv2;
    }
    Ok(w.ln() - 0.5 * inv - series - shift)
}

/// ζ(s) and ζ′(s) by Euler–Maclaurin summation. Accurate to ~1e-13
/// relative away from s = 1; the pole term is carried exactly.
pub fn zeta_with_derivative(s: Complex64) -> (Complex64, Complex64) {
    let n_terms = (s.im.abs() / PI).ceil() as usize + 30;
    let n = n_terms as f64;
    let ln_n = n.ln();
    let mut z = Complex64::new(0.0, 0.0);
    let mut dz = Complex64::new(0.0, 0.0);
    for k in 1..n_terms {
        let lk = (k as f64).ln();
        let t = (-s * lk).exp();
        z += t;
        dz -= t * lk;
    }
    let n_pow = (-s * ln_n).exp();
    let n_one = n_pow * n;
    let sm1 = s - 1.0;
    z += n_one / sm1 + 0.5 * n_pow;
    dz += -n_one * ln_n / sm1 - n_one / (sm1 * sm1) - 0.5 * n_pow * ln_n;

    // Correction terms B_2k/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1}.
    let mut poly = s;
    let mut dpoly = Complex64::new(1.0, 0.0);
    let mut npow = n_pow / n;
    let mut fact = 2.0;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let coef = b / fact;
        z += coef * poly * npow;
        dz += coef * npow * (dpoly - poly * ln_n);
        let j = (2 * k + 1) as f64;
        let j2 = j + 1.0;
        dpoly = dpoly * (s + j) * (s + j2) + poly * ((s + j) + (s + j2));
        poly = poly * (s + j) * (s + j2);
        npow /= n * n;
        fact *= (2.0 * k as f64 + 3.0) * (2.0 * k as f64 + 4.0);
    }
    (z, dz)
}

pub fn zeta(s: Complex64) -> Complex64 {
    zeta_with_derivative(s).0
}

/// Upper incomplete gamma Γ(a, z) for complex a and z with Re z > 0.
///
/// Uses the Legendre continued fraction (modified Lentz) when |z| > |a| + 1
/// and the lower-gamma power series otherwise.
pub fn upper_incomplete_gamma(a: Complex64, z: Complex64) -> Complex64 {
    if z.norm() > a.norm() + 1.0 {
        upper_gamma_cf(a, z)
    } else {
        upper_gamma_series(a, z)
    }
}

/// Exponential integral E₁(x) = ∫_x^∞ e^{−u}/u du for x > 0.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 needs x > 0, got {x}")));
    }
    if x > 1.0 {
        return Ok(upper_gamma_cf(Complex64::new(0.0, 0.0), Complex64::new(x, 0.0)).re);
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..60 {
        term *= -x / k as f64;
        sum -= term / k as f64;
    }
    Ok(-EULER_GAMMA - x.ln() + sum)
}

pub(crate) fn upper_gamma_cf(a: Complex64, z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..5000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = Complex64::new(TINY, 0.0);
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        d = d.inv();
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (a * z.ln() - z).exp() * h
}

pub(crate) fn upper_gamma_series(a: Complex64, z: Complex64) -> Complex64 {
    gamma(a) - lower_gamma_series(a, z)
}

/// Lower incomplete gamma γ(a, z) by its power series.
pub(crate) fn lower_gamma_series(a: Complex64, z: Complex64) -> Complex64 {
    let mut term = a.inv();
    let mut sum = term;
    let mut k = 1.0;
    while k < 10_000.0 {
        term *= z / (a + k);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
        k += 1.0;
    }
    (a * z.ln() - z).exp() * sum
}

/// Γ(a, z) with Γ(a) supplied, for repeated evaluation at a fixed a.
pub fn upper_incomplete_gamma_with(a: Complex64, gamma_a: Complex64, z: Complex64) -> Complex64 {
    if z.norm() > a.norm() + 1.0 {
        upper_gamma_cf(a, z)
    } else {
        gamma_a - lower_gamma_series(a, z)
    }
}
