//! Weighted quadratic character sums over the twist family: brute-force
//! evaluation next to their predicted main terms, and the Gauss-sum and
//! Poisson identities that turn (d/p) into additive characters.

use crate::error::{Error, Result};
use crate::family::{FamilyWeights, Weighting};
use crate::ntkit::{self, gauss_data};
use crate::numeric::special::{zeta, zeta_with_derivative, EULER_GAMMA};
use crate::numeric::{integrate, KahanComplex, KahanSum, Tolerance};
use crate::testfn::{WeightFunction, WeightKind};
use num_complex::Complex64;
use std::f64::consts::PI;

/// 1 if n is a perfect square, else 0.
pub fn kappa(n: u64) -> u8 {
    let r = (n as f64).sqrt().round() as u64;
    u8::from((r.saturating_sub(1)..=r + 1).any(|k| k * k == n))
}

/// Σ*_{(d,N)=1} weight(d/X)·(d/n), building the family on the fly.
pub fn weighted_char_sum(wf: &WeightFunction, x: f64, n: u64, use_wtilde: bool) -> Result<f64> {
    let weighting = if use_wtilde { Weighting::Repetitions } else { Weighting::Squarefree };
    Ok(FamilyWeights::build(wf, x, weighting)?.char_sum(n))
}

fn prime_factors(n: u64) -> Vec<u64> {
    ntkit::factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Predicted main term of Σ* w̃(d/X)(d/n).
pub fn repetition_main_term(wf: &WeightFunction, x: f64, n: u64) -> f64 {
    if kappa(n) == 0 {
        return 0.0;
    }
    let big_n = wf.conductor();
    let mut v = x * wf.what(0.0);
    for p in prime_factors(n) {
        v /= 1.0 + 1.0 / p as f64;
        if big_n % p == 0 {
            v *= 1.0 + 1.0 / p as f64;
        }
    }
    for &p in wf.conductor_primes() {
        v *= 1.0 - 1.0 / p as f64;
    }
    v
}

/// Predicted main term of Σ* w(d/X)(d/n) over squarefree d.
pub fn squarefree_main_term(wf: &WeightFunction, x: f64, n: u64) -> f64 {
    if kappa(n) == 0 {
        return 0.0;
    }
    let big_n = wf.conductor();
    let mut v = x * wf.what(0.0) * 6.0 / (PI * PI);
    for p in prime_factors(n) {
        v /= 1.0 + 1.0 / p as f64;
        if big_n % p == 0 {
            v *= 1.0 + 1.0 / p as f64;
        }
    }
    for &p in wf.conductor_primes() {
        v /= 1.0 + 1.0 / p as f64;
    }
    v
}

/// ∫₀^∞ w(x) log x dx.
pub fn weight_log_moment(wf: &WeightFunction) -> Result<f64> {
    match wf.kind() {
        WeightKind::Gaussian => Ok(-(EULER_GAMMA + (4.0 * PI).ln()) / 4.0),
        WeightKind::Samples { .. } => {
            let tol = Tolerance { rel: 1e-12, abs: 1e-15 };
            let r = wf.radius();
            let f = |x: f64| wf.w(x) * x.ln();
            // Split at 1 so the log singularity sits on a panel edge.
            Ok(integrate(f, 0.0, 1.0_f64.min(r), tol)? + if r > 1.0 { integrate(f, 1.0, r, tol)? } else { 0.0 })
        }
    }
}

/// Weighted average of log|d| over the family, directly and by its
/// asymptotic expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAverage {
    pub direct: f64,
    /// Expansion including the X^{−1/2} term.
    pub analytic: f64,
    /// Expansion with the X^{−1/2} term dropped.
    pub analytic_leading: f64,
    pub gap: f64,
}

/// Constant part of the log|d| expansion, and the coefficient of X^{−1/2}.
pub fn log_average_constants(wf: &WeightFunction) -> Result<(f64, f64)> {
    let (z2, dz2) = zeta_with_derivative(Complex64::new(2.0, 0.0));
    let mut constant = 2.0 / wf.what(0.0) * weight_log_moment(wf)? + 2.0 * (dz2 / z2).re;
    let mut euler = 1.0;
    for &p in wf.conductor_primes() {
        let pf = p as f64;
        constant += 2.0 * pf.ln() / (pf * pf - 1.0);
        euler *= (1.0 - pf.powf(-0.5)) / (1.0 - 1.0 / pf);
    }
    let m_half = wf.mellin_w(Complex64::new(0.5, 0.0))?.re;
    let m_one = wf.mellin_w(Complex64::new(1.0, 0.0))?.re;
    let half = -euler * m_half / m_one * zeta(Complex64::new(0.5, 0.0)).re;
    Ok((constant, half))
}

/// (1/W) Σ* w̃(d/X) log|d| against its expansion.
pub fn logd_sum(fam: &FamilyWeights, wf: &WeightFunction) -> Result<LogAverage> {
    if fam.weighting() != Weighting::Repetitions {
        return Err(Error::Config("log|d| expansion applies to the w̃-weighted family".into()));
    }
    let direct = fam.sum_even(|d| (d as f64).ln()) / fam.total();
    let (constant, half) = log_average_constants(wf)?;
    let x = fam.x();
    let analytic_leading = x.ln() + constant;
    let analytic = analytic_leading + half / x.sqrt();
    Ok(LogAverage { direct, analytic, analytic_leading, gap: direct - analytic })
}

/// Both sides of Σ_r w(rℓ/Y)e(rℓb/p) = (Y/ℓ) Σ_s ŵ(Y(s/ℓ − b/p)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

fn additive_sum(wf: &WeightFunction, p: u64, ell: u64, b: u64, y: f64) -> Complex64 {
    let r_max = (y * wf.radius() / ell as f64).ceil() as i64 + 1;
    let step = (ell % p) * (b % p) % p;
    let mut acc = KahanComplex::default();
    acc.add(Complex64::new(wf.w(0.0), 0.0));
    for r in 1..=r_max {
        let w = wf.w((r * ell as i64) as f64 / y);
        if w == 0.0 {
            continue;
        }
        let k = (r as u64 % p) * step % p;
        // Pair r with −r: w is even, so the sum is 2w·cos.
        acc.add(Complex64::new(2.0 * w * (2.0 * PI * k as f64 / p as f64).cos(), 0.0));
    }
    acc.value()
}

pub fn poisson_check(wf: &WeightFunction, p: u64, ell: u64, b: u64, y: f64) -> Result<PoissonCheck> {
    if p < 3 || !ntkit::is_prime(p) || ell == 0 || b >= p || !(y > 0.0) {
        return Err(Error::Domain(format!("poisson_check needs odd prime p, ℓ ≥ 1, 0 ≤ b < p, Y > 0; got p={p} ℓ={ell} b={b} Y={y}")));
    }
    let lhs = additive_sum(wf, p, ell, b, y);
    let l = ell as f64;
    let centre = l * b as f64 / p as f64;
    let span = l * wf.radius().max(8.0) / y + 1.0;
    let (lo, hi) = ((centre - span).floor() as i64, (centre + span).ceil() as i64);
    let rhs: f64 = (lo..=hi)
        .map(|s| wf.what(y * (s as f64 / l - b as f64 / p as f64)))
        .sum::<KahanSum>()
        .value()
        * y
        / l;
    let rhs = Complex64::new(rhs, 0.0);
    Ok(PoissonCheck { lhs, rhs, gap: (lhs - rhs).norm() })
}

/// Σ_{d∈ℤ,(d,N)=1} w(d/Y)(d/p) directly.
pub fn direct_char_sum(wf: &WeightFunction, big_n: u64, p: u64, y: f64) -> f64 {
    let d_max = (y * wf.radius()).ceil() as i64 + 1;
    (1..=d_max)
        .filter(|&d| ntkit::gcd(d as u64, big_n) == 1)
        .map(|d| {
            let chi = ntkit::kronecker(d, p as i64) + ntkit::kronecker(-d, p as i64);
            wf.w(d as f64 / y) * chi as f64
        })
        .sum::<KahanSum>()
        .value()
}

/// |direct − Gauss-sum expansion| for Σ_{(d,N)=1} w(d/Y)(d/p).
pub fn gauss_expansion_check(wf: &WeightFunction, big_n: u64, p: u64, y: f64) -> Result<f64> {
    if big_n % p == 0 {
        return Err(Error::Domain(format!("p = {p} divides N = {big_n}")));
    }
    let g = gauss_data(p)?;
    let direct = direct_char_sum(wf, big_n, p, y);
    let mut acc = KahanComplex::default();
    for (ell, mu) in ntkit::squarefree_divisors(big_n) {
        let mut inner = KahanComplex::default();
        for b in 1..p {
            let chi = ntkit::kronecker(b as i64, p as i64) as f64;
            inner.add(additive_sum(wf, p, ell, b, y) * chi);
        }
        acc.add(inner.value() * mu as f64);
    }
    let expansion = acc.value() * g.eps_p.conj() / (p as f64).sqrt();
    Ok((expansion - Complex64::new(direct, 0.0)).norm())
}

/// Share of the family weight carried by d divisible by p, with its target.
pub fn p_divides_d_sum(fam: &FamilyWeights, big_n: u64, p: u64) -> (f64, f64) {
    let ratio = fam.divisible_sum(p) / fam.total();
    let target = if big_n % p == 0 { 0.0 } else { 1.0 / (p as f64 + 1.0) };
    (ratio, target)
}
