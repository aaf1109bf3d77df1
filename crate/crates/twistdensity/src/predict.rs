//! Closed-form predictions for the family 1-level density: the main terms
//! shared by the unconditional, ECRH and squarefree bounds, their error
//! exponents, and the Ratios Conjecture prediction with its symmetric-square
//! and arithmetic-factor ingredients.

use crate::charsum::{log_average_constants, logd_sum};
use crate::curve::{satake, ApTable, CurveSpec, LocalData, MAX_LOCAL_ORDER};
use crate::density::{integral_term, log_conductor, s_even_closed_with, FamilyParams};
use crate::error::{Error, Result};
use crate::family::{FamilyWeights, Weighting};
use crate::numeric::special::{digamma, zeta_with_derivative, EULER_GAMMA};
use crate::numeric::{integrate_to_infinity, KahanComplex, KahanSum, Tolerance};
use crate::testfn::{TestFnKind, TestFunction, WeightFunction};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Stieltjes constant γ₁.
const STIELTJES_1: f64 = -0.072_815_845_483_676_72;

// ---------------------------------------------------------------------------
// Error exponents

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExponentKind {
    /// Unconditional, σ < ½.
    Eta,
    /// Under ECRH, σ < 1.
    Theta,
    /// Squarefree family, (σ − 1)/2.
    Star,
}

/// m ≥ 1 with 1/(4m+2) ≤ σ < 1/(4m−2).
fn band(sigma: f64) -> u32 {
    let bound = |m: u32| 1.0 / (4 * m + 2) as f64;
    let mut m = (((1.0 / sigma - 2.0) / 4.0).floor().max(1.0) as u32).max(1);
    while sigma < bound(m) {
        m += 1;
    }
    while m > 1 && sigma >= bound(m - 1) {
        m -= 1;
    }
    m
}

pub fn eta(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(Error::Domain(format!("η is defined for 0 < σ < 1/2, got {sigma}")));
    }
    let m = band(sigma);
    Ok(if sigma < 1.0 / (4 * m + 1) as f64 {
        -1.0 + 2.0 * sigma
    } else {
        -((4 * m - 1) as f64) / (4 * m + 1) as f64
    })
}

pub fn theta(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("θ is defined for 0 < σ < 1, got {sigma}")));
    }
    if sigma >= 0.5 {
        return Ok(-1.0 + sigma);
    }
    let m = band(sigma);
    Ok(if sigma < 1.0 / (4 * m) as f64 { -1.0 + sigma } else { -1.0 + 1.0 / (4 * m) as f64 })
}

pub fn star_exponent(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("the squarefree exponent is defined for 0 < σ < 1, got {sigma}")));
    }
    Ok((sigma - 1.0) / 2.0)
}

pub fn exponent(kind: ExponentKind, sigma: f64) -> Result<f64> {
    match kind {
        ExponentKind::Eta => eta(sigma),
        ExponentKind::Theta => theta(sigma),
        ExponentKind::Star => star_exponent(sigma),
    }
}

/// Ratios Conjecture error exponent, constant in σ.
pub const RATIOS_EXPONENT: f64 = -0.5;

/// One row of the exponent comparison; `None` outside a function's domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentRow {
    pub sigma: f64,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
    pub star: Option<f64>,
    pub ratios: f64,
}

pub fn exponent_rows(grid: &[f64]) -> Vec<ExponentRow> {
    grid.iter()
        .map(|&sigma| ExponentRow {
            sigma,
            eta: eta(sigma).ok(),
            theta: theta(sigma).ok(),
            star: star_exponent(sigma).ok(),
            ratios: RATIOS_EXPONENT,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Simple targets

/// φ̂(0) + φ(0)/2.
pub fn katz_sarnak_target(tf: &TestFunction) -> f64 {
    tf.phihat0() + tf.phi0() / 2.0
}

/// ζ′/ζ(s), refusing points within 10⁻³ of the pole.
pub fn zeta_logderiv(s: Complex64) -> Result<Complex64> {
    let d = (s - 1.0).norm();
    if d < 1e-3 {
        return Err(Error::Pole { what: "ζ′/ζ", distance: d });
    }
    let (z, dz) = zeta_with_derivative(s);
    Ok(dz / z)
}

/// First term of the density: φ̂(0)/(L W) Σ weight(d) log(N d²/(2π)²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAverageTerm {
    pub direct: f64,
    /// From the log|d| expansion; w̃-weighted families only.
    pub analytic: Option<f64>,
    pub gap: Option<f64>,
}

pub fn log_average_term(spec: &CurveSpec, tf: &TestFunction, fam: &FamilyWeights, wf: &WeightFunction) -> Result<LogAverageTerm> {
    let l = crate::density::l_of(spec.conductor(), fam.x())?;
    let scale = tf.phihat0() / l;
    let base = log_conductor(spec.conductor(), 1);
    let direct = if tf.is_zero() { 0.0 } else { scale * fam.sum_even(|d| log_conductor(spec.conductor(), d)) / fam.total() };
    if fam.weighting() != Weighting::Repetitions {
        return Ok(LogAverageTerm { direct, analytic: None, gap: None });
    }
    let avg = logd_sum(fam, wf)?;
    let analytic = scale * (base + 2.0 * avg.analytic);
    Ok(LogAverageTerm { direct, analytic: Some(analytic), gap: Some(direct - analytic) })
}

/// Main terms common to the three density bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MainTerms {
    pub log_term: f64,
    pub integral: f64,
    pub s_even: f64,
    pub total: f64,
}

pub fn main_terms(spec: &CurveSpec, tf: &TestFunction, fam: &FamilyWeights, wf: &WeightFunction, table: &ApTable) -> Result<MainTerms> {
    let params = FamilyParams::new(spec, tf, fam.x(), fam.weighting() == Weighting::Squarefree)?;
    let log_term = log_average_term(spec, tf, fam, wf)?.direct;
    let integral = integral_term(tf, params.l)?;
    let s_even = s_even_closed_with(spec, tf, table, &params);
    Ok(MainTerms { log_term, integral, s_even, total: log_term + integral + s_even })
}

// ---------------------------------------------------------------------------
// Symmetric square and the arithmetic factor

#[derive(Clone, Copy, Debug)]
struct PrimeSatake {
    p: u64,
    log_p: f64,
    good: bool,
    /// α², β² (β = 0 at bad primes).
    a2: Complex64,
    b2: Complex64,
    /// p^{−SHIFTS[0]}.
    shift: f64,
}

/// Per-prime Satake data up to a cutoff P, shared by every Euler-product
/// evaluation at s = 1 + 2r.
#[derive(Clone, Debug)]
pub struct SymSquare {
    primes: Vec<PrimeSatake>,
    locals: Vec<LocalData>,
    p_max: u64,
    /// Ratios integrand nodes on [0, NODE_CACHE_T], filled on first use.
    nodes: OnceLock<Vec<Node>>,
}

/// The Ratios integrand at one t, before weighting by φ.
#[derive(Clone, Copy, Debug)]
struct Node {
    bracket: f64,
    correction: f64,
}

/// Shifts used to extrapolate conditionally convergent sums to Re s = 1.
pub const SHIFTS: [f64; 2] = [0.025, 0.05];

fn geometric(q: Complex64) -> Complex64 {
    q / (1.0 - q)
}

/// Contributions of one prime at z = p^{−s}.
struct PrimeParts {
    /// Σ_ℓ log p (α^{2ℓ} + β^{2ℓ} + [p∤N]) z^ℓ, i.e. minus the Sym² term.
    sym2: Complex64,
    /// The arithmetic factor A_{α,E} term.
    a: Complex64,
    /// Σ_ℓ log p z^ℓ, i.e. minus the ζ′/ζ term.
    zeta: Complex64,
}

impl PrimeSatake {
    fn parts(&self, z: Complex64) -> PrimeParts {
        let powers = geometric(self.a2 * z) + geometric(self.b2 * z);
        let zeta = self.log_p * geometric(z);
        if self.good {
            PrimeParts {
                sym2: self.log_p * powers + zeta,
                a: self.log_p / (self.p as f64 + 1.0) * powers,
                zeta,
            }
        } else {
            PrimeParts { sym2: self.log_p * powers, a: -zeta, zeta }
        }
    }
}

/// Value with an attached uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub uncertainty: f64,
}

impl SymSquare {
    pub fn new(spec: &CurveSpec, table: &ApTable) -> Self {
        let mut primes = Vec::with_capacity(table.primes().len());
        let mut locals = Vec::with_capacity(table.primes().len());
        for (p, ap) in table.iter() {
            let good = !spec.is_bad(p);
            let (a, b) = satake(p, ap, good);
            let log_p = (p as f64).ln();
            primes.push(PrimeSatake { p, log_p, good, a2: a * a, b2: b * b, shift: (-SHIFTS[0] * log_p).exp() });
            let k_max = ((40.0 / (p as f64).ln()).ceil() as usize + 2).min(MAX_LOCAL_ORDER);
            locals.push(LocalData::new(p, ap, good, k_max, 0));
        }
        Self { primes, locals, p_max: table.p_max(), nodes: OnceLock::new() }
    }

    pub fn p_max(&self) -> u64 {
        self.p_max
    }

    fn sums(&self, s: Complex64) -> (Complex64, Complex64, Complex64) {
        let (mut sym2, mut a, mut zeta) = (KahanComplex::new(), KahanComplex::new(), KahanComplex::new());
        for ps in &self.primes {
            let parts = ps.parts((-s * ps.log_p).exp());
            sym2.add(parts.sym2);
            a.add(parts.a);
            zeta.add(parts.zeta);
        }
        (-sym2.value(), a.value(), -zeta.value())
    }

    /// Sym², A_α at s and Sym² at s + SHIFTS[0], s + SHIFTS[1] in one pass.
    fn shifted_sums(&self, s: Complex64) -> [Complex64; 4] {
        debug_assert!(SHIFTS[1] == 2.0 * SHIFTS[0]);
        let mut acc = [KahanComplex::new(), KahanComplex::new(), KahanComplex::new(), KahanComplex::new()];
        for ps in &self.primes {
            let z = (-s * ps.log_p).exp();
            let parts = ps.parts(z);
            acc[0].add(parts.sym2);
            acc[1].add(parts.a);
            acc[2].add(ps.parts(z * ps.shift).sym2);
            acc[3].add(ps.parts(z * (ps.shift * ps.shift)).sym2);
        }
        [-acc[0].value(), acc[1].value(), -acc[2].value(), -acc[3].value()]
    }

    fn ratios_node(&self, t: f64) -> Result<Node> {
        let it = Complex64::new(0.0, t);
        let [sym2, a, v1, v2] = self.shifted_sums(1.0 + 2.0 * it);
        let digammas = digamma(1.0 + it)? + digamma(1.0 - it)?;
        let bracket = digammas + paired_zeta(t)? + 2.0 * (sym2 + a);
        let correction = 2.0 * (2.0 * v1 - v2 - sym2);
        Ok(Node { bracket: bracket.re, correction: correction.re })
    }

    /// Node k of the trapezoid grid, from the cache when it reaches that far.
    fn node_at(&self, k: usize) -> Result<Node> {
        let cached = self.nodes.get_or_init(|| {
            let n = (NODE_CACHE_T / T_STEP).round() as usize;
            (0..=n).map(|j| self.ratios_node(j as f64 * T_STEP)).collect::<Result<Vec<_>>>().unwrap_or_default()
        });
        match cached.get(k) {
            Some(&node) => Ok(node),
            None => self.ratios_node(k as f64 * T_STEP),
        }
    }

    /// Truncated Euler-product L′/L(s, Sym²E) over p ≤ P.
    pub fn logderiv_truncated(&self, s: Complex64) -> Complex64 {
        self.sums(s).0
    }

    /// Analytic bound on Σ_{p>P} of the ℓ ≥ 2 terms at real part σ.
    fn higher_tail(&self, re: f64) -> f64 {
        let p = self.p_max.max(2) as f64;
        // 3 Σ_{p>P} log p / p^{2σ} ≤ 3 ∫_P^∞ x^{−2σ} dx up to the prime-density factor.
        3.0 * 1.1 * p.powf(1.0 - 2.0 * re) / (2.0 * re - 1.0)
    }

    /// L′/L(s, Sym²E) with a truncation uncertainty. On Re s = 1 the ℓ = 1
    /// part is only conditionally convergent and the uncertainty comes from
    /// comparing with a Richardson extrapolation of shifted evaluations.
    pub fn logderiv(&self, s: Complex64) -> Result<Estimate> {
        if s.re < 1.0 - 1e-12 {
            return Err(Error::Domain(format!("symmetric-square Euler product needs Re s ≥ 1, got {s}")));
        }
        let value = self.logderiv_truncated(s);
        let tail = self.higher_tail(s.re);
        let uncertainty = if s.re < 1.0 + 1e-9 {
            let v1 = self.logderiv_truncated(s + SHIFTS[0]);
            let v2 = self.logderiv_truncated(s + SHIFTS[1]);
            (2.0 * v1 - v2 - value).norm() + tail
        } else {
            let p = self.p_max.max(2) as f64;
            3.0 * 1.1 * p.powf(1.0 - s.re) / (s.re - 1.0) + tail
        };
        Ok(Estimate { value, uncertainty })
    }

    /// A_{α,E}(r, r) in closed form, with a bound on the omitted primes.
    pub fn a_alpha(&self, r: Complex64) -> Result<Estimate> {
        if r.re < -1e-12 {
            return Err(Error::Domain(format!("A_α needs Re r ≥ 0, got {r}")));
        }
        let s = 1.0 + 2.0 * r;
        let value = self.sums(s).1;
        let p = self.p_max.max(2) as f64;
        // Σ_{p>P} 2 log p/((p+1)(p^σ − 1)) ≤ 2.2 ∫_P^∞ x^{−1−σ} dx.
        let uncertainty = 2.2 * p.powf(-s.re) / s.re;
        Ok(Estimate { value, uncertainty })
    }

    /// A_{α,E}(r, r) from the long Euler expression, term by term in λ(p^k).
    pub fn a_alpha_long_form(&self, r: Complex64) -> Complex64 {
        let s = 1.0 + 2.0 * r;
        let mut acc = KahanComplex::new();
        for (ps, ld) in self.primes.iter().zip(&self.locals) {
            let z = (-s * ps.log_p).exp();
            let lam = |k: usize| ld.lambda.get(k).copied().unwrap_or(0.0);
            let e_max = ld.lambda.len().saturating_sub(1) / 2;
            if !ps.good {
                let l1sq = lam(1) * lam(1);
                let mut series = Complex64::new(0.0, 0.0);
                let mut zp = z;
                for e in 1..=e_max {
                    series += lam(2 * e) * zp;
                    zp *= z;
                }
                acc.add(ps.log_p * (geometric(l1sq * z) - geometric(z) - series));
            } else {
                let l2 = lam(2);
                let (z2, z3) = (z * z, z * z * z);
                let ratio = (l2 * z - 2.0 * l2 * z2 + 3.0 * z3) / (1.0 - l2 * z + l2 * z2 - z3);
                let mut series = Complex64::new(0.0, 0.0);
                let mut zp = z;
                for e in 0..e_max {
                    series += (lam(2 * e + 2) - lam(2 * e)) * zp;
                    zp *= z;
                }
                let pf = ps.p as f64;
                acc.add(ps.log_p * (ratio - geometric(z) - series + series / (pf + 1.0)));
            }
        }
        acc.value()
    }

    /// V_∤(α, γ)·V_|(α, γ) as a truncated Euler product.
    pub fn v_product(&self, alpha: Complex64, gamma: Complex64) -> Complex64 {
        let mut log_prod = KahanComplex::new();
        for (ps, ld) in self.primes.iter().zip(&self.locals) {
            let pf = ps.p as f64;
            let lam = |k: usize| ld.lambda.get(k).copied().unwrap_or(0.0);
            let e_max = ld.lambda.len().saturating_sub(1) / 2;
            let x = (-(1.0 + 2.0 * alpha) * ps.log_p).exp();
            let cross = (-(1.0 + alpha + gamma) * ps.log_p).exp();
            let (mut even, mut odd) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let mut xp = Complex64::new(1.0, 0.0);
            for e in 0..e_max {
                even += lam(2 * e) * xp;
                odd += lam(2 * e + 1) * xp;
                xp *= x;
            }
            let factor = if ps.good {
                let inv = (-(1.0 + 2.0 * gamma) * ps.log_p).exp();
                1.0 + pf / (pf + 1.0) * ((even - 1.0) - lam(1) * cross * odd + inv * even)
            } else {
                even - lam(1) * cross * odd
            };
            log_prod.add(factor.ln());
        }
        log_prod.value().exp()
    }

    /// ∂/∂α [V_∤ V_|](α, γ) at α = γ = r by central differences.
    pub fn v_product_alpha_derivative(&self, r: Complex64, step: f64) -> Complex64 {
        (self.v_product(r + step, r) - self.v_product(r - step, r)) / (2.0 * step)
    }

    /// −ζ′/ζ + L′/L(Sym²) + A_α at 1 + 2r, every piece truncated at the same P.
    pub fn three_terms_truncated(&self, r: Complex64) -> Complex64 {
        let (sym2, a, zeta) = self.sums(1.0 + 2.0 * r);
        -zeta + sym2 + a
    }
}

/// Averaged L′/L(½ + r, E_d) predicted by the Ratios Conjecture:
/// −ζ′/ζ(1+2r) + L′/L(1+2r, Sym²E) + A_{α,E}(r, r).
pub fn ratios_avg_logderiv(sym: &SymSquare, r: Complex64) -> Result<Estimate> {
    let s = 1.0 + 2.0 * r;
    let sym2 = sym.logderiv(s)?;
    let a = sym.a_alpha(r)?;
    Ok(Estimate { value: -zeta_logderiv(s)? + sym2.value + a.value, uncertainty: sym2.uncertainty + a.uncertainty })
}

/// Pieces of the Ratios integrand at r = it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatiosTerms {
    pub r: Complex64,
    /// ψ(1+it) + ψ(1−it).
    pub digamma_sum: Complex64,
    /// ζ′/ζ(1+2it); infinite at t = 0.
    pub zeta_ld: Complex64,
    pub sym2_ld: Complex64,
    pub a_alpha: Complex64,
    /// −1/(it).
    pub pole_term: Complex64,
    /// The whole bracket with the pole of −2ζ′/ζ paired against −1/(it).
    pub bracket: Complex64,
}

/// 2(−ζ′/ζ(1+2it)) − 1/(it), regular at t = 0.
fn paired_zeta(t: f64) -> Result<Complex64> {
    if t.abs() < 1e-3 {
        let c1 = EULER_GAMMA * EULER_GAMMA + 2.0 * STIELTJES_1;
        return Ok(2.0 * (-EULER_GAMMA + c1 * Complex64::new(0.0, 2.0 * t)));
    }
    let it = Complex64::new(0.0, t);
    Ok(-2.0 * zeta_logderiv(1.0 + 2.0 * it)? - 1.0 / it)
}

pub fn ratios_terms(sym: &SymSquare, t: f64) -> Result<RatiosTerms> {
    let it = Complex64::new(0.0, t);
    let digamma_sum = digamma(1.0 + it)? + digamma(1.0 - it)?;
    let s = 1.0 + 2.0 * it;
    let zeta_ld = if t == 0.0 { Complex64::new(f64::INFINITY, 0.0) } else { zeta_logderiv(s).unwrap_or(Complex64::new(f64::INFINITY, 0.0)) };
    let (sym2_ld, a_alpha, _) = sym.sums(s);
    let pole_term = if t == 0.0 { Complex64::new(0.0, f64::INFINITY) } else { -1.0 / it };
    let bracket = digamma_sum + paired_zeta(t)? + 2.0 * (sym2_ld + a_alpha);
    Ok(RatiosTerms { r: it, digamma_sum, zeta_ld, sym2_ld, a_alpha, pole_term, bracket })
}

/// Ratios prediction for the family density.
#[derive(Clone, Debug, PartialEq)]
pub struct RatiosPrediction {
    pub log_average: f64,
    /// (1/2π)∫ φ(tL/2π)[…] dt.
    pub integral: f64,
    pub phi0_half: f64,
    pub total: f64,
    pub uncertainty: f64,
    pub sym2_cutoff: u64,
    /// Height where the node sum stops; the rest is bounded analytically.
    pub t_max: f64,
    /// How the t = 0 singularity was handled.
    pub regularization: &'static str,
}

pub const REGULARIZATION: &str = "2(-zeta'/zeta(1+2it)) paired with -1/(it); series -2γ + 4i(γ²+2γ₁)t for |t| < 1e-3";

/// Node spacing of the trapezoid sum over t. The integrand is analytic in
/// |Im t| < 1/4 and its bounded-frequency parts stay far below the aliasing
/// frequency 2π/h.
const T_STEP: f64 = 0.05;

/// Past this σ|x| the bump φ stays below 10⁻¹².
const BUMP_CUT: f64 = 100.0;

/// Height covered by the cached integrand nodes; Fejér stops here.
const NODE_CACHE_T: f64 = 400.0;

/// (1/2π)∫_ℝ φ(tL/2π)[…] dt and its uncertainty, with the height where
/// the node sum stops.
pub fn ratios_integral(sym: &SymSquare, tf: &TestFunction, l: f64) -> Result<(f64, f64, f64)> {
    if tf.is_zero() {
        return Ok((0.0, 0.0, 0.0));
    }
    let t_max = match tf.kind() {
        TestFnKind::Fejer => NODE_CACHE_T,
        TestFnKind::SmoothBump => 2.0 * PI * BUMP_CUT / (tf.sigma() * l),
    };
    let n = (t_max / T_STEP).ceil() as usize;
    let mut value = KahanSum::new();
    let mut corr = KahanSum::new();
    for k in 0..=n {
        let weight = tf.phi(k as f64 * T_STEP * l / (2.0 * PI));
        if weight == 0.0 {
            continue;
        }
        let node = sym.node_at(k)?;
        let mult = if k == 0 { 1.0 } else { 2.0 };
        value.add(mult * weight * node.bracket);
        corr.add(mult * weight * node.correction);
    }
    let scale = T_STEP / (2.0 * PI);
    let mut integral = scale * value.value();
    let mut uncertainty = scale * corr.value().abs();
    let t0 = n as f64 * T_STEP;
    // |2(−ζ′/ζ + Sym² + A)| on the line is at most about 6 log P.
    let osc_bound = 6.0 * (sym.p_max().max(3) as f64).ln() + 2.0;
    match tf.kind() {
        TestFnKind::Fejer => {
            // Past t0 the digamma part is integrated against φ's mean
            // envelope; the oscillating Euler-product parts are bounded.
            let envelope = |t: f64| {
                let x = tf.sigma() * t * l / 2.0;
                tf.sigma() / (2.0 * x * x)
            };
            let tol = Tolerance { rel: 1e-9, abs: 1e-14 };
            let digamma_tail = integrate_to_infinity(
                |t: f64| envelope(t) * 2.0 * digamma(Complex64::new(1.0, t)).map(|z| z.re).unwrap_or(0.0),
                t0,
                tol,
            )?;
            integral += 2.0 * digamma_tail / (2.0 * PI);
            // Twice the mean envelope bounds |φ| itself.
            let env_tail = 2.0 * integrate_to_infinity(envelope, t0, tol)?;
            uncertainty += 2.0 * (env_tail * osc_bound + digamma_tail.abs()) / (2.0 * PI);
        }
        TestFnKind::SmoothBump => {
            // |φ| < 10⁻¹² past the cut and shrinks tenfold every 20/σ.
            let x_tail = 1e-12 * 10.0 / tf.sigma();
            uncertainty += 2.0 * x_tail * (2.0 * PI / l) * (osc_bound + 2.0 * t0.ln().max(1.0)) / (2.0 * PI);
        }
    }
    Ok((integral, uncertainty, t0))
}

/// The Ratios Conjecture's density prediction.
pub fn ratios_density(spec: &CurveSpec, tf: &TestFunction, fam: &FamilyWeights, wf: &WeightFunction, sym: &SymSquare) -> Result<RatiosPrediction> {
    let l = crate::density::l_of(spec.conductor(), fam.x())?;
    let log_average = log_average_term(spec, tf, fam, wf)?.direct;
    let (integral, uncertainty, t_max) = ratios_integral(sym, tf, l)?;
    let phi0_half = tf.phi0() / 2.0;
    Ok(RatiosPrediction {
        log_average,
        integral,
        phi0_half,
        total: log_average + integral + phi0_half,
        uncertainty,
        sym2_cutoff: sym.p_max(),
        t_max,
        regularization: REGULARIZATION,
    })
}

/// The Ratios integral plus φ(0)/2 against the archimedean integral plus the
/// closed even prime sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatiosIdentity {
    pub ratios_side: f64,
    pub closed_side: f64,
    pub gap: f64,
    pub uncertainty: f64,
}

pub fn ratios_identity_check(spec: &CurveSpec, tf: &TestFunction, x: f64, sym: &SymSquare, table: &ApTable) -> Result<RatiosIdentity> {
    let params = FamilyParams::new(spec, tf, x, false)?;
    let (integral, uncertainty, _) = ratios_integral(sym, tf, params.l)?;
    let ratios_side = integral + tf.phi0() / 2.0;
    let closed_side = integral_term(tf, params.l)? + s_even_closed_with(spec, tf, table, &params);
    Ok(RatiosIdentity { ratios_side, closed_side, gap: (ratios_side - closed_side).abs(), uncertainty })
}

/// The X^{−1/2} coefficient and constant of the log|d| expansion, exposed for reports.
pub fn log_expansion_constants(wf: &WeightFunction) -> Result<(f64, f64)> {
    log_average_constants(wf)
}
