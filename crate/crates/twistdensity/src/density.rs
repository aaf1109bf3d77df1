//! The explicit formula: the 1-level density of a single twist and its
//! weighted family average, split into the log term, the archimedean
//! integral and the prime sums over even and odd Satake powers.

use crate::cache;
use crate::curve::{ApTable, CurveSpec, LocalData, MAX_LOCAL_ORDER};
use crate::error::{Error, Result};
use crate::family::{FamilyWeights, Weighting};
use crate::ntkit;
use crate::numeric::special::exp_integral_e1;
use crate::numeric::{integrate, KahanSum, Tolerance};
use crate::testfn::{TestFnKind, TestFunction, WeightFunction};
use rayon::prelude::*;
use std::f64::consts::{E, PI};

/// (2πe)².
pub const TWO_PI_E_SQ: f64 = 4.0 * PI * PI * E * E;

/// Largest prime-sum cutoff accepted; a_p is found by point counting.
pub const MAX_PRIME_CUTOFF: u64 = 5_000_000;

/// Work guard on (#prime powers) × (#twists) for one family average.
pub const MAX_FAMILY_WORK: f64 = 5e10;

const QUAD_TOL: Tolerance = Tolerance { rel: 1e-12, abs: 1e-15 };

/// L = log(N X²/(2πe)²).
pub fn l_of(conductor: u64, x: f64) -> Result<f64> {
    let arg = conductor as f64 * x * x / TWO_PI_E_SQ;
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::Domain(format!("log argument {arg} for N = {conductor}, X = {x}")));
    }
    Ok(arg.ln())
}

/// Scale-dependent quantities shared by every term at one X.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyParams {
    pub x: f64,
    pub l: f64,
    /// N/(2πe)².
    pub c_e: f64,
    pub squarefree_only: bool,
    /// ⌊(c_E X²)^σ⌋: φ̂(m log p/L) vanishes once p^m exceeds it.
    pub prime_cutoff: u64,
}

impl FamilyParams {
    pub fn new(spec: &CurveSpec, tf: &TestFunction, x: f64, squarefree_only: bool) -> Result<Self> {
        if !(x >= 1.0) {
            return Err(Error::Config(format!("X = {x} must be at least 1")));
        }
        let l = l_of(spec.conductor(), x)?;
        if l <= 0.0 {
            return Err(Error::Domain(format!("L = {l} is not positive")));
        }
        let c_e = spec.conductor() as f64 / TWO_PI_E_SQ;
        let cutoff = if tf.is_zero() { 1.0 } else { (tf.sigma() * l).exp().floor() };
        if cutoff > MAX_PRIME_CUTOFF as f64 {
            return Err(Error::Truncation { have: MAX_PRIME_CUTOFF as usize, need: cutoff as usize });
        }
        Ok(Self { x, l, c_e, squarefree_only, prime_cutoff: cutoff as u64 })
    }
}

/// The archimedean term −(2/L)∫₀^∞ (φ̂(x/L)e^{−x}/(1−e^{−x}) − φ̂(0)e^{−x}/x) dx.
pub fn integral_term(tf: &TestFunction, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("L = {l} is not positive")));
    }
    if tf.is_zero() {
        return Ok(0.0);
    }
    let h0 = tf.phihat0();
    let end = tf.sigma() * l;
    let split = end.min(1e-3);
    // Near 0 the two poles cancel; expand their difference.
    let near = |x: f64| {
        let g = 0.5 + x * (-5.0 / 12.0 + x * (1.0 / 6.0 + x * (-31.0 / 720.0 + x / 120.0)));
        (tf.phihat(x / l) - h0) / x.exp_m1() + h0 * g
    };
    let far = |x: f64| tf.phihat(x / l) / x.exp_m1() - h0 * (-x).exp() / x;
    // Past x = 60 the φ̂ part is below e^{−60} and only the E₁ tail remains.
    let upper = end.min(60.0);
    let mut inner = integrate(near, 0.0, split, QUAD_TOL)?;
    if upper > split {
        inner += integrate(far, split, upper, QUAD_TOL)?;
    }
    inner -= h0 * exp_integral_e1(upper)?;
    Ok(-2.0 / l * inner)
}

/// One (p, m) term of the prime sum without the twist character:
/// s_m(p)·log p/p^{m/2}·φ̂(m log p/L).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeTerm {
    pub p: u64,
    pub m: u32,
    pub coef: f64,
}

/// All nonvanishing prime-power terms for the given cutoff.
pub fn prime_terms(spec: &CurveSpec, table: &ApTable, tf: &TestFunction, params: &FamilyParams) -> Result<Vec<PrimeTerm>> {
    let cutoff = params.prime_cutoff;
    if let Some(q) = (table.p_max() + 1..=cutoff).find(|&q| ntkit::is_prime(q)) {
        return Err(Error::Truncation { have: table.p_max() as usize, need: q as usize });
    }
    let mut out = Vec::new();
    for (p, ap) in table.truncated(cutoff) {
        let lp = (p as f64).ln();
        let m_max = ((cutoff as f64).ln() / lp + 1e-12).floor() as usize;
        let m_max = m_max.clamp(1, MAX_LOCAL_ORDER);
        let ld = LocalData::new(p, ap, !spec.is_bad(p), 0, m_max);
        let mut pm = 1u64;
        for m in 1..=m_max {
            pm = match pm.checked_mul(p) {
                Some(v) if v <= cutoff => v,
                _ => break,
            };
            let phat = tf.phihat(m as f64 * lp / params.l);
            if phat != 0.0 {
                let coef = ld.s(m) * lp / (p as f64).powf(m as f64 / 2.0) * phat;
                out.push(PrimeTerm { p, m: m as u32, coef });
            }
        }
    }
    Ok(out)
}

fn check_twist(spec: &CurveSpec, d: i64) -> Result<()> {
    if d == 0 || ntkit::squarefree_part(d)? != d {
        return Err(Error::Domain(format!("twist {d} is not squarefree")));
    }
    if ntkit::gcd(d.unsigned_abs(), spec.conductor()) != 1 {
        return Err(Error::Domain(format!("twist {d} shares a factor with the conductor")));
    }
    Ok(())
}

/// −(2/L) Σ_{p,m} s_m χ_d(p^m) log p/p^{m/2} φ̂(m log p/L) from precomputed terms.
pub fn twisted_prime_sum(terms: &[PrimeTerm], d: i64, l: f64) -> f64 {
    let mut acc = KahanSum::new();
    let mut last = (0u64, 0i8);
    for t in terms {
        if t.p != last.0 {
            last = (t.p, ntkit::kronecker(d, t.p as i64));
        }
        let chi = if t.m % 2 == 0 { last.1 * last.1 } else { last.1 };
        acc.add(t.coef * chi as f64);
    }
    -2.0 / l * acc.value()
}

fn table_for(spec: &CurveSpec, params: &FamilyParams) -> Result<ApTable> {
    cache::load_or_compute(spec, params.prime_cutoff.max(2))
}

pub fn prime_sum_single(spec: &CurveSpec, d: i64, tf: &TestFunction, params: &FamilyParams) -> Result<f64> {
    check_twist(spec, d)?;
    let table = table_for(spec, params)?;
    let terms = prime_terms(spec, &table, tf, params)?;
    Ok(twisted_prime_sum(&terms, d, params.l))
}

/// log(N d²/(2π)²).
pub fn log_conductor(conductor: u64, d: i64) -> f64 {
    (conductor as f64).ln() + 2.0 * (d.unsigned_abs() as f64).ln() - 2.0 * (2.0 * PI).ln()
}

/// D_X(E_d; φ) through the explicit formula.
pub fn dx_single(spec: &CurveSpec, d: i64, tf: &TestFunction, x: f64) -> Result<f64> {
    check_twist(spec, d)?;
    let params = FamilyParams::new(spec, tf, x, false)?;
    let head = tf.phihat0() / params.l * log_conductor(spec.conductor(), d) + integral_term(tf, params.l)?;
    Ok(head + prime_sum_single(spec, d, tf, &params)?)
}

/// Term-by-term breakdown of one family average.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub curve: String,
    pub x: f64,
    pub sigma: f64,
    pub kind: TestFnKind,
    pub squarefree_only: bool,
    pub l: f64,
    pub prime_cutoff: u64,
    pub term_log: f64,
    pub term_integral: f64,
    pub s_even: f64,
    pub s_odd: f64,
    /// The m = 1 part of s_odd.
    pub s_odd_leading: f64,
    pub total: f64,
    /// W(X) or W*(X).
    pub w_value: f64,
    pub family_size: usize,
}

pub fn family_density(spec: &CurveSpec, tf: &TestFunction, wf: &WeightFunction, x: f64, squarefree_only: bool) -> Result<DensityReport> {
    let weighting = if squarefree_only { Weighting::Squarefree } else { Weighting::Repetitions };
    let fam = FamilyWeights::build(wf, x, weighting)?;
    let params = FamilyParams::new(spec, tf, x, squarefree_only)?;
    let table = table_for(spec, &params)?;
    family_density_with(spec, tf, &fam, &table)
}

/// Family average over a prebuilt weight table and a_p table.
pub fn family_density_with(spec: &CurveSpec, tf: &TestFunction, fam: &FamilyWeights, table: &ApTable) -> Result<DensityReport> {
    let squarefree_only = fam.weighting() == Weighting::Squarefree;
    let params = FamilyParams::new(spec, tf, fam.x(), squarefree_only)?;
    let w = fam.total();
    let terms = prime_terms(spec, table, tf, &params)?;
    let distinct = terms.iter().map(|t| t.p).collect::<std::collections::BTreeSet<_>>();
    let work = distinct.len() as f64 * fam.len() as f64;
    if work > MAX_FAMILY_WORK {
        return Err(Error::Config(format!("family average needs {work:.3e} character evaluations")));
    }
    let l = params.l;
    let term_log = if tf.is_zero() {
        0.0
    } else {
        let avg = fam.sum_even(|d| log_conductor(spec.conductor(), d)) / w;
        tf.phihat0() / l * avg
    };
    let term_integral = integral_term(tf, l)?;
    // Per prime: averaged χ_d(p) and averaged χ_d(p²) = 1_{p∤d}.
    let factors: Vec<(u64, f64, f64)> = distinct
        .into_par_iter()
        .map(|p| (p, fam.prime_char_sum(p) / w, 1.0 - fam.divisible_sum(p) / w))
        .collect();
    let (mut even, mut odd, mut odd1) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for t in &terms {
        let i = factors.binary_search_by_key(&t.p, |f| f.0).expect("prime present");
        let (_, f_odd, f_even) = factors[i];
        if t.m % 2 == 0 {
            even.add(t.coef * f_even);
        } else {
            odd.add(t.coef * f_odd);
            if t.m == 1 {
                odd1.add(t.coef * f_odd);
            }
        }
    }
    let s_even = -2.0 / l * even.value();
    let s_odd = -2.0 / l * odd.value();
    Ok(DensityReport {
        curve: spec.label(),
        x: fam.x(),
        sigma: tf.sigma(),
        kind: tf.kind(),
        squarefree_only,
        l,
        prime_cutoff: params.prime_cutoff,
        term_log,
        term_integral,
        s_even,
        s_odd,
        s_odd_leading: -2.0 / l * odd1.value(),
        total: term_log + term_integral + s_even + s_odd,
        w_value: w,
        family_size: 2 * fam.len(),
    })
}

/// The even-power prime sum with χ_d(p^{2ℓ}) replaced by its family mean
/// (1 + ψ_N(p)/p)^{−1}.
pub fn s_even_closed(spec: &CurveSpec, tf: &TestFunction, x: f64) -> Result<f64> {
    let params = FamilyParams::new(spec, tf, x, false)?;
    let bound = (params.prime_cutoff as f64).sqrt().floor() as u64;
    let table = cache::load_or_compute(spec, bound.max(2))?;
    Ok(s_even_closed_with(spec, tf, &table, &params))
}

pub fn s_even_closed_with(spec: &CurveSpec, tf: &TestFunction, table: &ApTable, params: &FamilyParams) -> f64 {
    let cutoff = params.prime_cutoff as f64;
    let mut acc = KahanSum::new();
    for (p, ap) in table.iter() {
        let pf = p as f64;
        if pf * pf > cutoff {
            break;
        }
        let lp = pf.ln();
        let ell_max = ((cutoff.ln() / lp + 1e-12) / 2.0).floor() as usize;
        let ld = LocalData::new(p, ap, !spec.is_bad(p), 0, (2 * ell_max).min(MAX_LOCAL_ORDER));
        let local = if spec.is_bad(p) { 1.0 } else { 1.0 / (1.0 + 1.0 / pf) };
        for ell in 1..=ell_max.min(MAX_LOCAL_ORDER / 2) {
            let phat = tf.phihat(2.0 * ell as f64 * lp / params.l);
            acc.add(ld.s(2 * ell) * lp / pf.powi(ell as i32) * phat * local);
        }
    }
    -2.0 / params.l * acc.value()
}

/// s_odd at several X and the two-point slope between the extremes.
#[derive(Clone, Debug, PartialEq)]
pub struct OddFit {
    pub points: Vec<(f64, f64)>,
    /// None when either endpoint is below the noise floor.
    pub slope: Option<f64>,
}

pub const ODD_NOISE_FLOOR: f64 = 1e-14;

pub fn s_odd_empirical(reports: &[DensityReport]) -> Result<OddFit> {
    if reports.len() < 2 {
        return Err(Error::Config("an exponent fit needs at least two values of X".into()));
    }
    let mut points: Vec<(f64, f64)> = reports.iter().map(|r| (r.x, r.s_odd)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x1, s1) = points[0];
    let (x2, s2) = points[points.len() - 1];
    let slope = (s1.abs() > ODD_NOISE_FLOOR && s2.abs() > ODD_NOISE_FLOOR && x2 > x1)
        .then(|| (s2 / s1).abs().ln() / (x2 / x1).ln());
    Ok(OddFit { points, slope })
}
