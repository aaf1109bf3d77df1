//! Values and low zeros of L(s, E_d) for small conductors, used to test the
//! explicit formula against actual zeros.
//!
//! With A = √N|d|/2π the completed function Λ(s) = A^s Γ(s+½) L(s, E_d)
//! satisfies Λ(s) = ε Λ(1−s), and for any δ = e^{iθ} with |θ| < π/2
//!
//! Λ(s) = Σ a_n [ (A/n)^s Γ(s+½, nδ/A) + ε (A/n)^{1−s} Γ(3/2−s, n/(Aδ)) ].
//!
//! Tilting θ towards sign(Im s)·π/2 keeps the terms the size of the result,
//! which otherwise decays like e^{−π|t|/2} while the terms do not.

use crate::cache;
use crate::curve::{twist_root_number, CurveSpec};
use crate::density::dx_single;
use crate::error::{Error, Result};
use crate::ntkit::{self, build_sieve};
use crate::numeric::special::{digamma, gamma, ln_gamma, upper_incomplete_gamma_with};
use crate::numeric::{integrate_to_infinity, KahanComplex, Tolerance};
use crate::testfn::{TestFnKind, TestFunction};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Largest analytic conductor N d² accepted by the zero scan.
pub const MAX_TWIST_CONDUCTOR: f64 = 1e6;
/// Largest scan height.
pub const MAX_HEIGHT: f64 = 40.0;
/// Largest number of Dirichlet coefficients built.
pub const MAX_TERMS: usize = 5_000_000;

/// Magnitude (in e-folds) the rotation is allowed to lose to cancellation.
const ROTATION_SLACK: f64 = 4.0;
/// e-folds of decay demanded of the first omitted term.
const TAIL_EFOLDS: f64 = 40.0;

/// Rotation angle used at height t.
fn rotation(t: f64) -> f64 {
    t.signum() * (FRAC_PI_2 - ROTATION_SLACK / t.abs()).max(0.0)
}

/// Dirichlet coefficients λ_E(n)χ_d(n) and the functional-equation data of
/// one quadratic twist.
#[derive(Clone, Debug)]
pub struct TwistedL {
    d: i64,
    conductor: f64,
    a: f64,
    eps: f64,
    coef: Vec<f64>,
}

impl TwistedL {
    /// Enough coefficients for |Im s| ≤ height.
    pub fn new(spec: &CurveSpec, d: i64, height: f64) -> Result<Self> {
        let a = analytic_scale(spec, d);
        Self::with_terms(spec, d, terms_needed(a, height))
    }

    pub fn with_terms(spec: &CurveSpec, d: i64, terms: usize) -> Result<Self> {
        let eps = twist_root_number(spec, d)?.sign() as f64;
        if d.rem_euclid(4) != 1 {
            return Err(Error::Domain(format!(
                "twist {d} is not ≡ 1 mod 4, so (d/·) is not primitive of conductor |d|"
            )));
        }
        if terms > MAX_TERMS {
            return Err(Error::Truncation { have: MAX_TERMS, need: terms });
        }
        let m = terms.max(2);
        let table = cache::load_or_compute(spec, m as u64)?;
        let sieve = build_sieve(m as u64)?;
        let mut coef = vec![0.0; m + 1];
        coef[1] = 1.0;
        for n in 2..=m {
            let p = sieve.smallest_prime_factor(n as u64) as usize;
            let mut rest = n;
            while rest % p == 0 {
                rest /= p;
            }
            coef[n] = if rest > 1 {
                coef[rest] * coef[n / rest]
            } else if n == p {
                let ap = table.get(p as u64).ok_or(Error::Truncation { have: table.p_max() as usize, need: p })?;
                ap as f64 / (p as f64).sqrt()
            } else if spec.is_bad(p as u64) {
                coef[p] * coef[n / p]
            } else {
                coef[p] * coef[n / p] - coef[n / (p * p)]
            };
        }
        for (n, c) in coef.iter_mut().enumerate().skip(1) {
            *c *= ntkit::kronecker(d, n as i64) as f64;
        }
        Ok(Self {
            d,
            conductor: spec.conductor() as f64 * (d as f64).powi(2),
            a: analytic_scale(spec, d),
            eps,
            coef,
        })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// N d².
    pub fn conductor(&self) -> f64 {
        self.conductor
    }

    /// √(N d²)/2π.
    pub fn scale(&self) -> f64 {
        self.a
    }

    pub fn root_number(&self) -> f64 {
        self.eps
    }

    /// a_n for n = 0..=M, with a_0 = 0.
    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn terms(&self) -> usize {
        self.coef.len() - 1
    }

    /// Λ(s) with the default rotation for Im s.
    pub fn lambda(&self, s: Complex64) -> Result<Complex64> {
        let need = terms_needed(self.a, s.im.abs());
        if need > self.terms() {
            return Err(Error::Truncation { have: self.terms(), need });
        }
        Ok(self.lambda_rotated(s, rotation(s.im)))
    }

    /// Λ(s) with an explicit rotation angle θ; every admissible θ gives the
    /// same value when enough terms are present.
    pub fn lambda_rotated(&self, s: Complex64, theta: f64) -> Complex64 {
        let delta = Complex64::from_polar(1.0, theta);
        let (a1, a2) = (s + 0.5, 1.5 - s);
        let (g1, g2) = (gamma(a1), gamma(a2));
        let mut acc = KahanComplex::new();
        for (n, &c) in self.coef.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let r = n as f64 / self.a;
            let lr = r.ln();
            let first = (-s * lr).exp() * upper_incomplete_gamma_with(a1, g1, r * delta);
            let second = (-(1.0 - s) * lr).exp() * upper_incomplete_gamma_with(a2, g2, r / delta);
            acc.add(c * (first + self.eps * second));
        }
        acc.value()
    }

    /// |A^{½+it} Γ(1+it)|, the size of Λ(½+it) when |L(½+it)| ≈ 1.
    pub fn gamma_scale(&self, t: f64) -> f64 {
        self.a.sqrt() * ln_gamma(Complex64::new(1.0, t)).re.exp()
    }

    /// Λ(½+it) rotated onto the real line: Re Λ for ε = +1, Im Λ for ε = −1.
    /// Returns the real value and the size of the discarded part relative to
    /// the gamma scale.
    pub fn hardy(&self, t: f64) -> Result<(f64, f64)> {
        let v = self.lambda(Complex64::new(0.5, t))?;
        let (on, off) = if self.eps > 0.0 { (v.re, v.im) } else { (v.im, v.re) };
        Ok((on, off.abs() / self.gamma_scale(t)))
    }
}

fn analytic_scale(spec: &CurveSpec, d: i64) -> f64 {
    (spec.conductor() as f64).sqrt() * d.unsigned_abs() as f64 / (2.0 * PI)
}

/// Terms needed at height t: the first omitted term must be e^{−40} below
/// the size of Λ.
fn terms_needed(a: f64, t: f64) -> usize {
    let theta = rotation(t).abs();
    let r = (TAIL_EFOLDS + (FRAC_PI_2 - theta) * t) / theta.cos();
    (a * r).ceil() as usize + 1
}

/// Λ(s, E_d) with an explicit coefficient cutoff M.
pub fn lambda_value(spec: &CurveSpec, d: i64, s: Complex64, m: usize) -> Result<Complex64> {
    TwistedL::with_terms(spec, d, m)?.lambda(s)
}

/// (1/π)(T log(√(Nd²)/2π) + Im log Γ(1+iT)): expected zero count in (0, T].
pub fn count_estimate(conductor: f64, t: f64) -> f64 {
    let a = conductor.sqrt() / (2.0 * PI);
    (t * a.ln() + ln_gamma(Complex64::new(1.0, t)).im) / PI
}

/// Zeros of L(s, E_d) on the critical line with |γ| ≤ T.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroList {
    pub curve: String,
    pub d: i64,
    /// N d².
    pub conductor: f64,
    /// Sorted ordinates, central zero included.
    pub gammas: Vec<f64>,
    pub height: f64,
    /// Expected count in (0, T].
    pub count_estimate: f64,
    /// Found count in (0, T].
    pub count_found: usize,
    pub central_zero: bool,
    /// Largest half-width of a bisection bracket.
    pub refinement_error: f64,
    /// Largest size of the part of Λ(½+it) that should vanish, in gamma-scale units.
    pub fe_residual: f64,
    /// Positive and negative ordinates pair up to 10⁻⁶.
    pub symmetric: bool,
    pub complete: bool,
}

impl ZeroList {
    /// Number of ordinates in (lo, hi].
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.gammas.iter().filter(|&&g| g > lo && g <= hi).count()
    }
}

const BISECTION_WIDTH: f64 = 1e-8;
/// Allowed disagreement between found and expected counts.
const COUNT_SLACK: f64 = 2.0;

struct Scan {
    roots: Vec<f64>,
    width: f64,
    residual: f64,
}

fn scan(lf: &TwistedL, height: f64, step: f64, sign: f64) -> Result<Scan> {
    let z = |t: f64| lf.hardy(sign * t);
    let n = (height / step).ceil() as usize;
    let (mut prev_t, (mut prev, mut residual)) = (0.0, z(0.0)?);
    if lf.eps < 0.0 {
        // Λ(½) = 0 forced by the sign; start just off the centre.
        prev_t = step * 1e-3;
        prev = z(prev_t)?.0;
    }
    let mut roots = Vec::new();
    let mut width: f64 = 0.0;
    for k in 1..=n {
        let t = (k as f64 * step).min(height);
        let (v, res) = z(t)?;
        residual = residual.max(res);
        if v == 0.0 {
            roots.push(t);
        } else if prev != 0.0 && v.signum() != prev.signum() {
            let (mut lo, mut hi, mut flo) = (prev_t, t, prev);
            while hi - lo > BISECTION_WIDTH {
                let mid = 0.5 * (lo + hi);
                let fm = z(mid)?.0;
                if fm == 0.0 {
                    (lo, hi) = (mid, mid);
                } else if fm.signum() == flo.signum() {
                    (lo, flo) = (mid, fm);
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
            width = width.max(0.5 * (hi - lo));
        }
        (prev_t, prev) = (t, v);
    }
    Ok(Scan { roots: roots.into_iter().map(|t| sign * t).collect(), width, residual })
}

/// Sign-change scan of the rotated Λ on both halves of the critical line.
pub fn find_zeros(spec: &CurveSpec, d: i64, height: f64) -> Result<ZeroList> {
    if !(height > 0.0 && height <= MAX_HEIGHT) {
        return Err(Error::Config(format!("scan height {height} outside (0, {MAX_HEIGHT}]")));
    }
    let conductor = spec.conductor() as f64 * (d as f64).powi(2);
    if conductor > MAX_TWIST_CONDUCTOR {
        return Err(Error::Config(format!("twist conductor {conductor} above {MAX_TWIST_CONDUCTOR}")));
    }
    let lf = TwistedL::new(spec, d, height + 1.0)?;
    let q = conductor.sqrt();
    let step = 0.5 / (q + height).ln() / 4.0;
    let up = scan(&lf, height, step, 1.0)?;
    let down = scan(&lf, height, step, -1.0)?;
    let symmetric = up.roots.len() == down.roots.len()
        && up.roots.iter().zip(&down.roots).all(|(a, b)| (a + b).abs() <= 1e-6);
    let central_zero = lf.eps < 0.0;
    let mut gammas: Vec<f64> = down.roots.iter().chain(&up.roots).copied().collect();
    if central_zero {
        gammas.push(0.0);
    }
    gammas.sort_by(f64::total_cmp);
    let estimate = count_estimate(conductor, height);
    let complete = symmetric && (up.roots.len() as f64 - estimate).abs() <= COUNT_SLACK;
    Ok(ZeroList {
        curve: spec.label(),
        d,
        conductor,
        gammas,
        height,
        count_estimate: estimate,
        count_found: up.roots.len(),
        central_zero,
        refinement_error: up.width.max(down.width),
        fe_residual: up.residual.max(down.residual),
        symmetric,
        complete,
    })
}

/// Zero-side and prime-side evaluations of the explicit formula for one twist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExplicitFormulaCheck {
    /// Σ_{|γ|≤T} φ(γL/2π).
    pub lhs: f64,
    /// D_X(E_d; φ) through the prime sum.
    pub rhs: f64,
    /// Bound on Σ_{|γ|>T} |φ(γL/2π)|.
    pub tail_bound: f64,
    pub gap: f64,
}

/// Bound on the zeros above T for the Fejér φ: |φ(x)| ≤ φ(0)/(πσx)², the
/// zero density is N′(t) = (log A + Re ψ(1+it))/π, and the count may stray
/// from its estimate by 2 + ½ log(Q(T+2)).
fn fejer_tail_bound(tf: &TestFunction, l: f64, zeros: &ZeroList) -> Result<f64> {
    let phi0 = tf.phi0().abs();
    if phi0 == 0.0 {
        return Ok(0.0);
    }
    let sigma = tf.sigma();
    let f = |t: f64| 4.0 * phi0 / (sigma * sigma * l * l * t * t);
    let q = zeros.conductor.sqrt();
    let log_a = (q / (2.0 * PI)).ln();
    let density = |t: f64| {
        let psi = digamma(Complex64::new(1.0, t)).map(|z| z.re).unwrap_or(t.ln());
        f(t) * ((log_a + psi) / PI).max(0.0)
    };
    let t = zeros.height;
    let smooth = integrate_to_infinity(density, t, Tolerance::new(1e-8, 1e-16))?;
    let slack = 2.0 + 0.5 * (q * (t + 2.0)).ln();
    Ok(2.0 * (smooth + 2.0 * slack * f(t)))
}

/// Compares Σ φ(γL/2π) over a complete zero list with the prime-side D_X.
pub fn explicit_formula_check(spec: &CurveSpec, zeros: &ZeroList, tf: &TestFunction, x: f64) -> Result<ExplicitFormulaCheck> {
    if !zeros.complete {
        return Err(Error::IncompleteZeros { found: zeros.count_found, expected: zeros.count_estimate });
    }
    if tf.kind() != TestFnKind::Fejer {
        return Err(Error::Config("the zero-tail bound needs the Fejér test function".into()));
    }
    let l = crate::density::l_of(spec.conductor(), x)?;
    let lhs: f64 = zeros.gammas.iter().map(|&g| tf.phi(g * l / (2.0 * PI))).sum();
    let rhs = dx_single(spec, zeros.d, tf, x)?;
    let tail_bound = fejer_tail_bound(tf, l, zeros)?;
    Ok(ExplicitFormulaCheck { lhs, rhs, tail_bound, gap: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::known::{curve_11a, curve_37a};
    use crate::numeric::special::upper_incomplete_gamma;
    use crate::numeric::integrate_to_infinity;
    use crate::testfn::build_testfn;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn incomplete_gamma_against_quadrature() {
        for k in 0..20 {
            let a = c(0.5 + 0.1 * k as f64, 0.7 * k as f64 - 5.0);
            let x = 0.3 + 0.4 * k as f64;
            let direct = integrate_to_infinity(|u: f64| (-u).exp() * ((a - 1.0) * u.ln()).exp(), x, Tolerance::new(1e-12, 1e-16)).unwrap();
            let got = upper_incomplete_gamma(a, c(x, 0.0));
            assert!((got - direct).norm() < 1e-9 * direct.norm().max(1e-12), "{a} {x}: {got} {direct}");
        }
    }

    #[test]
    fn rotation_does_not_change_the_value() {
        let lf = TwistedL::with_terms(&curve_11a(), 5, 4000).unwrap();
        let s = c(0.7, 3.0);
        let base = lf.lambda_rotated(s, 0.0);
        for theta in [0.3, 0.8, 1.2] {
            assert!((lf.lambda_rotated(s, theta) - base).norm() < 1e-10 * base.norm());
        }
    }

    #[test]
    fn matches_dirichlet_series_far_right() {
        let e = curve_11a();
        let lf = TwistedL::with_terms(&e, -3, 20_000).unwrap();
        let s = c(3.5, 1.0);
        let l: Complex64 = lf.coefficients().iter().enumerate().skip(1).map(|(n, &a)| a * (-s * (n as f64).ln()).exp()).sum();
        let expected = (s * lf.scale().ln()).exp() * gamma(s + 0.5) * l;
        let got = lf.lambda(s).unwrap();
        assert!((got - expected).norm() < 1e-9 * expected.norm(), "{got} {expected}");
    }

    #[test]
    fn functional_equation_and_symmetry() {
        for (e, d) in [(curve_11a(), 1), (curve_11a(), 5), (curve_37a(), 1)] {
            let lf = TwistedL::new(&e, d, 10.0).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let s = c(0.1 + 0.2 * i as f64, -8.0 + 4.0 * j as f64);
                    let lhs = lf.lambda(s).unwrap();
                    let rhs = lf.root_number() * lf.lambda(1.0 - s).unwrap();
                    assert!((lhs - rhs).norm() < 1e-8 * lf.gamma_scale(s.im).max(lhs.norm()), "{d} {s}");
                    let conj = lf.lambda(s.conj()).unwrap();
                    assert!((conj - lhs.conj()).norm() < 1e-8 * lf.gamma_scale(s.im).max(lhs.norm()));
                }
            }
        }
    }

    #[test]
    fn odd_sign_forces_central_zero() {
        let lf = TwistedL::new(&curve_37a(), 1, 1.0).unwrap();
        assert_eq!(lf.root_number(), -1.0);
        assert!(lf.lambda(c(0.5, 0.0)).unwrap().norm() < 1e-8);
        let even = TwistedL::new(&curve_11a(), 1, 1.0).unwrap();
        assert!(even.lambda(c(0.5, 0.0)).unwrap().norm() > 1e-3);
    }

    #[test]
    fn rejects_short_tables_and_even_twists() {
        let lf = TwistedL::with_terms(&curve_11a(), 1, 20).unwrap();
        assert!(matches!(lf.lambda(c(0.5, 30.0)), Err(Error::Truncation { .. })));
        assert!(TwistedL::new(&curve_11a(), 2, 5.0).is_err());
        assert!(TwistedL::new(&curve_11a(), -1, 5.0).is_err());
    }

    #[test]
    fn square_factor_leaves_coefficients_unchanged() {
        for n in (1..500i64).filter(|n| n % 3 != 0) {
            assert_eq!(ntkit::kronecker(5, n), ntkit::kronecker(45, n));
        }
    }

    #[test]
    fn known_low_zeros() {
        let z = find_zeros(&curve_11a(), 1, 10.0).unwrap();
        assert!(z.complete && z.symmetric && !z.central_zero);
        let first = z.gammas.iter().copied().find(|&g| g > 0.0).unwrap();
        assert!((first - 6.362_613_89).abs() < 1e-6, "{first}");
        let z = find_zeros(&curve_37a(), 1, 10.0).unwrap();
        assert!(z.central_zero);
        let first = z.gammas.iter().copied().find(|&g| g > 0.0).unwrap();
        assert!((first - 5.003_170_01).abs() < 1e-6, "{first}");
    }

    #[test]
    fn low_zero_counts() {
        let e = curve_11a();
        for d in [1, -3, 5] {
            let z = find_zeros(&e, d, 12.0).unwrap();
            assert!(z.complete, "{z:?}");
            let expected = (11.0 * (d * d) as f64 / (2.0 * PI * std::f64::consts::E).powi(2)).ln() / (2.0 * PI);
            assert!((z.count_in(0.0, 1.0) as f64 - expected).abs() <= 2.0);
            assert!(z.fe_residual < 1e-8, "{}", z.fe_residual);
        }
    }

    #[test]
    fn explicit_formula_small_case() {
        let e = curve_11a();
        let tf = build_testfn(TestFnKind::Fejer, 0.4).unwrap();
        let short = find_zeros(&e, 1, 15.0).unwrap();
        let long = find_zeros(&e, 1, 25.0).unwrap();
        let a = explicit_formula_check(&e, &short, &tf, 1e3).unwrap();
        let b = explicit_formula_check(&e, &long, &tf, 1e3).unwrap();
        assert!(b.tail_bound < a.tail_bound);
        assert!(a.gap <= a.tail_bound + 1e-4, "{a:?}");
        assert!(b.gap <= b.tail_bound + 1e-4, "{b:?}");
        let zero = explicit_formula_check(&e, &short, &tf.scaled(0.0), 1e3).unwrap();
        assert_eq!((zero.lhs, zero.rhs, zero.tail_bound), (0.0, 0.0, 0.0));
    }
}
