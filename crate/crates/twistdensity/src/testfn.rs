//! Test functions φ with compactly supported φ̂, smooth family weights w,
//! their Fourier and Mellin transforms, and the repetition-absorbing weight
//! w̃(x) = Σ_{n≥1, (n,N)=1} w(n²x).

use crate::error::{Error, Result};
use crate::ntkit;
use crate::numeric::special::{gamma, zeta};
use crate::numeric::{integrate, GaussLegendre, Tolerance};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Which φ to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestFnKind {
    /// φ̂(ξ) = max(0, 1 − |ξ|/σ), φ(x) = σ (sin πσx / πσx)².
    Fejer,
    /// φ̂(ξ) = exp(−1/(1 − (ξ/σ)²)) on |ξ| < σ; φ by numerical inversion.
    SmoothBump,
}

impl fmt::Display for TestFnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestFnKind::Fejer => "fejer",
            TestFnKind::SmoothBump => "smooth_bump",
        })
    }
}

impl std::str::FromStr for TestFnKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fejer" => Ok(TestFnKind::Fejer),
            "smooth_bump" | "bump" => Ok(TestFnKind::SmoothBump),
            other => Err(Error::Config(format!("unknown test function `{other}`"))),
        }
    }
}

/// Nodes for the bump inversion φ(x) = 2σ ∫₀¹ b(u) cos(2πσxu) du, frozen at build.
#[derive(Debug)]
struct BumpNodes {
    nodes: Vec<(f64, f64)>,
}

const BUMP_PANELS: usize = 32;
const BUMP_ORDER: usize = 24;
const BUMP_CACHED_RANGE: f64 = 40.0;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl BumpNodes {
    fn new() -> Self {
        let gl = GaussLegendre::new(BUMP_ORDER);
        let h = 1.0 / BUMP_PANELS as f64;
        let nodes = (0..BUMP_PANELS)
            .flat_map(|k| gl.mapped(k as f64 * h, (k + 1) as f64 * h).collect::<Vec<_>>())
            .map(|(u, w)| (u, w * bump(u)))
            .collect();
        Self { nodes }
    }
}

/// The pair (φ, φ̂) with σ = sup supp φ̂.
#[derive(Clone, Debug)]
pub struct TestFunction {
    kind: TestFnKind,
    sigma: f64,
    amplitude: f64,
    bump: Option<Arc<BumpNodes>>,
}

pub fn build_testfn(kind: TestFnKind, sigma: f64) -> Result<TestFunction> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Config(format!("support σ = {sigma} outside (0, 1]")));
    }
    let bump = (kind == TestFnKind::SmoothBump).then(|| Arc::new(BumpNodes::new()));
    Ok(TestFunction { kind, sigma, amplitude: 1.0, bump })
}

impl TestFunction {
    pub fn kind(&self) -> TestFnKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// c·φ; `scaled(0.0)` is the zero test function.
    pub fn scaled(&self, c: f64) -> Self {
        Self { amplitude: self.amplitude * c, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn phihat(&self, xi: f64) -> f64 {
        let u = xi.abs() / self.sigma;
        if u >= 1.0 {
            return 0.0;
        }
        self.amplitude
            * match self.kind {
                TestFnKind::Fejer => 1.0 - u,
                TestFnKind::SmoothBump => bump(u),
            }
    }

    pub fn phi(&self, x: f64) -> f64 {
        let s = self.sigma;
        self.amplitude
            * match self.kind {
                TestFnKind::Fejer => {
                    let y = PI * s * x;
                    if y.abs() < 1e-4 {
                        s * (1.0 - y * y / 3.0)
                    } else {
                        s * (y.sin() / y).powi(2)
                    }
                }
                TestFnKind::SmoothBump => self.bump_phi(x),
            }
    }

    fn bump_phi(&self, x: f64) -> f64 {
        let k = 2.0 * PI * self.sigma * x.abs();
        if x.abs() * self.sigma <= BUMP_CACHED_RANGE {
            let nodes = &self.bump.as_ref().expect("bump nodes").nodes;
            return 2.0 * self.sigma * nodes.iter().map(|&(u, w)| w * (k * u).cos()).sum::<f64>();
        }
        let tol = Tolerance::new(1e-10, 1e-16);
        2.0 * self.sigma * integrate(|u: f64| bump(u) * (k * u).cos(), 0.0, 1.0, tol).unwrap_or(0.0)
    }

    pub fn phi0(&self) -> f64 {
        self.phi(0.0)
    }

    pub fn phihat0(&self) -> f64 {
        self.phihat(0.0)
    }
}

/// Family cutoff weight.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    /// w(x) = exp(−πx²), self-dual under the Fourier transform.
    Gaussian,
    /// Piecewise-linear through `(x_i, w_i)` for x ≥ 0, extended evenly,
    /// zero beyond the last sample.
    Samples { xs: Vec<f64>, ws: Vec<f64> },
}

/// (w, ŵ, 𝓜w, w̃, 𝓜w̃) for a fixed conductor.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    kind: WeightKind,
    conductor: u64,
    conductor_primes: Vec<u64>,
    radius: f64,
}

/// |x| beyond which the gaussian falls below 1e-18.
const GAUSSIAN_RADIUS: f64 = 3.633_180_382_277_215;

pub fn build_weight(kind: WeightKind, conductor: u64) -> Result<WeightFunction> {
    if conductor == 0 {
        return Err(Error::Config("conductor must be positive".into()));
    }
    let radius = match &kind {
        WeightKind::Gaussian => GAUSSIAN_RADIUS,
        WeightKind::Samples { xs, ws } => {
            if xs.len() != ws.len() || xs.len() < 2 {
                return Err(Error::Config("weight samples need at least two (x, w) pairs".into()));
            }
            if xs[0] != 0.0 || xs.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Config("weight sample abscissae must start at 0 and increase".into()));
            }
            if ws.iter().any(|&w| !(w >= 0.0)) {
                return Err(Error::Config("weight samples must be nonnegative".into()));
            }
            if ws.iter().all(|&w| w == 0.0) {
                return Err(Error::Config("weight is identically zero".into()));
            }
            *xs.last().expect("nonempty")
        }
    };
    let conductor_primes = ntkit::factorize(conductor).into_iter().map(|(p, _)| p).collect();
    Ok(WeightFunction { kind, conductor, conductor_primes, radius })
}

impl WeightFunction {
    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn conductor_primes(&self) -> &[u64] {
        &self.conductor_primes
    }

    /// Point beyond which w is below 1e-18 (or exactly zero).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn w(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::Gaussian => (-PI * x * x).exp(),
            WeightKind::Samples { xs, ws } => {
                let x = x.abs();
                if x >= self.radius {
                    return 0.0;
                }
                let i = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                ws[i] + t * (ws[i + 1] - ws[i])
            }
        }
    }

    /// ŵ(ξ) = ∫ w(x) e(−xξ) dx.
    pub fn what(&self, xi: f64) -> f64 {
        match &self.kind {
            WeightKind::Gaussian => (-PI * xi * xi).exp(),
            WeightKind::Samples { xs, ws } => {
                let k = 2.0 * PI * xi;
                let mut total = 0.0;
                for i in 0..xs.len() - 1 {
                    total += linear_cos_integral(xs[i], xs[i + 1], ws[i], ws[i + 1], k);
                }
                2.0 * total
            }
        }
    }

    /// 𝓜w(s) = ∫₀^∞ x^{s−1} w(x) dx.
    pub fn mellin_w(&self, s: Complex64) -> Result<Complex64> {
        let d = (s - s.re.round()).norm();
        if s.re.round() <= 0.0 && d < 1e-6 {
            return Err(Error::Pole { what: "Mellin transform of w", distance: d });
        }
        Ok(match &self.kind {
            WeightKind::Gaussian => {
                if s.im == 0.0 {
                    0.5 * gamma(0.5 * s) / PI.powf(0.5 * s.re)
                } else {
                    0.5 * (-0.5 * s * PI.ln()).exp() * gamma(0.5 * s)
                }
            }
            WeightKind::Samples { xs, ws } => {
                let mut total = Complex64::new(0.0, 0.0);
                for i in 0..xs.len() - 1 {
                    let (x0, x1) = (xs[i], xs[i + 1]);
                    let slope = (ws[i + 1] - ws[i]) / (x1 - x0);
                    let c0 = ws[i] - slope * x0;
                    let p = |x: f64, e: Complex64| if x == 0.0 { Complex64::new(0.0, 0.0) } else { (e * x.ln()).exp() };
                    total += c0 * (p(x1, s) - p(x0, s)) / s + slope * (p(x1, s + 1.0) - p(x0, s + 1.0)) / (s + 1.0);
                }
                total
            }
        })
    }

    fn coprime(&self, n: u64) -> bool {
        self.conductor_primes.iter().all(|&p| n % p != 0)
    }

    /// w̃(x) = Σ_{n≥1, (n,N)=1} w(n²x), summed until n²|x| passes the weight's radius.
    pub fn wtilde(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::Domain("w̃ is unbounded at 0".into()));
        }
        let x = x.abs();
        let n_max = (self.radius / x).sqrt().floor() as u64 + 1;
        let mut acc = 0.0;
        // Summed from the tail so the small terms accumulate first.
        for n in (1..=n_max).rev() {
            if self.coprime(n) {
                acc += self.w((n * n) as f64 * x);
            }
        }
        Ok(acc)
    }

    /// 𝓜w̃(s) = ∏_{p|N}(1 − p^{−2s}) ζ(2s) 𝓜w(s).
    pub fn mellin_wtilde(&self, s: Complex64) -> Result<Complex64> {
        let d = (s - 0.5).norm();
        if d < 1e-6 {
            return Err(Error::Pole { what: "Mellin transform of w̃", distance: d });
        }
        let euler: Complex64 = self
            .conductor_primes
            .iter()
            .map(|&p| 1.0 - (-2.0 * s * (p as f64).ln()).exp())
            .product();
        Ok(euler * zeta(2.0 * s) * self.mellin_w(s)?)
    }

    /// 𝓜w̃(s) for Re s > ½ by quadrature of x^{s−1}w̃(x) over [x₀, radius]
    /// in log x. Below x₀ = 10⁻⁶ the leading behaviour
    /// w̃(x) ≈ ½∏_{p|N}(1 − 1/p)𝓜w(½)x^{−1/2} is integrated exactly.
    pub fn mellin_wtilde_quadrature(&self, s: Complex64) -> Result<Complex64> {
        if s.re <= 0.5 {
            return Err(Error::Domain(format!("Mellin transform of w̃ needs Re s > 1/2, got {s}")));
        }
        const X0: f64 = 1e-6;
        let local: f64 = self.conductor_primes.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
        let c = 0.5 * local * self.mellin_w(Complex64::new(0.5, 0.0))?.re;
        let head = c * (s - 0.5).inv() * ((s - 0.5) * X0.ln()).exp();
        let body = integrate(
            |v: f64| ((s * v).exp()) * self.wtilde(v.exp()).unwrap_or(0.0),
            X0.ln(),
            self.radius.ln(),
            Tolerance::new(1e-11, 1e-14),
        )?;
        Ok(head + body)
    }
}

/// ∫_{x0}^{x1} (linear from w0 to w1) cos(kx) dx in closed form.
fn linear_cos_integral(x0: f64, x1: f64, w0: f64, w1: f64, k: f64) -> f64 {
    let h = x1 - x0;
    if k.abs() * h < 1e-3 {
        // The closed form cancels badly for small k·h.
        let gl = GaussLegendre::new(8);
        return gl.integrate(|x| (w0 + (w1 - w0) * (x - x0) / h) * (k * x).cos(), x0, x1);
    }
    let slope = (w1 - w0) / h;
    let anti = |x: f64, w: f64| w * (k * x).sin() / k + slope * (k * x).cos() / (k * k);
    anti(x1, w1) - anti(x0, w0)
}

/// Growth report for |𝓜w(σ+it)|(1+|t|)^n.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub sigma_re: f64,
    /// (n, max over the window, max over its upper half)
    pub rows: Vec<(u32, f64, f64)>,
}

impl DecayReport {
    /// Bounded in the window: the upper half never exceeds the overall maximum
    /// attained in the lower half.
    pub fn bounded(&self) -> bool {
        self.rows.iter().all(|&(_, all, upper)| upper.is_finite() && upper <= all)
    }
}

pub fn mellin_decay_check(wf: &WeightFunction, sigma_re: f64, t_list: &[f64]) -> Result<DecayReport> {
    let mut rows = Vec::new();
    let half = t_list.len() / 2;
    for n in 1..=4u32 {
        let vals = t_list
            .iter()
            .map(|&t| Ok(wf.mellin_w(Complex64::new(sigma_re, t))?.norm() * (1.0 + t.abs()).powi(n as i32)))
            .collect::<Result<Vec<_>>>()?;
        let all = vals.iter().cloned().fold(0.0, f64::max);
        let upper = vals[half..].iter().cloned().fold(0.0, f64::max);
        rows.push((n, all, upper));
    }
    Ok(DecayReport { sigma_re, rows })
}
