//! Acceptance run: one PASS/FAIL line per criterion, followed by the
//! individual checks behind it. Exits nonzero if any criterion fails.

use num_complex::Complex64;
use std::process::ExitCode;
use std::time::{Duration, Instant};
use twistdensity::charsum::{gauss_expansion_check, logd_sum, p_divides_d_sum, poisson_check, repetition_main_term, squarefree_main_term};
use twistdensity::curve::known::{curve_11a, curve_37a};
use twistdensity::curve::{local_data, ApTable, CurveSpec};
use twistdensity::density::{family_density_with, s_odd_empirical};
use twistdensity::family::{FamilyWeights, Weighting};
use twistdensity::ntkit::{gauss_data, is_prime, max_partial_char_sum, squarefree_divisors};
use twistdensity::predict::{self, katz_sarnak_target, main_terms, ratios_identity_check, ExponentKind, SymSquare};
use twistdensity::testfn::{build_testfn, build_weight, mellin_decay_check, TestFnKind, WeightFunction, WeightKind};
use twistdensity::zeros::{explicit_formula_check, find_zeros};
use twistdensity::Result;

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

fn below(name: &str, value: f64, limit: f64) -> Check {
    check(name, value < limit, format!("{value:.3e} < {limit:.1e}"))
}

fn gaussian(n: u64) -> WeightFunction {
    build_weight(WeightKind::Gaussian, n).expect("gaussian weight")
}

fn odd_primes(bound: u64) -> impl Iterator<Item = u64> {
    (3..=bound).filter(|&p| is_prime(p))
}

/// #E(F_p) by listing every (x, y), including the point at infinity.
fn naive_point_count(spec: &CurveSpec, p: u64) -> u64 {
    let (a, b) = (spec.a().rem_euclid(p as i64) as u64, spec.b().rem_euclid(p as i64) as u64);
    let mut squares = vec![0u64; p as usize];
    for y in 0..p {
        squares[(y * y % p) as usize] += 1;
    }
    1 + (0..p).map(|x| squares[((x * x % p * x + a * x + b) % p) as usize]).sum::<u64>()
}

fn a1() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let gauss = odd_primes(200).map(|p| gauss_data(p).map(|g| (g.tau - g.eps_p * (p as f64).sqrt()).norm())).collect::<Result<Vec<_>>>()?;
    out.push(below("gauss sum sign, p ≤ 200", gauss.into_iter().fold(0.0, f64::max), 1e-9));

    let pv = odd_primes(200).map(|p| max_partial_char_sum(p, 5 * p) as f64 / ((p as f64).sqrt() * (p as f64).ln())).fold(0.0, f64::max);
    out.push(check("partial sums within √p log p, T ≤ 5p", pv <= 1.0, format!("max ratio {pv:.3}")));

    for spec in [curve_11a(), curve_37a()] {
        let table = ApTable::compute(&spec, 10_000)?;
        let good: Vec<(u64, i64)> = table.iter().filter(|&(p, _)| !spec.is_bad(p)).collect();
        let hasse = good.iter().map(|&(p, ap)| ap.unsigned_abs() as f64 / (2.0 * (p as f64).sqrt())).fold(0.0, f64::max);
        out.push(check(format!("{}: Hasse bound, good p ≤ 10⁴", spec.label()), hasse <= 1.0, format!("max |a_p|/2√p {hasse:.4}")));

        let counts_ok = good.iter().filter(|&&(p, _)| p > 3 && p <= 200).all(|&(p, ap)| naive_point_count(&spec, p) as i64 == p as i64 + 1 - ap);
        out.push(check(format!("{}: a_p against naive point counts, 3 < p ≤ 200", spec.label()), counts_ok, ""));

        // λ(p^k) = sin((k+1)θ)/sin θ with a_p/√p = 2cos θ.
        let mut worst: f64 = 0.0;
        for &(p, ap) in &good {
            let local = local_data(&spec, p, 12, 0)?;
            let theta = (ap as f64 / (2.0 * (p as f64).sqrt())).acos();
            for (k, &lam) in local.lambda.iter().enumerate() {
                let expected = ((k as f64 + 1.0) * theta).sin() / theta.sin();
                worst = worst.max((lam - expected).abs() / expected.abs().max(1.0));
            }
        }
        out.push(below(&format!("{}: λ(p^k) against the Euler factor, k ≤ 12", spec.label()), worst, 1e-12));
    }
    Ok(out)
}

fn a2() -> Result<Vec<Check>> {
    let wf = gaussian(11);
    let m1 = wf.mellin_w(Complex64::new(1.0, 0.0))?.re;
    let mut out = vec![check("𝓜w(1) = ŵ(0)/2", m1 == wf.what(0.0) / 2.0, format!("gap {:.1e}", (m1 - wf.what(0.0) / 2.0).abs()))];
    for s in [Complex64::new(0.75, 0.0), Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)] {
        let gap = (wf.mellin_wtilde(s)? - wf.mellin_wtilde_quadrature(s)?).norm();
        out.push(below(&format!("𝓜w̃ product vs quadrature at s = {s}"), gap, 1e-6));
    }
    let ts: Vec<f64> = (1..=60).map(|t| t as f64).collect();
    let decay = mellin_decay_check(&wf, 1.0, &ts)?;
    let orders: Vec<u32> = decay.rows.iter().map(|r| r.0).collect();
    out.push(check("decay report bounded for n ≤ 4", decay.bounded() && (1..=4).all(|n| orders.contains(&n)), format!("orders {orders:?}")));
    Ok(out)
}

fn a3() -> Result<Vec<Check>> {
    let wf = gaussian(11);
    let rep = |x: f64| FamilyWeights::build(&wf, x, Weighting::Repetitions);
    let (rep3, rep4, rep5) = (rep(1e3)?, rep(1e4)?, rep(1e5)?);
    let gap1 = |fam: &FamilyWeights| (fam.char_sum(1) / repetition_main_term(&wf, fam.x(), 1) - 1.0).abs();
    let (g4, g5) = (gap1(&rep4), gap1(&rep5));
    let mut out = vec![
        below("n = 1 relative gap at X = 10⁴", g4, 1e-2),
        check("n = 1 gap no larger at X = 10⁵", g5 <= g4, format!("{g5:.3e} ≤ {g4:.3e}")),
    ];
    let square = ((rep5.char_sum(4) / rep5.char_sum(1)) / (2.0 / 3.0) - 1.0).abs();
    out.push(below("n = 4 against n = 1 ratio 2/3", square, 3e-2));
    let nonsquare = [2u64, 3, 5].iter().map(|&m| (rep5.char_sum(m) / rep5.total()).abs()).fold(0.0, f64::max);
    out.push(below("nonsquare n ∈ {2,3,5} normalized at X = 10⁵", nonsquare, 1e-2));
    let sqf = FamilyWeights::build(&wf, 1e5, Weighting::Squarefree)?;
    out.push(below("squarefree constant at X = 10⁵", (sqf.char_sum(1) / squarefree_main_term(&wf, 1e5, 1) - 1.0).abs(), 2e-2));
    let (l3, l5) = (logd_sum(&rep3, &wf)?.gap.abs(), logd_sum(&rep5, &wf)?.gap.abs());
    out.push(check("log|d| average gap shrinks 10³ → 10⁵", l5 < l3, format!("{l3:.3e} → {l5:.3e}")));
    for p in [3u64, 7] {
        let (r, target) = p_divides_d_sum(&rep4, 11, p);
        out.push(below(&format!("share of p | d against 1/(p+1), p = {p}"), (r / target - 1.0).abs(), 1e-2));
    }
    Ok(out)
}

fn a4() -> Result<Vec<Check>> {
    let wf = gaussian(11);
    let (mut poisson, mut points): (f64, usize) = (0.0, 0);
    for p in [3u64, 5, 7, 13] {
        for (ell, _) in squarefree_divisors(11) {
            for b in [1, p - 1] {
                for y in [10.0, 100.0, 1000.0] {
                    poisson = poisson.max(poisson_check(&wf, p, ell, b, y)?.gap);
                    points += 1;
                }
            }
        }
    }
    let (mut expansion, mut epoints): (f64, usize) = (0.0, 0);
    for p in odd_primes(30).filter(|p| 11 % p != 0) {
        for y in [10.0, 50.0, 200.0] {
            expansion = expansion.max(gauss_expansion_check(&wf, 11, p, y)?);
            epoints += 1;
        }
    }
    Ok(vec![
        check("poisson grid has ≥ 20 points", points >= 20, format!("{points}")),
        below("poisson gap", poisson, 1e-8),
        check("gauss expansion grid has ≥ 20 points", epoints >= 20, format!("{epoints}")),
        below("gauss expansion gap", expansion, 1e-8),
    ])
}

fn a5() -> Result<Vec<Check>> {
    let spec = curve_11a();
    let tf = build_testfn(TestFnKind::Fejer, 0.4)?;
    let mut out = Vec::new();
    for d in [1i64, -3, 5] {
        let zeros = find_zeros(&spec, d, 25.0)?;
        out.push(check(
            format!("d = {d}: zero list complete to T = 25"),
            zeros.complete,
            format!("{} found, estimate {:.2}", zeros.count_found, zeros.count_estimate),
        ));
        let ef = explicit_formula_check(&spec, &zeros, &tf, 1e3)?;
        out.push(check(
            format!("d = {d}: zero sum against prime side"),
            ef.gap <= ef.tail_bound + 1e-4,
            format!("gap {:.3e} ≤ tail {:.3e} + 1e-4", ef.gap, ef.tail_bound),
        ));
    }
    Ok(out)
}

fn a6() -> Result<Vec<Check>> {
    let spec = curve_11a();
    let x = 1e3;
    let table = ApTable::compute(&spec, 100_000)?;
    let sym = SymSquare::new(&spec, &table);
    let tf = build_testfn(TestFnKind::Fejer, 0.4)?;
    let id = ratios_identity_check(&spec, &tf, x, &sym, &table)?;
    let mut out = vec![check(
        "Ratios terms against integral term + closed even sum",
        id.gap <= id.uncertainty + 10.0 / x,
        format!("gap {:.3e} ≤ {:.3e} + {:.0e}", id.gap, id.uncertainty, 10.0 / x),
    )];
    for r in [0.1, 0.2] {
        let r = Complex64::new(r, 0.0);
        out.push(below(&format!("A_E(r, r) = 1 at r = {}", r.re), (sym.v_product(r, r) - 1.0).norm(), 1e-6));
        let closed = sym.a_alpha(r)?.value;
        out.push(below(&format!("A_α long form against closed form at r = {}", r.re), (sym.a_alpha_long_form(r) - closed).norm(), 1e-8));
    }
    Ok(out)
}

fn a7() -> Result<Vec<Check>> {
    let spec = curve_11a();
    let wf = gaussian(11);
    let sigma = 0.3;
    let tf = build_testfn(TestFnKind::Fejer, sigma)?;
    let xs = [1e3, 1e4, 1e5];
    let table = ApTable::compute(&spec, 100_000)?;
    let (mut reports, mut diffs, mut ks) = (Vec::new(), Vec::new(), Vec::new());
    for x in xs {
        let fam = FamilyWeights::build(&wf, x, Weighting::Repetitions)?;
        let report = family_density_with(&spec, &tf, &fam, &table)?;
        let main = main_terms(&spec, &tf, &fam, &wf, &table)?;
        diffs.push((report.total - main.total).abs());
        ks.push((report.total - katz_sarnak_target(&tf)).abs());
        reports.push(report);
    }
    let fit = s_odd_empirical(&reports[..2])?;
    let limit = predict::exponent(ExponentKind::Eta, sigma)? + 0.25;
    Ok(vec![
        below("|density − main terms| at X = 10⁴", diffs[1], 0.05),
        check("main-term gap smaller at 10⁴ than 10³", diffs[1] < diffs[0], format!("{:.3e} → {:.3e}", diffs[0], diffs[1])),
        check(
            "s_odd two-point exponent, 10³ → 10⁴",
            fit.slope.is_some_and(|s| s <= limit),
            format!("{:?} ≤ {limit:.2}", fit.slope),
        ),
        check(
            "Katz–Sarnak residual decreasing over 10³, 10⁴, 10⁵",
            ks.windows(2).all(|w| w[1] < w[0]),
            format!("{:.3} → {:.3} → {:.3}", ks[0], ks[1], ks[2]),
        ),
    ])
}

fn a8() -> Result<Vec<Check>> {
    let mut mismatches = Vec::new();
    for m in 1..=10u32 {
        let f = |n: u32| n as f64;
        let (lo, mid, top) = (1.0 / f(4 * m + 2), 1.0 / f(4 * m + 1), 1.0 / f(4 * m));
        // Each band's formula evaluated as written at its own breakpoints.
        let expected = [
            (ExponentKind::Eta, lo, -1.0 + 2.0 * lo),
            (ExponentKind::Eta, mid, -f(4 * m - 1) / f(4 * m + 1)),
            (ExponentKind::Theta, lo, -1.0 + lo),
            (ExponentKind::Theta, top, -1.0 + 1.0 / f(4 * m)),
        ];
        for (kind, sigma, want) in expected {
            let got = predict::exponent(kind, sigma)?;
            if got != want {
                mismatches.push(format!("{kind:?}({sigma}) = {got}, want {want}"));
            }
        }
        if predict::star_exponent(lo)? != (lo - 1.0) / 2.0 {
            mismatches.push(format!("star at m = {m}"));
        }
    }
    let grid: Vec<f64> = (1..200).map(|k| k as f64 / 200.0).collect();
    let rows = predict::exponent_rows(&grid);
    let series = rows.iter().any(|r| r.eta.is_some())
        && rows.iter().all(|r| r.theta.is_some() && r.star.is_some() && r.ratios == -0.5);
    Ok(vec![
        check("breakpoint values for 4m+2 ≤ 42", mismatches.is_empty(), mismatches.join("; ")),
        check("exponent rows carry eta, theta, star and ratios series", series, format!("{} rows", rows.len())),
    ])
}

type Criterion = (&'static str, fn() -> Result<Vec<Check>>, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("A1 arithmetic kernel", a1, Duration::from_secs(30)),
        ("A2 Mellin suite", a2, Duration::from_secs(60)),
        ("A3 character sums", a3, Duration::from_secs(300)),
        ("A4 Poisson and Gauss expansion", a4, Duration::from_secs(60)),
        ("A5 explicit formula with zeros", a5, Duration::from_secs(600)),
        ("A6 Ratios identity", a6, Duration::from_secs(300)),
        ("A7 density reconciliation", a7, Duration::from_secs(1800)),
        ("A8 exponent tables", a8, Duration::from_secs(1)),
    ];
    let mut all = true;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, lines) = match result {
            Ok(checks) => {
                let pass = checks.iter().all(|c| c.pass) && elapsed <= budget;
                let lines = checks
                    .into_iter()
                    .map(|c| format!("    {} {}{}", if c.pass { "ok  " } else { "FAIL" }, c.name, if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) }))
                    .collect();
                (pass, lines)
            }
            Err(e) => (false, vec![format!("    error: {e}")]),
        };
        all &= pass;
        println!("{} {name} ({:.2} s, budget {} s)", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64(), budget.as_secs());
        for line in lines {
            println!("{line}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
