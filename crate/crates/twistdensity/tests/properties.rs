use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;
use twistdensity::curve::known::{curve_11a, curve_37a};
use twistdensity::curve::{lambda_n, local_data, twist_root_number, ApTable};
use twistdensity::ntkit::{gcd, is_prime, kronecker, squarefree_part};
use twistdensity::predict::{eta, theta, SymSquare};
use twistdensity::testfn::{build_testfn, build_weight, TestFnKind, WeightKind};

fn sym_square() -> &'static SymSquare {
    static SYM: OnceLock<SymSquare> = OnceLock::new();
    SYM.get_or_init(|| {
        let e = curve_11a();
        SymSquare::new(&e, &ApTable::compute(&e, 2_000).unwrap())
    })
}

fn squarefree() -> impl Strategy<Value = i64> {
    (-500i64..=500).prop_filter("squarefree, nonzero", |&d| d != 0 && squarefree_part(d).unwrap() == d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kronecker_is_completely_multiplicative(d in squarefree(), n in 1i64..700, m in 1i64..700) {
        let (a, b) = (kronecker(d, n), kronecker(d, m));
        prop_assert!([-1, 0, 1].contains(&a));
        prop_assert_eq!(kronecker(d, n * m), a * b);
        prop_assert_eq!(a == 0, gcd(d.unsigned_abs(), n as u64) != 1);
    }

    #[test]
    fn twist_root_numbers_are_signs(d in squarefree()) {
        for e in [curve_11a(), curve_37a()] {
            if gcd(d.unsigned_abs(), e.conductor()) == 1 {
                let s = twist_root_number(&e, d).unwrap().sign();
                prop_assert_eq!(s * s, 1);
            } else {
                prop_assert!(twist_root_number(&e, d).is_err());
            }
        }
    }

    #[test]
    fn power_sums_within_two_at_good_primes(p in (5u64..20_000).prop_filter("prime", |&p| is_prime(p))) {
        for e in [curve_11a(), curve_37a()] {
            if e.is_bad(p) {
                continue;
            }
            let ld = local_data(&e, p, 8, 12).unwrap();
            for m in 1..=12 {
                prop_assert!(ld.s(m).abs() <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn hecke_eigenvalues_are_multiplicative(n in 1u64..3_000, m in 1u64..3_000) {
        let e = curve_37a();
        prop_assume!(gcd(n, m) == 1);
        let (a, b) = (lambda_n(&e, n).unwrap(), lambda_n(&e, m).unwrap());
        prop_assert!((lambda_n(&e, n * m).unwrap() - a * b).abs() < 1e-10);
    }

    #[test]
    fn exponents_are_ordered_and_monotone(s1 in 1e-3f64..0.499, s2 in 1e-3f64..0.499) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(eta(lo).unwrap() <= eta(hi).unwrap());
        prop_assert!(theta(lo).unwrap() <= theta(hi).unwrap());
        for s in [lo, hi] {
            let (e, t) = (eta(s).unwrap(), theta(s).unwrap());
            prop_assert!(t <= e);
            prop_assert!(e <= (2.0 * s - 1.0).min(-0.6) + 1e-15);
        }
    }

    #[test]
    fn test_functions_are_even_with_compact_fourier_support(sigma in 0.05f64..1.0, x in -50.0f64..50.0, xi in -2.0f64..2.0) {
        let tf = build_testfn(TestFnKind::Fejer, sigma).unwrap();
        prop_assert_eq!(tf.phi(x), tf.phi(-x));
        prop_assert_eq!(tf.phihat(xi), tf.phihat(-xi));
        if xi.abs() >= sigma {
            prop_assert_eq!(tf.phihat(xi), 0.0);
        }
        prop_assert!(tf.phi(x) <= tf.phi0() + 1e-15);
        let wf = build_weight(WeightKind::Gaussian, 11).unwrap();
        prop_assert_eq!(wf.w(x / 10.0), wf.w(-x / 10.0));
        prop_assert_eq!(wf.what(xi), wf.what(-xi));
    }

    #[test]
    fn sym_square_respects_conjugation(re in 1.05f64..3.0, im in -30.0f64..30.0) {
        let sym = sym_square();
        let s = Complex64::new(re, im);
        let (a, b) = (sym.logderiv_truncated(s), sym.logderiv_truncated(s.conj()));
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
