//! Arithmetic primitives: a segmented Möbius sieve, the Kronecker symbol,
//! quadratic Gauss sums and principal characters.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest sieve the crate will build.
pub const MAX_SIEVE: u64 = 100_000_000;
const DENSE_SPF_LIMIT: u64 = 10_000_000;
const SEGMENT: u64 = 1 << 18;

/// Möbius values, squarefree flags, primes and smallest prime factors up to
/// `limit`. Immutable after construction.
///
/// μ is stored in two bits per integer. Smallest prime factors are tabulated
/// densely up to 10⁷ and found by trial division by the sieving primes above.
#[derive(Clone, Debug)]
pub struct SieveTable {
    limit: u64,
    mu_bits: Vec<u64>,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl SieveTable {
    pub fn new(limit: u64) -> Result<Self> {
        build_sieve(limit)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// μ(n) for 1 ≤ n ≤ limit.
    #[inline]
    pub fn moebius(&self, n: u64) -> i8 {
        debug_assert!(n >= 1 && n <= self.limit);
        match (self.mu_bits[(n / 32) as usize] >> (2 * (n % 32))) & 3 {
            1 => 1,
            2 => -1,
            _ => 0,
        }
    }

    #[inline]
    pub fn is_squarefree(&self, n: u64) -> bool {
        self.moebius(n) != 0
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.primes.binary_search(&(n as u32)).is_ok()
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        debug_assert!(n >= 2 && n <= self.limit);
        if n <= DENSE_SPF_LIMIT.min(self.limit) {
            return self.spf[n as usize] as u64;
        }
        for &p in &self.primes {
            let p = p as u64;
            if p * p > n {
                break;
            }
            if n % p == 0 {
                return p;
            }
        }
        n
    }

    /// Distinct prime factors with multiplicity, in increasing order.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.smallest_prime_factor(n);
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}

/// Builds the sieve tables for `2 ≤ limit ≤ 10⁸`.
pub fn build_sieve(limit: u64) -> Result<SieveTable> {
    if !(2..=MAX_SIEVE).contains(&limit) {
        return Err(Error::Config(format!("sieve limit {limit} outside [2, {MAX_SIEVE}]")));
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = simple_primes(root);
    let dense = DENSE_SPF_LIMIT.min(limit);
    let mut spf = vec![0u32; dense as usize + 1];
    let mut mu_bits = vec![0u64; (limit / 32 + 1) as usize];
    let mut primes = Vec::new();

    let mut mu = vec![0i8; SEGMENT as usize];
    let mut prod = vec![0u32; SEGMENT as usize];
    let mut lo = 1;
    while lo <= limit {
        let hi = (lo + SEGMENT - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        mu[..len].fill(1);
        prod[..len].fill(1);
        for &p in &base {
            if p > hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut m = first;
            while m <= hi {
                let i = (m - lo) as usize;
                mu[i] = -mu[i];
                prod[i] *= p as u32;
                if m <= dense && spf[m as usize] == 0 {
                    spf[m as usize] = p as u32;
                }
                m += p;
            }
            let pp = p * p;
            let mut m = lo.div_ceil(pp) * pp;
            while m <= hi {
                mu[(m - lo) as usize] = 0;
                m += pp;
            }
        }
        for i in 0..len {
            let n = lo + i as u64;
            if n == 1 {
                set_mu(&mut mu_bits, 1, 1);
                continue;
            }
            if (prod[i] as u64) < n {
                // One prime factor above √limit remains.
                if mu[i] != 0 {
                    mu[i] = -mu[i];
                }
                if prod[i] == 1 {
                    primes.push(n as u32);
                    if n <= dense {
                        spf[n as usize] = n as u32;
                    }
                }
            } else if prod[i] as u64 == n && base.binary_search(&n).is_ok() {
                primes.push(n as u32);
            }
            set_mu(&mut mu_bits, n, mu[i]);
        }
        lo = hi + 1;
    }
    Ok(SieveTable { limit, mu_bits, spf, primes })
}

fn set_mu(bits: &mut [u64], n: u64, v: i8) {
    let code = match v {
        1 => 1u64,
        -1 => 2,
        _ => 0,
    };
    bits[(n / 32) as usize] |= code << (2 * (n % 32));
}

fn simple_primes(limit: u64) -> Vec<u64> {
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for n in 2..=limit {
        if !composite[n as usize] {
            out.push(n);
            let mut m = n * n;
            while m <= limit {
                composite[m as usize] = true;
                m += n;
            }
        }
    }
    out
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

/// Prime factorisation by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Squarefree divisors of `n` paired with their Möbius values.
pub fn squarefree_divisors(n: u64) -> Vec<(u64, i8)> {
    let mut out = vec![(1u64, 1i8)];
    for (p, _) in factorize(n) {
        let extra: Vec<_> = out.iter().map(|&(d, m)| (d * p, -m)).collect();
        out.extend(extra);
    }
    out
}

/// The Kronecker symbol (d/n), with (d/0) = [|d| = 1], (d/−1) = sign d and
/// (d/2) read from d mod 8.
pub fn kronecker(d: i64, n: i64) -> i8 {
    if n == 0 {
        return i8::from(d.abs() == 1);
    }
    if d % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut k: i8 = 1;
    let mut m = n.unsigned_abs();
    if n < 0 && d < 0 {
        k = -k;
    }
    let v = m.trailing_zeros();
    m >>= v;
    if v % 2 == 1 {
        k *= kronecker_two(d);
    }
    if m == 1 {
        return k;
    }
    k * jacobi(d.rem_euclid(m as i64) as u64, m)
}

#[inline]
fn kronecker_two(d: i64) -> i8 {
    match d.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// Jacobi symbol (a/b) for odd b > 0.
pub fn jacobi(mut a: u64, mut b: u64) -> i8 {
    debug_assert!(b % 2 == 1);
    a %= b;
    let mut k: i8 = 1;
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 && matches!(b % 8, 3 | 5) {
            k = -k;
        }
        if a % 4 == 3 && b % 4 == 3 {
            k = -k;
        }
        (a, b) = (b % a, a);
    }
    if b == 1 {
        k
    } else {
        0
    }
}

/// ψ_N(n): 1 when gcd(n, N) = 1, else 0.
pub fn principal_char(modulus: u64, n: i64) -> u8 {
    u8::from(gcd(n.unsigned_abs(), modulus) == 1)
}

/// Table of d ↦ (d/p) for one prime p, indexed by d mod p (odd p) or d mod 8.
#[derive(Clone, Debug)]
pub struct PrimeCharTable {
    modulus: i64,
    values: Vec<i8>,
}

impl PrimeCharTable {
    pub fn new(p: u64) -> Self {
        let modulus = if p == 2 { 8 } else { p as i64 };
        let values = (0..modulus).map(|r| kronecker(r, p as i64)).collect();
        Self { modulus, values }
    }

    #[inline]
    pub fn get(&self, d: i64) -> i8 {
        self.values[d.rem_euclid(self.modulus) as usize]
    }
}

/// The quadratic character mod an odd prime p with its Gauss sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadChar {
    pub modulus: u64,
    /// 1 for p ≡ 1 (mod 4), i for p ≡ 3 (mod 4).
    pub eps_p: Complex64,
    /// Σ_{b mod p} (b/p) e(b/p) by direct summation.
    pub tau: Complex64,
}

/// e(x) = exp(2πix) with the argument reduced to [−½, ½) first.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

pub fn gauss_data(p: u64) -> Result<QuadChar> {
    if p == 2 || !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    let tau = (1..p).map(|b| e(b as f64 / p as f64) * kronecker(b as i64, p as i64) as f64).sum();
    let eps_p = if p % 4 == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    Ok(QuadChar { modulus: p, eps_p, tau })
}

/// d′ with d/d′ a perfect square, d′ squarefree and sign d′ = sign d.
pub fn squarefree_part(d: i64) -> Result<i64> {
    if d == 0 {
        return Err(Error::Domain("squarefree part of 0".into()));
    }
    let core: u64 = factorize(d.unsigned_abs())
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(p, _)| p)
        .product();
    Ok(d.signum() * core as i64)
}

/// max_{T ≤ t_max} |Σ_{1≤u≤T} (u/p)|.
pub fn max_partial_char_sum(p: u64, t_max: u64) -> i64 {
    let table = PrimeCharTable::new(p);
    let mut s = 0i64;
    let mut best = 0i64;
    for u in 1..=t_max {
        s += table.get(u as i64) as i64;
        best = best.max(s.abs());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_mu(n: u64) -> i8 {
        let f = factorize(n);
        if f.iter().any(|&(_, e)| e > 1) {
            0
        } else if f.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn sieve_matches_trial_division() {
        let s = build_sieve(20_000).unwrap();
        assert_eq!(s.moebius(1), 1);
        assert_eq!(s.moebius(12), 0);
        assert_eq!(s.moebius(30), -1);
        for n in 1..=20_000 {
            assert_eq!(s.moebius(n), trial_mu(n), "n = {n}");
            assert_eq!(s.is_prime(n), is_prime(n), "n = {n}");
            if n >= 2 {
                assert_eq!(s.smallest_prime_factor(n), factorize(n)[0].0);
            }
        }
        assert_eq!(s.primes().len(), 2262);
    }

    #[test]
    fn sieve_spans_segments() {
        let s = build_sieve(3 * SEGMENT + 17).unwrap();
        for n in [SEGMENT - 1, SEGMENT, SEGMENT + 1, 2 * SEGMENT + 3, 3 * SEGMENT + 17] {
            assert_eq!(s.moebius(n), trial_mu(n), "n = {n}");
        }
    }

    #[test]
    fn sieve_limit_range() {
        assert!(build_sieve(1).is_err());
        assert!(build_sieve(MAX_SIEVE + 1).is_err());
    }

    #[test]
    fn moebius_is_multiplicative() {
        let s = build_sieve(10_000).unwrap();
        for m in 1..=100u64 {
            for n in 1..=100u64 {
                if gcd(m, n) == 1 {
                    assert_eq!(s.moebius(m * n), s.moebius(m) * s.moebius(n));
                }
            }
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(-3, 11), -1);
        assert!((1..100).all(|n| kronecker(1, n) == 1));
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(-5, -1), -1);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for p in (3..200).filter(|&p| is_prime(p)) {
            for d in -60i64..60 {
                let r = d.rem_euclid(p as i64) as u64;
                let euler = if r == 0 {
                    0
                } else {
                    let mut acc = 1u64;
                    for _ in 0..(p - 1) / 2 {
                        acc = acc * r % p;
                    }
                    if acc == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(kronecker(d, p as i64), euler, "({d}/{p})");
            }
        }
    }

    #[test]
    fn principal_character() {
        assert_eq!(principal_char(11, 22), 0);
        assert_eq!(principal_char(11, 12), 1);
        assert_eq!(principal_char(1, 0), 1);
    }

    #[test]
    fn gauss_sums() {
        let g5 = gauss_data(5).unwrap();
        assert_eq!(g5.eps_p, Complex64::new(1.0, 0.0));
        assert!((g5.tau.re - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(gauss_data(7).unwrap().eps_p, Complex64::new(0.0, 1.0));
        assert!(gauss_data(2).is_err());
        assert!(gauss_data(9).is_err());
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part(1).unwrap(), 1);
        assert_eq!(squarefree_part(12).unwrap(), 3);
        assert_eq!(squarefree_part(-50).unwrap(), -2);
        assert!(squarefree_part(0).is_err());
    }

    #[test]
    fn prime_char_table_agrees() {
        for p in [2u64, 3, 5, 11] {
            let t = PrimeCharTable::new(p);
            for d in -100..100 {
                assert_eq!(t.get(d), kronecker(d, p as i64));
            }
        }
    }
}
