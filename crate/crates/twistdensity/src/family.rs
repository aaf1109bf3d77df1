//! The twist family: squarefree d coprime to N with their smooth weights.
//!
//! Only d > 0 is stored. Every weight is even in d and the Kronecker symbol
//! satisfies (−d/n) = (−1/n)(d/n), so sums over d ∈ ℤ fold onto d > 0.

use crate::error::{Error, Result};
use crate::ntkit::{self, PrimeCharTable};
use crate::numeric::{KahanSum};
use crate::testfn::WeightFunction;
use rayon::prelude::*;

/// Largest family scale accepted.
pub const MAX_X: f64 = 1e6;

/// How d is weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Weighting {
    /// w̃(d/X): the family with repetitions, normalised by W(X).
    Repetitions,
    /// w(d/X): squarefree d only, normalised by W*(X).
    Squarefree,
}

/// Positive squarefree d coprime to N with weights, in increasing order.
#[derive(Clone, Debug)]
pub struct FamilyWeights {
    x: f64,
    weighting: Weighting,
    d: Vec<i64>,
    weight: Vec<f64>,
    half_total: f64,
}

impl FamilyWeights {
    pub fn build(wf: &WeightFunction, x: f64, weighting: Weighting) -> Result<Self> {
        if !(x >= 1.0 && x <= MAX_X) {
            return Err(Error::Config(format!("family scale X = {x} outside [1, {MAX_X}]")));
        }
        let d_max = (x * wf.radius()).floor().max(2.0) as u64;
        let sieve = ntkit::build_sieve(d_max)?;
        let n = wf.conductor();
        let ds: Vec<i64> = (1..=d_max)
            .filter(|&d| sieve.is_squarefree(d) && ntkit::gcd(d, n) == 1)
            .map(|d| d as i64)
            .collect();
        let weight = ds
            .par_iter()
            .map(|&d| match weighting {
                Weighting::Repetitions => wf.wtilde(d as f64 / x),
                Weighting::Squarefree => Ok(wf.w(d as f64 / x)),
            })
            .collect::<Result<Vec<_>>>()?;
        let half_total = weight.iter().rev().copied().sum::<KahanSum>().value();
        if 2.0 * half_total < 1e-6 {
            return Err(Error::DegenerateFamily(2.0 * half_total));
        }
        Ok(Self { x, weighting, d: ds, weight, half_total })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// W(X) or W*(X): total weight over d ∈ ℤ.
    pub fn total(&self) -> f64 {
        2.0 * self.half_total
    }

    /// (d, weight) for d > 0.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.d.iter().copied().zip(self.weight.iter().copied())
    }

    /// (d, weight) over both signs of d.
    pub fn iter_signed(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.iter().flat_map(|(d, w)| [(d, w), (-d, w)])
    }

    /// Σ_{d∈ℤ} weight(d)·f(d) for f even in d.
    pub fn sum_even<F: Fn(i64) -> f64 + Sync>(&self, f: F) -> f64 {
        2.0 * self.par_sum(|d, w| w * f(d))
    }

    /// Σ_{d∈ℤ} weight(d)·(d/n).
    pub fn char_sum(&self, n: u64) -> f64 {
        let minus = ntkit::kronecker(-1, n as i64) as f64;
        if minus == -1.0 {
            return 0.0;
        }
        (1.0 + minus) * self.par_sum(|d, w| w * ntkit::kronecker(d, n as i64) as f64)
    }

    /// Σ_{d∈ℤ} weight(d)·(d/p) for a prime p, via a residue table.
    pub fn prime_char_sum(&self, p: u64) -> f64 {
        let minus = ntkit::kronecker(-1, p as i64) as f64;
        if minus == -1.0 {
            return 0.0;
        }
        let table = PrimeCharTable::new(p);
        (1.0 + minus) * self.par_sum(|d, w| w * table.get(d) as f64)
    }

    /// Σ_{d∈ℤ, p|d} weight(d).
    pub fn divisible_sum(&self, p: u64) -> f64 {
        let p = p as i64;
        2.0 * self.par_sum(|d, w| if d % p == 0 { w } else { 0.0 })
    }

    fn par_sum<F: Fn(i64, f64) -> f64 + Sync>(&self, f: F) -> f64 {
        self.d
            .par_chunks(1 << 14)
            .zip(self.weight.par_chunks(1 << 14))
            .map(|(ds, ws)| ds.iter().zip(ws).map(|(&d, &w)| f(d, w)).sum::<KahanSum>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum::<KahanSum>()
            .value()
    }
}
