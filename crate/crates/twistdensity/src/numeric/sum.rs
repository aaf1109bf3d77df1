//! Compensated (Neumaier) accumulation.
//!
//! Every long sum in the crate goes through [`KahanSum`] or [`KahanComplex`].
//! Partial sums merge associatively, so block-parallel reductions agree with
//! the serial order to within a few ulps.

use num_complex::Complex64;
use std::iter::Sum;
use std::ops::AddAssign;

/// Real accumulator carrying a running error term.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one, keeping both error terms.
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for KahanSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl Sum<f64> for KahanSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        iter.for_each(|x| acc.add(x));
        acc
    }
}

impl Sum<KahanSum> for KahanSum {
    fn sum<I: Iterator<Item = KahanSum>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        iter.for_each(|x| acc.merge(x));
        acc
    }
}

/// Compensated sum of an iterator of reals.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<KahanSum>().value()
}

/// Complex accumulator: independent compensated real and imaginary parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub const fn new() -> Self {
        Self { re: KahanSum::new(), im: KahanSum::new() }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: KahanComplex) {
        self.re.merge(other.re);
        self.im.merge(other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl Sum<Complex64> for KahanComplex {
    fn sum<I: Iterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = KahanComplex::new();
        iter.for_each(|z| acc.add(z));
        acc
    }
}

impl Sum<KahanComplex> for KahanComplex {
    fn sum<I: Iterator<Item = KahanComplex>>(iter: I) -> Self {
        let mut acc = KahanComplex::new();
        iter.for_each(|z| acc.merge(z));
        acc
    }
}
