//! Numerical building blocks shared by every module.

pub mod quad;
pub mod special;
pub mod sum;

pub use quad::{integrate, integrate_to_infinity, GaussLegendre, Tolerance};
pub use sum::{ksum, KahanComplex, KahanSum};
