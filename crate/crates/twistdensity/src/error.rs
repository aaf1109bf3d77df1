use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular curve: y^2 = x^3 + {a}x + {b} has zero discriminant")]
    SingularCurve { a: i64, b: i64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {what} evaluated within {distance:e} of a singularity")]
    Pole { what: &'static str, distance: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, wanted {wanted:e}")]
    Quadrature { achieved: f64, wanted: f64 },

    #[error("series cutoff too small: {have} terms, need at least {need}")]
    Truncation { have: usize, need: usize },

    #[error("degenerate family: total weight {0:e} below 1e-6")]
    DegenerateFamily(f64),

    #[error("zero list incomplete: found {found} zeros, counting estimate {expected:.2}")]
    IncompleteZeros { found: usize, expected: f64 },

    #[error("cache: {0}")]
    Cache(String),
}

impl Error {
    /// Stable machine-readable code, used for structured error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SingularCurve { .. } => "SINGULAR_CURVE",
            Error::Config(_) => "CONFIG",
            Error::Domain(_) => "DOMAIN",
            Error::Pole { .. } => "POLE",
            Error::Quadrature { .. } => "QUADRATURE",
            Error::Truncation { .. } => "TRUNCATION",
            Error::DegenerateFamily(_) => "DEGENERATE_FAMILY",
            Error::IncompleteZeros { .. } => "INCOMPLETE_ZEROS",
            Error::Cache(_) => "CACHE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
