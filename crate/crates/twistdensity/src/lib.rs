pub mod cache;
pub mod charsum;
pub mod curve;
pub mod density;
pub mod error;
pub mod family;
pub mod ntkit;
pub mod predict;
pub mod zeros;
pub mod testfn;
pub mod numeric;

pub use error::{Error, Result};
