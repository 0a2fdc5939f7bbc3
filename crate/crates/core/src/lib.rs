pub mod error;
pub mod numeric;

pub use error::{Error, Result};
pub mod grassmann;
pub mod exterior;
pub mod isotropic;
pub mod lie;
pub mod rng;
pub mod slice;
pub mod harness;
