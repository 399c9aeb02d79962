//! Laplace–Stieltjes transforms of nonnegative distributions in one to four
//! dimensions, computed by direct integration, through the CDF (Laplace–Carson
//! identity) and through the survival function; transform inversion; Müntz
//! approximation; and transform fingerprints on Müntz grids.

pub mod dist;
pub mod error;
pub mod ext;
pub mod fingerprint;
pub mod inversion;
pub mod muntz;
pub mod quad;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
