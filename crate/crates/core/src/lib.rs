//! Certified construction of right-angled necklace polyhedra in real
//! hyperbolic 4-space and the disc bundles they produce.

pub mod error;
pub mod fibration;
pub mod minkowski;
pub mod necklace;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
