//! Numerical laboratory for the constant Q-curvature problem on model 4-manifolds.

pub mod error;
pub mod geometry;
pub mod paneitz;
pub mod measure;
pub mod bubbles;
pub mod barycenter;
pub mod functional;
pub mod minmax;
pub mod quadrature;

pub use error::{Error, Result};
