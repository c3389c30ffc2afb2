//! Arbitrary-order first-kind Nédélec (edge) finite elements.

pub mod amr;
pub mod assembly;
pub mod element;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod interpolation;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod space;
pub mod topology;
pub mod vec3;

pub use error::{Error, Result};
