//! Numerics for singular parabolic free-boundary problems.

pub mod acceptance;
pub mod error;
pub mod integrator;
pub mod model;
pub mod num;
pub mod quadrature;
pub mod radial;
pub mod roots;
pub mod self_similar;
pub mod solver;
pub mod traveling_wave;
pub mod special;
pub mod weiss;

pub use error::{Error, Result};
pub use model::{beta_of_gamma, MollifierSpec, ModelParams};
pub use num::Real;

pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
