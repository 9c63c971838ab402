pub mod data;
pub mod eval;
pub mod explain;
pub mod matrix;
pub mod nn;
pub mod rng;
pub mod select;
pub mod zoo;

pub use matrix::Matrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
