pub mod arith;
pub mod asymptotics;
pub mod densities;
pub mod enumeration;
pub mod error;
pub mod heights;
pub mod lattice;
pub mod toric;

pub use error::{Error, Result};
