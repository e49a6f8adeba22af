//! Exact rational linear algebra and polyhedral cones.

pub mod cone;
pub mod linalg;
pub mod rational;

pub use cone::{
    dual_cone, min_shift, triangulate, triangulate_with_order, x_function, x_function_with_order, RationalCone,
    SimplicialPiece,
};
pub use rational::{LatticeVector, Rational};
