//! Shared geometry and numerics: physical constants, planar vectors, obstacles,
//! the canonical mollifier, closed contours with winding numbers, masked grids
//! and a few quadrature rules used across the workspace.

pub mod constants;
pub mod contour;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod mollifier;
pub mod quadrature;
pub mod vec2;

pub use constants::PhysicalConstants;
pub use contour::{winding_number, Contour};
pub use error::CoreError;
pub use geometry::{signed_distance, Domain, Obstacle, Shape};
pub use grid::{GridField, GridSpec};
pub use mollifier::{mollifier_derivative, mollifier_eval};
pub use num_complex::Complex64;
pub use vec2::Vec2;
