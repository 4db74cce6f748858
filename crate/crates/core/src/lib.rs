//! Homogeneous Finsler spheres: Minkowski norms, reductive Lie algebras,
//! geodesic orbit checks, Zermelo navigation and flag curvature.

pub mod ad;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod fd;
pub mod gocheck;
pub mod liealg;
pub mod navigation;
pub mod norms;
pub mod sampling;

pub use error::{Error, Result};
