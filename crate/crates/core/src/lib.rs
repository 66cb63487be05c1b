pub mod autodiff;
pub mod error;
pub mod exact;
pub mod expr;
pub mod layout;
pub mod linalg;
pub mod scalar;
pub mod spec;
pub mod verify;
pub mod geometry;
pub mod curvature;

pub use error::{CoreError, Result};
pub mod builtins;
pub mod sampling;
pub mod classify;
pub mod montecarlo;
