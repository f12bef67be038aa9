// `^` is the wedge product, so `a ^ a` is not a no-op.
#![allow(clippy::eq_op)]

pub mod bundled;
pub mod commands;
pub mod form;
pub mod g2;
pub mod integrability;
pub mod lie;
pub mod linalg;
pub mod literal;
pub mod model;
pub mod report;
pub mod scalar;
pub mod tduality;

pub use form::{Blade, Form};
pub use lie::LieAlgebra;
pub use scalar::Scalar;
