#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod euler;
pub mod fields;
pub mod grid;
pub mod poisson;
pub mod profiles;
pub mod quadrature;
pub mod reduced;
pub mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
