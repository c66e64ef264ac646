//! Data-driven value iteration for linear output regulation.
//!
//! The crate is split into a model-free learning path ([`sim`] logs,
//! [`regression`] matrices, [`vi`] iterations) and a model-based [`oracle`]
//! layer used only for verification. Everything numeric is generic over
//! [`Real`] (`f32` / `f64`); the aliases below fix `f64`.

// `!(x > 0)` is how NaN is rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod internal_model;
pub mod io;
pub mod linalg;
pub mod observer;
pub mod oracle;
pub mod regression;
pub mod scalar;
pub mod sim;
pub mod system;
pub mod vi;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
