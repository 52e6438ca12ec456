//! Traveling-wave solutions of the complex cubic-quintic Ginzburg-Landau
//! equation: singularity analysis, subequation fitting, closed-form elliptic
//! representations and their cross-verification.

pub mod bigc;
pub mod elliptic;
pub mod landen;
pub mod laurent;
pub mod model;
pub mod subeq;
pub mod error;
pub mod series;

pub use error::{Error, Result};
