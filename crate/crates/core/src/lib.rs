//! Serre curves relative to the mod-2 obstructions 2Cs, 2B and 2Cn.
//!
//! The pipeline goes curve -> mod 2 class -> 2-adic label -> entanglement data -> adelic image
//! -> cyclicity constant.

pub mod adelic;
pub mod arith;
pub mod chain;
pub mod cyclicity;
pub mod ellq;
pub mod error;
pub mod fingroup;
pub mod modmat;
pub mod paperdata;

pub use error::{Error, Result};
pub use modmat::ResidueMatrix;
