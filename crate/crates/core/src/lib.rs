//! Arithmetic in towers of local function fields and explicit reciprocity for Drinfeld
//! modules.

pub mod error;
pub mod fq;
pub mod series;
pub mod tower;
pub mod twisted;
pub mod cache;
pub mod drinfeld;
pub mod eval;
pub mod reciprocity;
pub mod valuation;

pub use error::{Error, Result};
