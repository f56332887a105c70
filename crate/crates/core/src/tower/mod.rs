//! Towers of local fields over `F_q((t))` and their elements.

mod element;
mod field;
mod trace;

pub use element::FieldElement;
pub use field::{LayerKind, TowerField};
