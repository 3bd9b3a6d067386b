//! Exact computations with diagrams of modules over self-injective algebras:
//! Gorenstein projective diagrams, stable categories, homotopy Kan extensions
//! in the direct and the complexes model, and the comparison between them.

pub mod algebra;
pub mod category;
pub mod complex;
pub mod dgkan;
pub mod diagram;
pub mod error;
pub mod field;
pub mod gorenstein;
pub mod homotopy;
pub mod modules;
pub mod par;

pub use error::{Error, Result};
