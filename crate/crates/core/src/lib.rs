//! Exact characteristic numbers of planar curves in P³ with prescribed
//! singularities: δ ordered nodes plus at most one singularity of type A1–A4
//! or D4, total codimension at most four.

pub mod cache;
pub mod chern;
pub mod classes;
pub mod cli;
pub mod error;
pub mod kp;
pub mod recursion;
pub mod reference;
pub mod ring;
pub mod singularity;

pub use error::{Error, Result};
pub use recursion::{CharacteristicNumber, Conditions, Engine, Insertions, Query};
pub use singularity::{Configuration, Singularity};
