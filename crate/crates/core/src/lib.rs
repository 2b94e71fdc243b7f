//! Asai gamma factors of cuspidal representations of `GL_n(F_{q^2})`.

pub mod error;
pub mod field;
pub mod matgroup;
pub mod cuspidal;
pub mod bessel;
pub mod asai;
pub mod level_zero;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
pub use field::{AddChar, FieldElem, Level, MultChar, Tower};
pub use matgroup::{ClassKind, CosetSide, CosetTable, GroupTable, Mat};
