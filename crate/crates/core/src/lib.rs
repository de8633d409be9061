//! Computing with canonical functions between countable homogeneous
//! structures.

pub mod behavior;
pub mod canonicity;
pub mod canonize;
pub mod error;
pub mod fraisse;
pub mod group;
pub mod oracle;
pub mod ramsey;
pub mod symbolic;
pub mod text;

pub use error::{Error, Result};
