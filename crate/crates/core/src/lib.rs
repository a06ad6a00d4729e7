pub mod adversary;
pub mod algebra;
pub mod entropy;
pub mod equations;
pub mod error;
pub mod level1;
pub mod level2;
pub mod wire;

pub use error::{Error, ErrorKind, Result};
