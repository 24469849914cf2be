pub mod bsets;
pub mod dvr;
pub mod orbits;
pub mod pairs;
pub mod pmodule;
pub mod poset;
pub mod error;
pub mod hecke;

pub use error::{Error, Result};
