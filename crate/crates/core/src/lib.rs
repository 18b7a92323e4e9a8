pub mod dhsys;
pub mod cli;
pub mod error;
pub mod io;
pub mod mappings;
pub mod numkit;
pub mod radii;

pub use error::{Error, Result};
