pub mod bench;
pub mod cert;
pub mod error;
pub mod extensions;
pub mod grid;
pub mod instance;
pub mod poly;
pub mod solver;

pub use error::{Error, Result};
