pub mod cli;
pub mod codec;
pub mod error;
pub mod kernel;
pub mod layout;
pub mod mars;
pub mod membus;
pub mod sim;

pub use error::{Error, Result};
