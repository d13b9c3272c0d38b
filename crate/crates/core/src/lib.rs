pub mod classifier;
pub mod cli;
pub mod cluster;
pub mod corpus;
pub mod error;
pub mod interpret;
pub mod reduce;
pub mod sampling;
pub mod search;
pub mod synth;
pub mod util;
pub mod validate;

pub use error::{Error, Result};
