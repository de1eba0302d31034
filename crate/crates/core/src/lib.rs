pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod preprocess;
pub mod split;
pub mod synth;

pub use error::{Error, Result};
