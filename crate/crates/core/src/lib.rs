pub mod analytic;
pub mod cli;
pub mod curve;
pub mod distnum;
pub mod error;
pub mod montecarlo;
pub mod quad;
pub mod samplers;
pub mod special;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
