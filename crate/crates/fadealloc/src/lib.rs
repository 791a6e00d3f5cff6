pub mod awgn;
pub mod constellation;
pub mod curve;
pub mod error;
pub mod fading;
pub mod interp;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
