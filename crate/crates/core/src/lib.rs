pub mod cli;
pub mod constructions;
pub mod diagnostics;
pub mod eigenlab;
pub mod error;
pub mod exactnum;
pub mod fourier;
pub mod io;
pub mod measure;
pub mod testfn;
pub mod verify;

pub use error::{Error, Result};
