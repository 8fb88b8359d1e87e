//! Tip force reconstruction for forceps instrumented with four fibre Bragg
//! grating sensors on two bent prongs.

pub mod analysis;
pub mod calibration;
pub mod classify;
pub mod error;
pub mod forces;
pub mod ica;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod preprocess;
pub mod profiles;
pub mod signal;

pub use error::{Error, Result};
