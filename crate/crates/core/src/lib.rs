//! Design and analysis of spatially-coupled LDPC and repeat-accumulate code
//! ensembles over the binary erasure channel.

pub mod cli;
pub mod construct;
pub mod de;
pub mod designer;
pub mod ege;
pub mod ensemble;
pub mod error;
pub mod lp;
pub mod sim;

pub use error::{Error, Result};
