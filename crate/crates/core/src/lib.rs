//! Classical simulation of block-encoded Markov chains and quantum
//! singular-gap estimation.

pub mod cli;
pub mod encoding;
pub mod ensemble;
pub mod error;
pub mod estimator;
pub mod filter;
pub mod markov;
pub mod oracle;
pub mod qsvt;
pub mod sweep;

pub use error::{Error, Result};
